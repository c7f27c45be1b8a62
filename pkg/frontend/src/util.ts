// Bit-level float plumbing and the canonical JSON writer.
//
// The wire protocol never carries JSON floats; every double travels as the
// unsigned 64-bit integer holding its IEEE-754 bits, so values survive the
// trip exactly and a frame has one byte form in every language.

const view = new DataView(new ArrayBuffer(8));

export const U64_MAX = 0xffffffffffffffffn;

export function floatToBits(x: number): bigint {
  view.setFloat64(0, x, true);
  return view.getBigUint64(0, true);
}

export function bitsToFloat(b: bigint): number {
  if (b < 0n || b > U64_MAX) {
    throw new RangeError(`bit pattern out of u64 range: ${b}`);
  }
  view.setBigUint64(0, b, true);
  return view.getFloat64(0, true);
}

const SHORT_ESCAPES: Record<string, string> = {
  '"': '\\"',
  "\\": "\\\\",
  "\b": "\\b",
  "\f": "\\f",
  "\n": "\\n",
  "\r": "\\r",
  "\t": "\\t",
};

// Matches the reference encoder: everything outside printable ASCII is a
// \uXXXX escape (one per UTF-16 unit, so astral chars become surrogate
// pairs), and only the JSON short escapes are used where they exist.
export function jsonString(s: string): string {
  let out = '"';
  for (let i = 0; i < s.length; i++) {
    const c = s[i];
    const code = s.charCodeAt(i);
    if (c in SHORT_ESCAPES) {
      out += SHORT_ESCAPES[c];
    } else if (code >= 0x20 && code <= 0x7e) {
      out += c;
    } else {
      out += "\\u" + code.toString(16).padStart(4, "0");
    }
  }
  return out + '"';
}

export type JsonValue =
  | string
  | number
  | bigint
  | { [key: string]: JsonValue }
  | JsonValue[];

// Canonical form: keys sorted, no whitespace, ASCII only.  Numbers must be
// integers (bigint or integral number); there is no float case on purpose.
export function canonicalJson(v: JsonValue): string {
  if (typeof v === "string") return jsonString(v);
  if (typeof v === "bigint") return v.toString();
  if (typeof v === "number") {
    if (!Number.isInteger(v)) {
      throw new TypeError(`payload numbers must be integers, got ${v}`);
    }
    return v.toString();
  }
  if (Array.isArray(v)) {
    return "[" + v.map(canonicalJson).join(",") + "]";
  }
  const keys = Object.keys(v).sort();
  return "{" + keys.map((k) => jsonString(k) + ":" + canonicalJson(v[k])).join(",") + "}";
}
