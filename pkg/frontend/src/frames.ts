// Wire protocol: length-prefixed canonical JSON frames.
//
// A frame is a 4-byte big-endian payload length followed by that many bytes
// of canonical JSON (sorted keys, no whitespace, ASCII escapes).  Times and
// coordinates travel as u64 bit patterns (t_bits, x_bits, y_bits) rather
// than JSON floats, which keeps every value exact and every frame
// byte-identical across implementations.

import { createHash } from "node:crypto";
import { bitsToFloat, canonicalJson, floatToBits, U64_MAX } from "./util.js";
import type { JsonValue } from "./util.js";

export const PROTO_VERSION = 1;
export const MAX_FRAME_BYTES = 1 << 20;

export class DecodeError extends Error {}

export type MouseButton = "Left" | "Middle" | "Right";

export type InputEvent =
  | { kind: "KeyPress"; text: string }
  | { kind: "KeyRelease"; text: string }
  | { kind: "MousePress"; button: MouseButton; x: number; y: number }
  | { kind: "MouseRelease"; button: MouseButton; x: number; y: number }
  | { kind: "MouseMovement"; x: number; y: number };

export type Frame =
  | { kind: "ClientHello"; protoVersion: number; gameHash: string }
  | { kind: "CreateGame"; numPlayers: number }
  | { kind: "GameCreated"; code: string }
  | { kind: "JoinGame"; code: string }
  | { kind: "Joined"; player: number; joined: number; total: number }
  | { kind: "GameStarted"; player: number; numPlayers: number; seed: bigint }
  | { kind: "Input"; tBits: bigint; event: InputEvent }
  | { kind: "Ping"; tBits: bigint }
  | { kind: "Relayed"; tBits: bigint; player: number; event: InputEvent }
  | { kind: "RelayedPing"; tBits: bigint; player: number }
  | { kind: "Error"; code: string; detail: string };

export function gameHash(rulesIdentity: string, protoVersion = PROTO_VERSION): string {
  const prefix = Buffer.alloc(4);
  prefix.writeUInt32BE(protoVersion);
  return createHash("sha256")
    .update(prefix)
    .update(Buffer.from(rulesIdentity, "utf-8"))
    .digest("hex");
}

function eventToObj(e: InputEvent): Record<string, string | bigint> {
  switch (e.kind) {
    case "KeyPress":
    case "KeyRelease":
      return { type: e.kind, text: e.text };
    case "MousePress":
    case "MouseRelease":
      return {
        type: e.kind,
        button: e.button,
        x_bits: floatBitsChecked(e.x, "x"),
        y_bits: floatBitsChecked(e.y, "y"),
      };
    case "MouseMovement":
      return {
        type: e.kind,
        x_bits: floatBitsChecked(e.x, "x"),
        y_bits: floatBitsChecked(e.y, "y"),
      };
  }
}

function floatBitsChecked(x: number, what: string): bigint {
  if (!Number.isFinite(x)) {
    throw new TypeError(`${what} coordinate must be finite, got ${x}`);
  }
  return floatToBits(x);
}

function frameToObj(frame: Frame): Record<string, unknown> {
  switch (frame.kind) {
    case "ClientHello":
      return { type: frame.kind, proto_version: frame.protoVersion, game_hash: frame.gameHash };
    case "CreateGame":
      return { type: frame.kind, num_players: frame.numPlayers };
    case "GameCreated":
    case "JoinGame":
      return { type: frame.kind, code: frame.code };
    case "Joined":
      return { type: frame.kind, player: frame.player, joined: frame.joined, total: frame.total };
    case "GameStarted":
      return {
        type: frame.kind,
        player: frame.player,
        num_players: frame.numPlayers,
        seed: frame.seed,
      };
    case "Input":
      return { type: frame.kind, t_bits: frame.tBits, event: eventToObj(frame.event) };
    case "Ping":
      return { type: frame.kind, t_bits: frame.tBits };
    case "Relayed":
      return {
        type: frame.kind,
        t_bits: frame.tBits,
        player: frame.player,
        event: eventToObj(frame.event),
      };
    case "RelayedPing":
      return { type: frame.kind, t_bits: frame.tBits, player: frame.player };
    case "Error":
      return { type: frame.kind, code: frame.code, detail: frame.detail };
  }
}

export function encodeFrame(frame: Frame): Buffer {
  const payload = Buffer.from(canonicalJson(frameToObj(frame) as JsonValue), "utf-8");
  if (payload.length > MAX_FRAME_BYTES) {
    throw new RangeError(`frame of ${payload.length} bytes exceeds the cap`);
  }
  const out = Buffer.alloc(4 + payload.length);
  out.writeUInt32BE(payload.length);
  payload.copy(out, 4);
  return out;
}

// JSON.parse would round u64 values above 2^53, so the known bit-pattern
// keys are quoted in the raw text first and converted to bigint after.  In
// valid JSON a quote inside a string is always escaped, so a literal
// "t_bits":123 match can only be a real key.
const U64_KEYS = /("(?:t_bits|x_bits|y_bits|seed)":)(\d+)/g;

function asU64(v: unknown, what: string): bigint {
  if (typeof v !== "string" || !/^\d+$/.test(v)) {
    throw new DecodeError(`${what} must be an unsigned integer`);
  }
  const b = BigInt(v);
  if (b > U64_MAX) throw new DecodeError(`${what} out of u64 range`);
  return b;
}

function asU8(v: unknown, what: string): number {
  if (typeof v !== "number" || !Number.isInteger(v) || v < 0 || v > 255) {
    throw new DecodeError(`${what} must be in 0..255`);
  }
  return v;
}

function asStr(v: unknown, what: string): string {
  if (typeof v !== "string") throw new DecodeError(`${what} must be a string`);
  return v;
}

function finiteCoord(bits: bigint, what: string): number {
  const x = bitsToFloat(bits);
  if (!Number.isFinite(x)) throw new DecodeError(`${what} must decode to a finite value`);
  return x;
}

function objToEvent(obj: Record<string, unknown>): InputEvent {
  const kind = obj["type"];
  if (kind === "KeyPress" || kind === "KeyRelease") {
    return { kind, text: asStr(obj["text"], "text") };
  }
  if (kind === "MousePress" || kind === "MouseRelease") {
    const button = obj["button"];
    if (button !== "Left" && button !== "Middle" && button !== "Right") {
      throw new DecodeError(`unknown mouse button ${String(button)}`);
    }
    return {
      kind,
      button,
      x: finiteCoord(asU64(obj["x_bits"], "x_bits"), "x_bits"),
      y: finiteCoord(asU64(obj["y_bits"], "y_bits"), "y_bits"),
    };
  }
  if (kind === "MouseMovement") {
    return {
      kind,
      x: finiteCoord(asU64(obj["x_bits"], "x_bits"), "x_bits"),
      y: finiteCoord(asU64(obj["y_bits"], "y_bits"), "y_bits"),
    };
  }
  throw new DecodeError(`unknown event type ${String(kind)}`);
}

export function decodePayload(payload: Buffer): Frame {
  let obj: unknown;
  try {
    obj = JSON.parse(payload.toString("utf-8").replace(U64_KEYS, '$1"$2"'));
  } catch (err) {
    throw new DecodeError(`frame is not valid JSON: ${String(err)}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new DecodeError("frame payload must be a JSON object");
  }
  const o = obj as Record<string, unknown>;
  const kind = o["type"];
  switch (kind) {
    case "ClientHello": {
      const v = o["proto_version"];
      if (typeof v !== "number" || !Number.isInteger(v) || v < 0) {
        throw new DecodeError("proto_version must be an unsigned integer");
      }
      return { kind, protoVersion: v, gameHash: asStr(o["game_hash"], "game_hash") };
    }
    case "CreateGame":
      return { kind, numPlayers: asU8(o["num_players"], "num_players") };
    case "GameCreated":
    case "JoinGame": {
      const code = asStr(o["code"], "code");
      if (!/^[A-Z]{4}$/.test(code)) throw new DecodeError(`bad room code ${code}`);
      return { kind, code };
    }
    case "Joined":
      return {
        kind,
        player: asU8(o["player"], "player"),
        joined: asU8(o["joined"], "joined"),
        total: asU8(o["total"], "total"),
      };
    case "GameStarted":
      return {
        kind,
        player: asU8(o["player"], "player"),
        numPlayers: asU8(o["num_players"], "num_players"),
        seed: asU64(o["seed"], "seed"),
      };
    case "Input":
      return {
        kind,
        tBits: asU64(o["t_bits"], "t_bits"),
        event: objToEvent(o["event"] as Record<string, unknown>),
      };
    case "Ping":
      return { kind, tBits: asU64(o["t_bits"], "t_bits") };
    case "Relayed":
      return {
        kind,
        tBits: asU64(o["t_bits"], "t_bits"),
        player: asU8(o["player"], "player"),
        event: objToEvent(o["event"] as Record<string, unknown>),
      };
    case "RelayedPing":
      return { kind, tBits: asU64(o["t_bits"], "t_bits"), player: asU8(o["player"], "player") };
    case "Error":
      return { kind, code: asStr(o["code"], "code"), detail: asStr(o["detail"], "detail") };
    default:
      throw new DecodeError(`unknown frame type ${String(kind)}`);
  }
}

// Reassembles frames from a TCP byte stream; feed() accepts whatever chunk
// sizes the socket produces and returns the frames completed by it.
export class FrameSplitter {
  private pending: Buffer = Buffer.alloc(0);

  feed(chunk: Buffer): Frame[] {
    this.pending = this.pending.length === 0 ? chunk : Buffer.concat([this.pending, chunk]);
    const frames: Frame[] = [];
    for (;;) {
      if (this.pending.length < 4) break;
      const length = this.pending.readUInt32BE(0);
      if (length > MAX_FRAME_BYTES) {
        throw new DecodeError(`declared frame length ${length} exceeds the cap`);
      }
      if (this.pending.length < 4 + length) break;
      frames.push(decodePayload(this.pending.subarray(4, 4 + length)));
      this.pending = this.pending.subarray(4 + length);
    }
    return frames;
  }
}
