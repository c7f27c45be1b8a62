// Bit-reproducible math kernels, ported expression for expression from the
// engine's reference implementation.
//
// Everything is built from IEEE-754 basic operations (add, multiply, divide,
// abs, floor), which are correctly rounded in every conforming runtime, so
// these functions return the same bits here as they do on the Python side.
// Math.sin/Math.exp make no such promise, and in a game whose step function
// compounds tiny errors, one differing ulp becomes a different world.

import { bitsToFloat, floatToBits, U64_MAX } from "./util.js";

const NAN = bitsToFloat(0x7ff8000000000000n);
const INF = bitsToFloat(0x7ff0000000000000n);

const PI = 3.141592653589793;
const TWO_PI = 6.283185307179586;
const HALF_PI = 1.5707963267948966;

// parabola through (0,0), (pi/2,1), (pi,0), then one refinement pass
const SIN_B = 1.2732395447351628;
const SIN_C = -0.4052847345693511;
const SIN_P = 0.224;

function signBitSet(x: number): boolean {
  return x < 0 || Object.is(x, -0);
}

function sinCore(ax: number): number {
  const k = Math.floor((ax + PI) / TWO_PI);
  const r = ax - k * TWO_PI;
  const y = SIN_B * r + SIN_C * r * Math.abs(r);
  return SIN_P * (y * Math.abs(y) - y) + y;
}

export function detSin(x: number): number {
  if (!Number.isFinite(x)) return NAN;
  const neg = signBitSet(x);
  const y = sinCore(Math.abs(x));
  return neg ? -y : y;
}

export function detCos(x: number): number {
  if (!Number.isFinite(x)) return NAN;
  return sinCore(Math.abs(x) + HALF_PI);
}

export function detTan(x: number): number {
  if (!Number.isFinite(x)) return NAN;
  const s = detSin(x);
  const c = detCos(x);
  if (c === 0) {
    // exact-zero cosine only happens when range reduction of a huge x
    // cancels completely; divide by IEEE rules explicitly so the result
    // is bit-identical to the other implementations
    if (s === 0) return NAN;
    return signBitSet(s) !== signBitSet(c) ? -INF : INF;
  }
  return s / c;
}

const LN2 = 0.6931471805599453;

const EXP_COEFS = [
  1.0, 0.9999999999850354, 0.5000000084631135, 0.1666666684917194,
  0.04166627964248391, 0.008333274151319002, 0.001394465096787096,
  0.00019911548364293333,
];

function pow2(k: number): number {
  // exact for -1022 <= k <= 1023
  return bitsToFloat(BigInt(k + 1023) << 52n);
}

export function detExp(x: number): number {
  if (!Number.isFinite(x)) return NAN;
  if (x > 746.0) return INF;
  if (x < -746.0) return 0.0;
  const kf = Math.floor(x / LN2 + 0.5);
  const r = x - kf * LN2;
  let p = EXP_COEFS[7];
  p = p * r + EXP_COEFS[6];
  p = p * r + EXP_COEFS[5];
  p = p * r + EXP_COEFS[4];
  p = p * r + EXP_COEFS[3];
  p = p * r + EXP_COEFS[2];
  p = p * r + EXP_COEFS[1];
  p = p * r + EXP_COEFS[0];
  const k = kf;
  if (k > 1023) {
    return p * pow2(1023) * pow2(k - 1023);
  }
  if (k < -1022) {
    return p * pow2(k + 1022) * pow2(-1022);
  }
  return p * pow2(k);
}

const SQRT2 = 1.4142135623730951;
const TWO_54 = 18014398509481984.0;

const LN_COEFS = [
  0.3333333333333333, 0.2, 0.14285714285714285, 0.1111111111111111,
  0.09090909090909091, 0.07692307692307693, 0.06666666666666667,
];

export function detLn(x: number): number {
  if (!(x > 0) || !Number.isFinite(x)) return NAN;
  let b = floatToBits(x);
  let e = Number(b >> 52n) - 1023;
  if (e === -1023) {
    b = floatToBits(x * TWO_54);
    e = Number(b >> 52n) - 1023 - 54;
  }
  let m = bitsToFloat((b & 0xfffffffffffffn) | 0x3ff0000000000000n);
  if (m > SQRT2) {
    m = m * 0.5;
    e = e + 1;
  }
  const s = (m - 1.0) / (m + 1.0);
  const s2 = s * s;
  let acc = LN_COEFS[6];
  acc = acc * s2 + LN_COEFS[5];
  acc = acc * s2 + LN_COEFS[4];
  acc = acc * s2 + LN_COEFS[3];
  acc = acc * s2 + LN_COEFS[2];
  acc = acc * s2 + LN_COEFS[1];
  acc = acc * s2 + LN_COEFS[0];
  const lnm = 2.0 * s * (1.0 + s2 * acc);
  return e * LN2 + lnm;
}

const SM_GAMMA = 0x9e3779b97f4a7c15n;
const SM_MIX1 = 0xbf58476d1ce4e5b9n;
const SM_MIX2 = 0x94d049bb133111ebn;

// one splitmix64 step: [output, nextState]
export function mix64(state: bigint): [bigint, bigint] {
  const s = (state + SM_GAMMA) & U64_MAX;
  let z = s;
  z = ((z ^ (z >> 30n)) * SM_MIX1) & U64_MAX;
  z = ((z ^ (z >> 27n)) * SM_MIX2) & U64_MAX;
  return [z ^ (z >> 31n), s];
}
