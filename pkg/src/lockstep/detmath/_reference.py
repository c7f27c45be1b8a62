"""Pure-Python reference for the bit-reproducible math kernels.

Everything here is built from IEEE-754 basic operations (add, subtract,
multiply, divide, abs, floor, comparison) plus integer bit twiddling.  Basic
operations are correctly rounded on every conforming platform, so two
machines that run these functions on the same inputs produce the same bits,
which is the property the whole engine rests on.  libm's sin/exp/log make no
such promise: their results differ across libc versions and vendors, and a
one-ulp disagreement inside a chaotic update rule becomes a visibly different
world within seconds.

None of this is fast or correctly rounded.  The approximations are small
fixed polynomials chosen to meet documented error bounds, not to compete
with libm.  The compiled twin in _kernels.pyx must mirror every expression
here operation for operation; when editing one, edit both.
"""

from __future__ import annotations

import math
import struct


def float_bits(x: float) -> int:
    """The 64 bits of ``x`` as an unsigned integer."""
    return struct.unpack("<Q", struct.pack("<d", x))[0]


def bits_float(b: int) -> float:
    """The float whose bit pattern is the unsigned 64-bit integer ``b``."""
    return struct.unpack("<d", struct.pack("<Q", b))[0]


# Bit-pinned specials: the compiled twin builds these from the same patterns,
# so cross-backend comparisons can demand bit equality even for NaN results.
_NAN = bits_float(0x7FF8000000000000)
_INF = bits_float(0x7FF0000000000000)

_PI = 3.141592653589793
_TWO_PI = 6.283185307179586
_HALF_PI = 1.5707963267948966

# Parabola through (0,0), (pi/2,1), (pi,0): y = B*r + C*r*|r| on [-pi, pi].
_SIN_B = 1.2732395447351628
_SIN_C = -0.4052847345693511
# Blend weight for the refinement pass y + P*(y*|y| - y).  0.224 is the
# minimax optimum of this family (max error 9.2e-4 over [-10, 10]) and any
# weight leaves the peaks at exactly +-1.
_SIN_P = 0.224


def _sin_core(ax: float) -> float:
    # range reduction to [-pi, pi); ax + _PI cannot overflow because pi is
    # far below half an ulp of the largest finite doubles
    k = float(math.floor((ax + _PI) / _TWO_PI))
    r = ax - k * _TWO_PI
    y = _SIN_B * r + _SIN_C * r * abs(r)
    return _SIN_P * (y * abs(y) - y) + y


def det_sin(x: float) -> float:
    if not math.isfinite(x):
        return _NAN
    # fold to |x| and restore the sign afterwards so det_sin(-x) is the exact
    # negation of det_sin(x), bit for bit, including at -0.0
    neg = math.copysign(1.0, x) < 0.0
    y = _sin_core(abs(x))
    return -y if neg else y


def det_cos(x: float) -> float:
    if not math.isfinite(x):
        return _NAN
    # evenness comes from |x|; the quarter-turn shift keeps the argument
    # non-negative so _sin_core sees the same range as det_sin
    return _sin_core(abs(x) + _HALF_PI)


def det_tan(x: float) -> float:
    if not math.isfinite(x):
        return _NAN
    s = det_sin(x)
    c = det_cos(x)
    if c == 0.0:
        # possible only when range reduction of an astronomically large x
        # cancels to an exact zero; divide by IEEE rules explicitly so both
        # backends produce identical bits here too
        if s == 0.0:
            return _NAN
        neg = (math.copysign(1.0, s) < 0.0) != (math.copysign(1.0, c) < 0.0)
        return -_INF if neg else _INF
    return s / c


_LN2 = 0.6931471805599453

# Degree-7 fit of 2^52-scaled exp on [-ln2/2, ln2/2], constant term forced to
# exactly 1.0 so det_exp(0.0) == 1.0.  Max relative error 1.1e-10 over
# [-10, 10]; a plain Taylor prefix of the same degree misses the documented
# 1e-9 bound.
_EXP_COEFS = (
    1.0,
    0.9999999999850354,
    0.5000000084631135,
    0.1666666684917194,
    0.04166627964248391,
    0.008333274151319002,
    0.001394465096787096,
    0.00019911548364293333,
)


def _pow2(k: int) -> float:
    # exact for -1022 <= k <= 1023
    return bits_float((k + 1023) << 52)


def det_exp(x: float) -> float:
    if not math.isfinite(x):
        return _NAN
    # saturate where the true result is out of range anyway; this also keeps
    # k small enough for the exponent arithmetic below
    if x > 746.0:
        return _INF
    if x < -746.0:
        return 0.0
    kf = float(math.floor(x / _LN2 + 0.5))
    r = x - kf * _LN2
    p = _EXP_COEFS[7]
    p = p * r + _EXP_COEFS[6]
    p = p * r + _EXP_COEFS[5]
    p = p * r + _EXP_COEFS[4]
    p = p * r + _EXP_COEFS[3]
    p = p * r + _EXP_COEFS[2]
    p = p * r + _EXP_COEFS[1]
    p = p * r + _EXP_COEFS[0]
    k = int(kf)
    if k > 1023:
        # overflow territory for a single scale; split so each factor is exact
        return (p * _pow2(1023)) * _pow2(k - 1023)
    if k < -1022:
        # the first scale keeps full precision, the second may round once
        # into the subnormal range, matching a single scaled multiply
        return (p * _pow2(k + 1022)) * _pow2(-1022)
    return p * _pow2(k)


_SQRT2 = 1.4142135623730951
_TWO_54 = 18014398509481984.0

# atanh series coefficients 1/3, 1/5, ..., 1/15 for ln via s = (m-1)/(m+1)
_LN_COEFS = (
    0.3333333333333333,
    0.2,
    0.14285714285714285,
    0.1111111111111111,
    0.09090909090909091,
    0.07692307692307693,
    0.06666666666666667,
)


def det_ln(x: float) -> float:
    if not (x > 0.0) or not math.isfinite(x):
        return _NAN
    b = float_bits(x)
    e = (b >> 52) - 1023
    if e == -1023:
        # subnormal: rescale into the normal range and account for it in e
        b = float_bits(x * _TWO_54)
        e = (b >> 52) - 1023 - 54
    m = bits_float((b & 0xFFFFFFFFFFFFF) | 0x3FF0000000000000)
    if m > _SQRT2:
        m = m * 0.5
        e = e + 1
    s = (m - 1.0) / (m + 1.0)
    s2 = s * s
    acc = _LN_COEFS[6]
    acc = acc * s2 + _LN_COEFS[5]
    acc = acc * s2 + _LN_COEFS[4]
    acc = acc * s2 + _LN_COEFS[3]
    acc = acc * s2 + _LN_COEFS[2]
    acc = acc * s2 + _LN_COEFS[1]
    acc = acc * s2 + _LN_COEFS[0]
    lnm = 2.0 * s * (1.0 + s2 * acc)
    return float(e) * _LN2 + lnm


_MASK64 = 0xFFFFFFFFFFFFFFFF
_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_MIX1 = 0xBF58476D1CE4E5B9
_SM_MIX2 = 0x94D049BB133111EB


def mix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 generator.

    Returns ``(output, next_state)``; both are 64-bit values.  Also serves as
    the package's general-purpose avalanche hash: ``mix64(x)[0]`` scrambles
    every input bit into every output bit.
    """
    s = (state + _SM_GAMMA) & _MASK64
    z = s
    z = ((z ^ (z >> 30)) * _SM_MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM_MIX2) & _MASK64
    return z ^ (z >> 31), s
