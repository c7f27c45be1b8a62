# cython: language_level=3
"""Compiled twin of _reference.py.

Every expression here mirrors the reference operation for operation, in the
same order, because the contract is bit equality, not approximate agreement.
The build compiles with -ffp-contract=off and without any fast-math flag so
the compiler cannot fuse or reassociate intermediates.  When editing either
file, edit both.
"""

from libc.math cimport fabs, floor, copysign, isfinite
from libc.stdint cimport uint64_t, int64_t
from libc.string cimport memcpy


cdef inline uint64_t _dbits(double x) nogil:
    cdef uint64_t b
    memcpy(&b, &x, 8)
    return b


cdef inline double _dfrom(uint64_t b) nogil:
    cdef double x
    memcpy(&x, &b, 8)
    return x


cdef double _NAN = _dfrom(0x7FF8000000000000ULL)
cdef double _INF = _dfrom(0x7FF0000000000000ULL)

cdef double _PI = 3.141592653589793
cdef double _TWO_PI = 6.283185307179586
cdef double _HALF_PI = 1.5707963267948966

cdef double _SIN_B = 1.2732395447351628
cdef double _SIN_C = -0.4052847345693511
cdef double _SIN_P = 0.224


cdef inline double _sin_core(double ax) nogil:
    cdef double k = floor((ax + _PI) / _TWO_PI)
    cdef double r = ax - k * _TWO_PI
    cdef double y = _SIN_B * r + _SIN_C * r * fabs(r)
    return _SIN_P * (y * fabs(y) - y) + y


def det_sin(double x):
    if not isfinite(x):
        return _NAN
    cdef bint neg = copysign(1.0, x) < 0.0
    cdef double y = _sin_core(fabs(x))
    return -y if neg else y


def det_cos(double x):
    if not isfinite(x):
        return _NAN
    return _sin_core(fabs(x) + _HALF_PI)


def det_tan(double x):
    if not isfinite(x):
        return _NAN
    cdef bint neg = copysign(1.0, x) < 0.0
    cdef double s = _sin_core(fabs(x))
    if neg:
        s = -s
    cdef double c = _sin_core(fabs(x) + _HALF_PI)
    if c == 0.0:
        # mirror the reference: hand-rolled IEEE division at exact-zero
        # cosines, because the hardware's 0/0 NaN need not match ours
        if s == 0.0:
            return _NAN
        if (copysign(1.0, s) < 0.0) != (copysign(1.0, c) < 0.0):
            return -_INF
        return _INF
    return s / c


cdef double _LN2 = 0.6931471805599453

cdef double _EXP_C0 = 1.0
cdef double _EXP_C1 = 0.9999999999850354
cdef double _EXP_C2 = 0.5000000084631135
cdef double _EXP_C3 = 0.1666666684917194
cdef double _EXP_C4 = 0.04166627964248391
cdef double _EXP_C5 = 0.008333274151319002
cdef double _EXP_C6 = 0.001394465096787096
cdef double _EXP_C7 = 0.00019911548364293333


cdef inline double _pow2(int64_t k) nogil:
    return _dfrom(<uint64_t>((k + 1023) << 52))


def det_exp(double x):
    if not isfinite(x):
        return _NAN
    if x > 746.0:
        return _INF
    if x < -746.0:
        return 0.0
    cdef double kf = floor(x / _LN2 + 0.5)
    cdef double r = x - kf * _LN2
    cdef double p = _EXP_C7
    p = p * r + _EXP_C6
    p = p * r + _EXP_C5
    p = p * r + _EXP_C4
    p = p * r + _EXP_C3
    p = p * r + _EXP_C2
    p = p * r + _EXP_C1
    p = p * r + _EXP_C0
    cdef int64_t k = <int64_t>kf
    if k > 1023:
        return (p * _pow2(1023)) * _pow2(k - 1023)
    if k < -1022:
        return (p * _pow2(k + 1022)) * _pow2(-1022)
    return p * _pow2(k)


cdef double _SQRT2 = 1.4142135623730951
cdef double _TWO_54 = 18014398509481984.0

cdef double _LN_C0 = 0.3333333333333333
cdef double _LN_C1 = 0.2
cdef double _LN_C2 = 0.14285714285714285
cdef double _LN_C3 = 0.1111111111111111
cdef double _LN_C4 = 0.09090909090909091
cdef double _LN_C5 = 0.07692307692307693
cdef double _LN_C6 = 0.06666666666666667


def det_ln(double x):
    if not (x > 0.0) or not isfinite(x):
        return _NAN
    cdef uint64_t b = _dbits(x)
    cdef int64_t e = <int64_t>(b >> 52) - 1023
    if e == -1023:
        b = _dbits(x * _TWO_54)
        e = <int64_t>(b >> 52) - 1023 - 54
    cdef double m = _dfrom((b & 0xFFFFFFFFFFFFFULL) | 0x3FF0000000000000ULL)
    if m > _SQRT2:
        m = m * 0.5
        e = e + 1
    cdef double s = (m - 1.0) / (m + 1.0)
    cdef double s2 = s * s
    cdef double acc = _LN_C6
    acc = acc * s2 + _LN_C5
    acc = acc * s2 + _LN_C4
    acc = acc * s2 + _LN_C3
    acc = acc * s2 + _LN_C2
    acc = acc * s2 + _LN_C1
    acc = acc * s2 + _LN_C0
    cdef double lnm = 2.0 * s * (1.0 + s2 * acc)
    return <double>e * _LN2 + lnm


def mix64(state):
    cdef uint64_t s = <uint64_t>state + 0x9E3779B97F4A7C15ULL
    cdef uint64_t z = s
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    z = z ^ (z >> 31)
    return z, s
