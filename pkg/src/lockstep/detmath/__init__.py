"""Deterministic math: bit-reproducible kernels plus a seeded value PRNG.

Two interchangeable backends implement the kernels: a pure-Python reference
(_reference) and an optional compiled twin (_kernels) built at install time.
They agree bit for bit on every input; the compiled one is just faster.
Selection happens once at import, overridable with LOCKSTEP_DETMATH=py|c|auto
(auto prefers the compiled backend and falls back silently).

The PRNG is splitmix64 exposed as an immutable value: every step returns the
drawn number and the successor state, so replaying a log replays the exact
stream.  Use mix64 directly when all you need is a well-scrambled hash.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from ..errors import InvalidArgumentError
from . import _reference
from ._reference import bits_float, float_bits

_choice = os.environ.get("LOCKSTEP_DETMATH", "auto").strip().lower() or "auto"
if _choice not in ("auto", "py", "c"):
    raise ImportError(f"LOCKSTEP_DETMATH must be auto, py, or c, not {_choice!r}")

_impl = None
if _choice in ("auto", "c"):
    try:
        from . import _kernels as _impl
    except ImportError:
        if _choice == "c":
            raise
if _impl is None:
    _impl = _reference

BACKEND = "c" if _impl is not _reference else "py"

det_sin = _impl.det_sin
det_cos = _impl.det_cos
det_tan = _impl.det_tan
det_exp = _impl.det_exp
det_ln = _impl.det_ln

_MASK64 = 0xFFFFFFFFFFFFFFFF
_UNIT_SCALE = 2.0 ** -53


def mix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: ``(output, next_state)``, both 64-bit."""
    return _impl.mix64(state & _MASK64)


@dataclass(frozen=True, slots=True)
class DetRng:
    """Immutable PRNG state; draw with rng_next/rng_unit, keep the successor."""

    state: int


def rng_new(seed: int) -> DetRng:
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise InvalidArgumentError(f"seed must be an int, got {seed!r}")
    return DetRng(seed & _MASK64)


def rng_next(rng: DetRng) -> tuple[int, DetRng]:
    """Draw a uniform 64-bit integer."""
    value, state = _impl.mix64(rng.state)
    return value, DetRng(state)


def rng_unit(rng: DetRng) -> tuple[float, DetRng]:
    """Draw a float in [0, 1) with 53 uniform bits."""
    value, state = _impl.mix64(rng.state)
    return (value >> 11) * _UNIT_SCALE, DetRng(state)


def backends() -> dict[str, object]:
    """The importable backends by name; 'c' is absent when not built."""
    out: dict[str, object] = {"py": _reference}
    try:
        from . import _kernels

        out["c"] = _kernels
    except ImportError:
        pass
    return out


__all__ = [
    "BACKEND",
    "DetRng",
    "backends",
    "bits_float",
    "det_cos",
    "det_exp",
    "det_ln",
    "det_sin",
    "det_tan",
    "float_bits",
    "mix64",
    "rng_new",
    "rng_next",
    "rng_unit",
]
