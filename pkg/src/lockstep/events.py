"""Input events and the timestamped messages built from them.

Events are the only data players ever exchange: worlds are recomputed, never
sent.  Every type here is a frozen value; the engine relies on that to share
logs and cached states without copying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .errors import InvalidArgumentError


class MouseButton(Enum):
    LEFT = "Left"
    MIDDLE = "Middle"
    RIGHT = "Right"


def _check_point(point: object) -> tuple[float, float]:
    if (
        not isinstance(point, tuple)
        or len(point) != 2
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in point)
    ):
        raise InvalidArgumentError(f"point must be a pair of numbers, got {point!r}")
    x, y = float(point[0]), float(point[1])
    # NaN or infinite coordinates would survive into every replica's world
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InvalidArgumentError(f"point coordinates must be finite, got {point!r}")
    return (x, y)


@dataclass(frozen=True, slots=True)
class KeyPress:
    text: str

    def __post_init__(self) -> None:
        if not isinstance(self.text, str):
            raise InvalidArgumentError("key text must be a string")


@dataclass(frozen=True, slots=True)
class KeyRelease:
    text: str

    def __post_init__(self) -> None:
        if not isinstance(self.text, str):
            raise InvalidArgumentError("key text must be a string")


@dataclass(frozen=True, slots=True)
class MousePress:
    button: MouseButton
    point: tuple[float, float]

    def __post_init__(self) -> None:
        if not isinstance(self.button, MouseButton):
            raise InvalidArgumentError(f"not a mouse button: {self.button!r}")
        object.__setattr__(self, "point", _check_point(self.point))


@dataclass(frozen=True, slots=True)
class MouseRelease:
    button: MouseButton
    point: tuple[float, float]

    def __post_init__(self) -> None:
        if not isinstance(self.button, MouseButton):
            raise InvalidArgumentError(f"not a mouse button: {self.button!r}")
        object.__setattr__(self, "point", _check_point(self.point))


@dataclass(frozen=True, slots=True)
class MouseMovement:
    point: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", _check_point(self.point))


InputEvent = Union[KeyPress, KeyRelease, MousePress, MouseRelease, MouseMovement]

_EVENT_TYPES = (KeyPress, KeyRelease, MousePress, MouseRelease, MouseMovement)


@dataclass(frozen=True, slots=True)
class Message:
    """One player input stamped with the game time it takes effect at."""

    t: float
    p: int
    e: InputEvent

    def __post_init__(self) -> None:
        if isinstance(self.t, int) and not isinstance(self.t, bool):
            object.__setattr__(self, "t", float(self.t))
        if not isinstance(self.t, float) or not math.isfinite(self.t) or self.t < 0.0:
            raise InvalidArgumentError(
                f"timestamp must be a finite non-negative number, got {self.t!r}"
            )
        if not isinstance(self.p, int) or isinstance(self.p, bool) or self.p < 0:
            raise InvalidArgumentError(f"player id must be a non-negative int, got {self.p!r}")
        if not isinstance(self.e, _EVENT_TYPES):
            raise InvalidArgumentError(f"not an input event: {self.e!r}")

    def sort_key(self) -> tuple[float, int]:
        return (self.t, self.p)
