"""Example rule sets plus the digest helpers the harness compares with.

Each rule set is a small pure start/step/handle triple over an immutable
world.  They are chosen to stress different engine properties: counting
makes step invocations directly observable, drift makes handle order
visible at the bit level, dot-trace is the interactive demo's game, and the
pendulum is chaotic enough that a single wrong bit anywhere becomes a
completely different trajectory within a few hundred steps.
"""

from __future__ import annotations

from typing import Any, Iterable

from .detmath import det_cos, det_exp, det_sin, float_bits, mix64, rng_new, rng_unit
from .events import InputEvent, KeyPress, KeyRelease, MouseMovement, MousePress, MouseRelease


def digest_chain(values: Iterable[int], h: int = 0) -> int:
    """Fold 64-bit values into one well-mixed 64-bit digest."""
    for v in values:
        h, _ = mix64(h ^ (v & 0xFFFFFFFFFFFFFFFF))
    return h


def digest_floats(xs: Iterable[float], h: int = 0) -> int:
    """Digest floats by bit pattern, so any one-ulp difference changes it."""
    return digest_chain((float_bits(x) for x in xs), h)


def _event_code(e: InputEvent) -> int:
    if isinstance(e, KeyPress):
        return digest_chain(e.text.encode("utf-8"), 1)
    if isinstance(e, KeyRelease):
        return digest_chain(e.text.encode("utf-8"), 2)
    if isinstance(e, MousePress):
        return digest_chain(
            (float_bits(e.point[0]), float_bits(e.point[1])), 3 + ord(e.button.value[0])
        )
    if isinstance(e, MouseRelease):
        return digest_chain(
            (float_bits(e.point[0]), float_bits(e.point[1])), 1000 + ord(e.button.value[0])
        )
    return digest_chain((float_bits(e.point[0]), float_bits(e.point[1])), 4)


class CountingRules:
    """World is an int that counts step invocations; handle adds nothing.

    With the world equal to the number of times step has run, tests can read
    invocation counts straight out of query results and check the interval
    chopping arithmetic without any instrumentation.
    """

    num_players = 2

    def start(self, seed: int) -> int:
        return 0

    def step(self, dt: float, world: int) -> int:
        return world + 1

    def handle(self, player: int, event: InputEvent, world: int) -> int:
        return world

    def digest(self, world: int) -> int:
        return digest_chain((world,))


class DriftRules:
    """Two floats scrambled by every event; order-sensitive on purpose.

    handle folds the player id and event content into the pair through
    non-commuting arithmetic, so two clients that apply the same events in
    different orders disagree in the bit pattern immediately.  step leaks
    the elapsed time into the pair through the deterministic transcendentals
    to also catch any interval-chopping disagreement.
    """

    num_players = 4

    def start(self, seed: int) -> tuple[float, float]:
        u1, rng = rng_unit(rng_new(seed))
        u2, _ = rng_unit(rng)
        return (u1 * 2.0 - 1.0, u2 * 2.0 - 1.0)

    def step(self, dt: float, world: tuple[float, float]) -> tuple[float, float]:
        a, b = world
        a2 = a + dt * det_sin(b * 3.0 + a)
        b2 = b + dt * det_cos(a * 2.0 - b) * 0.5
        return (a2, b2)

    def handle(
        self, player: int, event: InputEvent, world: tuple[float, float]
    ) -> tuple[float, float]:
        a, b = world
        k = ((_event_code(event) >> 11) * 2.0 ** -53) - 0.5
        a2 = a * 0.75 + k + float(player + 1) * 0.125
        b2 = b + a2 * 0.5
        return (a2, b2)

    def digest(self, world: tuple[float, float]) -> int:
        return digest_floats(world)


class DotTraceRules:
    """Cursors leaving fading trails: the interactive demo's game.

    The world is a tuple of (player, radius, x, y) dots, newest first.  Each
    mouse movement drops a fresh dot at radius 1; steps shrink every dot by a
    decaying exponential of the elapsed time and cull what has faded below
    visibility.  The cull compares the pre-decay radius so that whether a dot
    survives depends only on total elapsed time, not on who is looking.
    """

    num_players = 2

    def start(self, seed: int) -> tuple:
        return ()

    def step(self, dt: float, world: tuple) -> tuple:
        decay = det_exp(-dt)
        return tuple(
            (p, r * decay, x, y) for (p, r, x, y) in world if r >= 0.1
        )

    def handle(self, player: int, event: InputEvent, world: tuple) -> tuple:
        if isinstance(event, MouseMovement) and player < 2:
            x, y = event.point
            return ((player, 1.0, x, y),) + world
        return world

    def digest(self, world: tuple) -> int:
        h = digest_chain((len(world),))
        for p, r, x, y in world:
            h = digest_chain((p, float_bits(r), float_bits(x), float_bits(y)), h)
        return h


class PendulumRules:
    """Double pendulum under fixed-step integration; chaos as a bit detector.

    start draws the initial angles from the seed; step integrates with the
    deterministic transcendentals (or libm's, for demonstrating why that
    fails across platforms -- pass use_det_math=False).  handle ignores all
    input, so scripted events merely drive commitment forward.  Damping and a
    gentle time scale keep the state bounded over very long runs while
    leaving the dynamics chaotic enough to amplify any single-bit error.
    """

    num_players = 1

    def __init__(self, use_det_math: bool = True) -> None:
        self.use_det_math = use_det_math
        if use_det_math:
            self._sin, self._cos = det_sin, det_cos
        else:
            import math

            self._sin, self._cos = math.sin, math.cos

    def start(self, seed: int) -> tuple[float, float, float, float]:
        u1, rng = rng_unit(rng_new(seed))
        u2, _ = rng_unit(rng)
        return (1.5 + u1, 0.0, 2.0 + u2, 0.0)

    def step(
        self, dt: float, world: tuple[float, float, float, float]
    ) -> tuple[float, float, float, float]:
        sin, cos = self._sin, self._cos
        th1, w1, th2, w2 = world
        d = th1 - th2
        sd, cd = sin(d), cos(d)
        denom = 2.0 - cd * cd
        a1 = (-sin(th1) * 2.0 - sd * w2 * w2 - cd * (-sin(th2) - sd * w1 * w1)) / denom
        a2 = (-sin(th2) + cd * sin(th1) + sd * w1 * w1 + cd * sd * w2 * w2 * 0.5) / denom
        # thermostat: nudge kinetic energy toward a set point, so the motion
        # neither damps to rest nor blows up over arbitrarily long runs
        e = w1 * w1 + w2 * w2
        c = dt * 0.05 * (e - 4.0)
        if c > 0.5:
            c = 0.5
        elif c < -0.5:
            c = -0.5
        f = 1.0 - c
        s = dt * 0.5
        w1n = (w1 + a1 * s) * f
        w2n = (w2 + a2 * s) * f
        return (th1 + w1n * s, w1n, th2 + w2n * s, w2n)

    def handle(
        self, player: int, event: InputEvent, world: tuple[float, float, float, float]
    ) -> tuple[float, float, float, float]:
        return world

    def digest(self, world: tuple[float, float, float, float]) -> int:
        return digest_floats(world)


def build_rules(rules_id: str) -> Any:
    """The registry behind scenario files and the command line."""
    builders = {
        "counting": CountingRules,
        "drift": DriftRules,
        "dot-trace": DotTraceRules,
        "pendulum": PendulumRules,
        "pendulum-native": lambda: PendulumRules(use_det_math=False),
    }
    builder = builders.get(rules_id)
    if builder is None:
        from .errors import InvalidArgumentError

        raise InvalidArgumentError(
            f"unknown rules {rules_id!r}; pick one of {sorted(builders)}"
        )
    return builder()


RULES_IDS = ("counting", "drift", "dot-trace", "pendulum", "pendulum-native")
