"""Deterministic simulation harness: whole multi-client runs in one thread.

The harness runs N scripted clients against a modelled network inside a
single virtual-time event loop.  No real sockets, no real clocks, no
threads: a scenario plus a network model fully determines every delivery
time, every tick, and therefore every bit of every world.  Runs are
reproducible by construction, which turns "clients eventually agree" from a
flaky integration test into a unit test.

Virtual time is a heap of (time, priority, sequence) entries.  The priority
breaks ties at equal times -- deliveries before script actions before ticks
before samples -- and the sequence number makes the remaining order FIFO, so
simultaneous work has exactly one execution order.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Union

from .detmath import DetRng, rng_new, rng_next, rng_unit
from .engine import GAME_RATE, DEFAULT_SMOOTHING_WINDOW, Log, init_log, add_event, current_state
from .errors import InvalidArgumentError
from .events import (
    InputEvent,
    KeyPress,
    KeyRelease,
    Message,
    MouseButton,
    MouseMovement,
    MousePress,
    MouseRelease,
)
from .games import PendulumRules, build_rules
from .protocol import Frame, Input, Ping, Relayed, RelayedPing, bits_to_float
from .session import DEFAULT_PING_INTERVAL, Session, VirtualClock

DEFAULT_TICK_PERIOD = GAME_RATE


@dataclass(frozen=True, slots=True)
class Fixed:
    """Every packet takes exactly ``delay`` seconds."""

    delay: float

    def __post_init__(self) -> None:
        if not isinstance(self.delay, (int, float)) or not 0.0 <= self.delay < math.inf:
            raise InvalidArgumentError(f"delay must be finite and non-negative, got {self.delay!r}")


@dataclass(frozen=True, slots=True)
class Jitter:
    """Packet delays drawn uniformly from [min, max), per directed link.

    Draws come from the package's own seeded generator, so a jittered run is
    exactly as reproducible as a fixed-delay one.
    """

    min: float
    max: float
    rng_seed: int

    def __post_init__(self) -> None:
        ok = (
            isinstance(self.min, (int, float))
            and isinstance(self.max, (int, float))
            and 0.0 <= self.min <= self.max < math.inf
        )
        if not ok:
            raise InvalidArgumentError(f"need 0 <= min <= max, got {self.min!r}..{self.max!r}")
        if not isinstance(self.rng_seed, int) or isinstance(self.rng_seed, bool):
            raise InvalidArgumentError(f"rng_seed must be an int, got {self.rng_seed!r}")


NetModel = Union[Fixed, Jitter]


@dataclass(frozen=True)
class Scenario:
    """A complete description of one simulated run.

    scripts holds one entry per player: a tuple of (time, event) pairs with
    non-decreasing times, all strictly inside [0, duration).  samples are
    times at which every client's rendered world is digested into the
    report.
    """

    rules_id: str
    num_players: int
    scripts: tuple[tuple[tuple[float, InputEvent], ...], ...]
    duration: float
    net: NetModel
    seed: int = 0
    samples: tuple[float, ...] = ()
    ping_interval: float = DEFAULT_PING_INTERVAL
    smoothing_window: float = DEFAULT_SMOOTHING_WINDOW
    tick_period: float = DEFAULT_TICK_PERIOD
    name: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.num_players, int) or not 1 <= self.num_players < 256:
            raise InvalidArgumentError(f"num_players must be in 1..255, got {self.num_players!r}")
        if len(self.scripts) != self.num_players:
            raise InvalidArgumentError(
                f"{self.num_players} players need {self.num_players} scripts, got {len(self.scripts)}"
            )
        if not (isinstance(self.duration, (int, float)) and 0.0 < self.duration < math.inf):
            raise InvalidArgumentError(f"duration must be positive and finite, got {self.duration!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 1 << 64:
            raise InvalidArgumentError(f"seed must be a 64-bit unsigned int, got {self.seed!r}")
        for p, script in enumerate(self.scripts):
            prev = 0.0
            for t, e in script:
                if not (isinstance(t, (int, float)) and 0.0 <= t < self.duration):
                    raise InvalidArgumentError(
                        f"player {p} script time {t!r} outside [0, {self.duration})"
                    )
                if t < prev:
                    raise InvalidArgumentError(f"player {p} script times must not decrease")
                prev = t
        for t in self.samples:
            if not (isinstance(t, (int, float)) and 0.0 <= t <= self.duration):
                raise InvalidArgumentError(f"sample time {t!r} outside [0, {self.duration}]")
        if not (isinstance(self.tick_period, (int, float)) and self.tick_period > 0.0):
            raise InvalidArgumentError(f"tick_period must be positive, got {self.tick_period!r}")


@dataclass(frozen=True)
class Report:
    """Everything a scenario run measures, renderable as stable text.

    Two runs of the same scenario produce byte-identical to_text output;
    that property is itself under test, so reports can serve as golden
    files.
    """

    scenario: str
    rules_id: str
    num_players: int
    quiesce_time: float
    samples: tuple[tuple[float, tuple[int, ...]], ...]
    final_consistent: tuple[int, ...]
    final_smoothed: tuple[int, ...]
    max_pending: int
    steps: int
    handles: int
    late_events: int

    @property
    def converged(self) -> bool:
        return (
            len(set(self.final_consistent)) == 1
            and self.final_smoothed == self.final_consistent
        )

    def to_text(self) -> str:
        lines = [
            f"scenario: {self.scenario or '(unnamed)'}",
            f"rules: {self.rules_id}",
            f"players: {self.num_players}",
            f"quiesce_time: {self.quiesce_time!r}",
        ]
        for t, digests in self.samples:
            rendered = " ".join(f"{d:016x}" for d in digests)
            lines.append(f"sample {t!r}: {rendered}")
        lines.append(
            "final_consistent: " + " ".join(f"{d:016x}" for d in self.final_consistent)
        )
        lines.append(
            "final_smoothed: " + " ".join(f"{d:016x}" for d in self.final_smoothed)
        )
        lines.append(f"max_pending: {self.max_pending}")
        lines.append(f"steps: {self.steps}")
        lines.append(f"handles: {self.handles}")
        lines.append(f"late_events: {self.late_events}")
        lines.append("converged" if self.converged else "DIVERGED")
        return "\n".join(lines) + "\n"


class _Instrumented:
    """Counts step/handle invocations around a rules object."""

    def __init__(self, inner: Any) -> None:
        self.inner = inner
        self.num_players = inner.num_players
        self.steps = 0
        self.handles = 0

    def start(self, seed: int) -> Any:
        return self.inner.start(seed)

    def step(self, dt: float, world: Any) -> Any:
        self.steps += 1
        return self.inner.step(dt, world)

    def handle(self, player: int, event: InputEvent, world: Any) -> Any:
        self.handles += 1
        return self.inner.handle(player, event, world)

    def digest(self, world: Any) -> int:
        return self.inner.digest(world)


_PRIO_DELIVER = 0
_PRIO_SCRIPT = 1
_PRIO_TICK = 2
_PRIO_SAMPLE = 3


class _Link:
    """One directed client-to-client path with FIFO delivery."""

    def __init__(self, model: NetModel, rng: Optional[DetRng]) -> None:
        self._model = model
        self._rng = rng
        self._clear_at = 0.0

    def delivery_time(self, sent_at: float) -> float:
        if isinstance(self._model, Fixed):
            t = sent_at + self._model.delay
        else:
            assert self._rng is not None
            u, self._rng = rng_unit(self._rng)
            t = sent_at + self._model.min + u * (self._model.max - self._model.min)
        # a link never reorders: anything sent later arrives no earlier
        if t < self._clear_at:
            t = self._clear_at
        self._clear_at = t
        return t


def _link_rng(net: NetModel, sender: int, receiver: int, n: int) -> Optional[DetRng]:
    if isinstance(net, Fixed):
        return None
    # one independent stream per directed link, all derived from the one seed
    rng = rng_new(net.rng_seed)
    value = 0
    for _ in range(sender * n + receiver + 1):
        value, rng = rng_next(rng)
    return rng_new(value)


def run_scenario(scenario: Scenario, rules: Any = None) -> Report:
    """Simulate the whole scenario and measure it.

    After the scripted duration the loop keeps delivering until the network
    drains, then jumps far enough past the last arrival for every smoothing
    window to close, and only then digests final states.  At that point
    every client has seen every event, so the consistent digests must all
    agree and smoothed must equal consistent; the report records whether
    they do.
    """
    if rules is None:
        rules = build_rules(scenario.rules_id)
    n = scenario.num_players
    instrumented = [_Instrumented(rules) for _ in range(n)]
    clocks = [VirtualClock() for _ in range(n)]
    outbox: list[list[Frame]] = [[] for _ in range(n)]
    sessions = [
        Session(
            player=i,
            num_players=n,
            rules=instrumented[i],
            seed=scenario.seed,
            clock=clocks[i],
            send=outbox[i].append,
            ping_interval=scenario.ping_interval,
            smoothing_window=scenario.smoothing_window,
        )
        for i in range(n)
    ]
    links = {
        (i, j): _Link(scenario.net, _link_rng(scenario.net, i, j, n))
        for i in range(n)
        for j in range(n)
        if i != j
    }

    heap: list[tuple[float, int, int, tuple]] = []
    seq = 0

    def push(t: float, prio: int, payload: tuple) -> None:
        nonlocal seq
        heapq.heappush(heap, (t, prio, seq, payload))
        seq += 1

    for i, script in enumerate(scenario.scripts):
        for t, event in script:
            push(t, _PRIO_SCRIPT, ("script", i, event))
    ticks = 1
    while ticks * scenario.tick_period <= scenario.duration:
        t = ticks * scenario.tick_period
        for i in range(n):
            push(t, _PRIO_TICK, ("tick", i))
        ticks += 1
    sample_rows: dict[float, list[int]] = {}
    for t in scenario.samples:
        sample_rows.setdefault(t, [0] * n)
        push(t, _PRIO_SAMPLE, ("sample", t))

    max_pending = 0
    late_events = 0
    last_arrival = 0.0

    def track_pending() -> None:
        nonlocal max_pending
        for s in sessions:
            if len(s.log.events) > max_pending:
                max_pending = len(s.log.events)

    def relay(sender: int, now: float) -> None:
        for frame in outbox[sender]:
            if isinstance(frame, Input):
                wrapped: Frame = Relayed(frame.t_bits, sender, frame.event)
            elif isinstance(frame, Ping):
                wrapped = RelayedPing(frame.t_bits, sender)
            else:
                raise InvalidArgumentError(f"client sent {type(frame).__name__}")
            for j in range(n):
                if j != sender:
                    push(links[(sender, j)].delivery_time(now), _PRIO_DELIVER, ("deliver", j, wrapped))
        outbox[sender].clear()

    while heap:
        now, prio, _, payload = heapq.heappop(heap)
        kind = payload[0]
        if kind == "deliver":
            _, receiver, frame = payload
            clocks[receiver].advance_to(now)
            if isinstance(frame, Relayed) and bits_to_float(frame.t_bits) < now:
                late_events += 1
            sessions[receiver].on_frame(frame)
            if now > last_arrival:
                last_arrival = now
            track_pending()
        elif kind == "script":
            _, i, event = payload
            clocks[i].advance_to(now)
            sessions[i].submit_local(event)
            relay(i, now)
            track_pending()
        elif kind == "tick":
            _, i = payload
            clocks[i].advance_to(now)
            if sessions[i].tick():
                relay(i, now)
        else:
            _, t = payload
            row = sample_rows[t]
            for i in range(n):
                clocks[i].advance_to(now)
                row[i] = rules.digest(sessions[i].render())

    # the extra tick period is rounding margin: quiesce - arrival must reach
    # the window in float arithmetic for every arrival, or a final apparent
    # time could sit one ulp shy of its actual timestamp
    quiesce = max(scenario.duration, last_arrival) + scenario.smoothing_window + scenario.tick_period
    final_consistent = []
    final_smoothed = []
    for i in range(n):
        clocks[i].advance_to(quiesce)
        final_smoothed.append(rules.digest(sessions[i].render()))
        final_consistent.append(rules.digest(sessions[i].consistent_state()))

    return Report(
        scenario=scenario.name,
        rules_id=scenario.rules_id,
        num_players=n,
        quiesce_time=quiesce,
        samples=tuple(sorted((t, tuple(row)) for t, row in sample_rows.items())),
        final_consistent=tuple(final_consistent),
        final_smoothed=tuple(final_smoothed),
        max_pending=max_pending,
        steps=sum(r.steps for r in instrumented),
        handles=sum(r.handles for r in instrumented),
        late_events=late_events,
    )


def _multinomial(sizes: list[int]) -> int:
    total = 0
    result = 1
    for s in sizes:
        for k in range(1, s + 1):
            total += 1
            result = result * total // k
    return result


@dataclass(frozen=True)
class InterleavingReport:
    """Outcome of exhaustively checking arrival-order independence."""

    interleavings: int
    ok: bool
    counterexample: Optional[tuple[int, ...]] = None


def check_all_interleavings(
    per_player: list[list[Message]],
    rules: Any,
    seed: int = 0,
    cap: int = 100_000,
) -> InterleavingReport:
    """Feed every arrival order of the given per-player streams into a log
    and demand identical end states.

    Per-player order is fixed (a TCP stream never reorders one sender); what
    varies is how the streams merge.  The number of merges is the
    multinomial coefficient, which explodes quickly, so anything beyond
    ``cap`` is refused rather than silently sampled.
    """
    sizes = [len(msgs) for msgs in per_player]
    count = _multinomial(sizes)
    if count > cap:
        raise InvalidArgumentError(
            f"{count} interleavings exceed the cap of {cap}; shrink the streams"
        )
    for p, msgs in enumerate(per_player):
        for m in msgs:
            if m.p != p:
                raise InvalidArgumentError(
                    f"message {m!r} in player {p}'s stream claims player {m.p}"
                )
        for a, b in zip(msgs, msgs[1:]):
            if b.t < a.t:
                raise InvalidArgumentError(
                    f"player {p}'s stream goes backwards at {b!r}"
                )

    baseline: Optional[Log] = None
    count_seen = 0
    for order in _merge_orders(sizes):
        count_seen += 1
        log = replay_order(per_player, order, rules, seed)
        if baseline is None:
            baseline = log
        elif not logs_agree(baseline, log, rules):
            return InterleavingReport(count_seen, False, order)
    assert count_seen == count
    return InterleavingReport(count_seen, True, None)


def logs_agree(a: Log, b: Log, rules: Any) -> bool:
    """Observable equality: committed instant and world, pending events,
    and activity map all match (revision is bookkeeping, not state)."""
    return (
        a.committed[0] == b.committed[0]
        and rules.digest(a.committed[1]) == rules.digest(b.committed[1])
        and a.events == b.events
        and a.latest == b.latest
    )


def _merge_orders(sizes: list[int]) -> Iterable[tuple[int, ...]]:
    if not any(sizes):
        yield ()
        return
    for p, s in enumerate(sizes):
        if s > 0:
            rest = list(sizes)
            rest[p] -= 1
            for tail in _merge_orders(rest):
                yield (p,) + tail


def random_interleaving(sizes: list[int], pick: Callable[[int], int]) -> tuple[int, ...]:
    """One arrival order built by repeatedly picking among players with
    messages left; ``pick(k)`` returns an index in [0, k)."""
    remaining = list(sizes)
    order = []
    while any(remaining):
        alive = [p for p, r in enumerate(remaining) if r > 0]
        p = alive[pick(len(alive))]
        order.append(p)
        remaining[p] -= 1
    return tuple(order)


def replay_order(
    per_player: list[list[Message]], order: Iterable[int], rules: Any, seed: int = 0
) -> Log:
    """Feed the streams into a fresh log in the given arrival order."""
    log = init_log(list(range(len(per_player))), rules, seed)
    cursors = [0] * len(per_player)
    for p in order:
        log = add_event(per_player[p][cursors[p]], log, rules)
        cursors[p] += 1
    return log


def double_pendulum_scenario(steps: int, use_det_math: bool = True) -> tuple[int, int]:
    """Drive two independent replicas of the pendulum through ``steps`` fixed
    steps each and return both trajectory digests.

    Events arrive one per step interval, so commitment advances continuously
    and the pending fold never grows: memory and time stay linear in steps no
    matter how long the run.  With the deterministic kernels the two digests
    are equal; with libm they are equal too on one machine, but nothing
    guarantees it across machines, which is the comparison worth demonstrating.
    """
    if not isinstance(steps, int) or steps < 0:
        raise InvalidArgumentError(f"steps must be a non-negative int, got {steps!r}")
    digests = []
    for _ in range(2):
        rules = PendulumRules(use_det_math=use_det_math)
        log = init_log([0], rules, 12345)
        t = 0.0
        for k in range(1, steps + 1):
            t = k * GAME_RATE
            log = add_event(Message(t, 0, KeyPress("t")), log, rules)
        world = current_state(t, log, rules)
        digests.append(rules.digest(world))
    return (digests[0], digests[1])


_EVENT_KINDS = {
    "KeyPress": KeyPress,
    "KeyRelease": KeyRelease,
    "MousePress": MousePress,
    "MouseRelease": MouseRelease,
    "MouseMovement": MouseMovement,
}

_BUTTONS = {b.value: b for b in MouseButton}


def event_from_plain(obj: Any) -> InputEvent:
    """Parse an event from scenario-file JSON.

    Scenario files are authored by hand, so coordinates here are plain JSON
    numbers, unlike the wire protocol's bit patterns: scenario authors write
    0.25, and every JSON parser turns that exact literal into the same
    double.
    """
    if not isinstance(obj, dict) or "type" not in obj:
        raise InvalidArgumentError(f"event must be an object with a type, got {obj!r}")
    kind = obj["type"]
    if kind in ("KeyPress", "KeyRelease"):
        text = obj.get("text")
        if not isinstance(text, str):
            raise InvalidArgumentError(f"{kind} needs a text string")
        return _EVENT_KINDS[kind](text)
    if kind in ("MousePress", "MouseRelease"):
        button = _BUTTONS.get(obj.get("button"))
        if button is None:
            raise InvalidArgumentError(f"{kind} needs a button of {sorted(_BUTTONS)}")
        return _EVENT_KINDS[kind](button, _plain_point(obj))
    if kind == "MouseMovement":
        return MouseMovement(_plain_point(obj))
    raise InvalidArgumentError(f"unknown event type {kind!r}")


def _plain_point(obj: dict) -> tuple[float, float]:
    x, y = obj.get("x"), obj.get("y")
    if not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in (x, y)):
        raise InvalidArgumentError(f"event needs numeric x and y, got {obj!r}")
    return (float(x), float(y))


def event_to_plain(e: InputEvent) -> dict:
    if isinstance(e, (KeyPress, KeyRelease)):
        return {"type": type(e).__name__, "text": e.text}
    if isinstance(e, (MousePress, MouseRelease)):
        return {
            "type": type(e).__name__,
            "button": e.button.value,
            "x": e.point[0],
            "y": e.point[1],
        }
    return {"type": "MouseMovement", "x": e.point[0], "y": e.point[1]}


def _net_from_plain(obj: Any) -> NetModel:
    if not isinstance(obj, dict) or "model" not in obj:
        raise InvalidArgumentError(f"net must be an object with a model, got {obj!r}")
    if obj["model"] == "fixed":
        if set(obj) != {"model", "delay"}:
            raise InvalidArgumentError(f"fixed net takes only a delay, got {sorted(obj)}")
        return Fixed(obj["delay"])
    if obj["model"] == "jitter":
        if set(obj) != {"model", "min", "max", "rng_seed"}:
            raise InvalidArgumentError(
                f"jitter net takes min, max, rng_seed, got {sorted(obj)}"
            )
        return Jitter(obj["min"], obj["max"], obj["rng_seed"])
    raise InvalidArgumentError(f"unknown net model {obj['model']!r}")


def _net_to_plain(net: NetModel) -> dict:
    if isinstance(net, Fixed):
        return {"model": "fixed", "delay": net.delay}
    return {"model": "jitter", "min": net.min, "max": net.max, "rng_seed": net.rng_seed}


def scenario_from_json(text: str) -> Scenario:
    """Parse a scenario file; docs/scenarios.md documents the format."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"scenario is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InvalidArgumentError("scenario must be a JSON object")
    required = {"rules", "num_players", "duration", "net", "scripts"}
    allowed = required | {
        "seed",
        "samples",
        "ping_interval",
        "smoothing_window",
        "tick_period",
        "name",
    }
    missing = required - set(obj)
    extra = set(obj) - allowed
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing {sorted(missing)}")
        if extra:
            parts.append(f"unexpected {sorted(extra)}")
        raise InvalidArgumentError(f"bad scenario keys: {', '.join(parts)}")
    scripts_obj = obj["scripts"]
    if not isinstance(scripts_obj, list):
        raise InvalidArgumentError("scripts must be a list of per-player lists")
    scripts = []
    for script in scripts_obj:
        if not isinstance(script, list):
            raise InvalidArgumentError("each script must be a list of entries")
        entries = []
        for entry in script:
            if not isinstance(entry, dict) or "at" not in entry:
                raise InvalidArgumentError(f"script entry needs an 'at' time: {entry!r}")
            rest = {k: v for k, v in entry.items() if k != "at"}
            entries.append((float(entry["at"]), event_from_plain(rest)))
        scripts.append(tuple(entries))
    return Scenario(
        rules_id=obj["rules"],
        num_players=obj["num_players"],
        scripts=tuple(scripts),
        duration=float(obj["duration"]),
        net=_net_from_plain(obj["net"]),
        seed=obj.get("seed", 0),
        samples=tuple(float(t) for t in obj.get("samples", [])),
        ping_interval=float(obj.get("ping_interval", DEFAULT_PING_INTERVAL)),
        smoothing_window=float(obj.get("smoothing_window", DEFAULT_SMOOTHING_WINDOW)),
        tick_period=float(obj.get("tick_period", DEFAULT_TICK_PERIOD)),
        name=obj.get("name", ""),
    )


def scenario_to_json(sc: Scenario) -> str:
    obj = {
        "name": sc.name,
        "rules": sc.rules_id,
        "num_players": sc.num_players,
        "duration": sc.duration,
        "net": _net_to_plain(sc.net),
        "seed": sc.seed,
        "samples": list(sc.samples),
        "ping_interval": sc.ping_interval,
        "smoothing_window": sc.smoothing_window,
        "tick_period": sc.tick_period,
        "scripts": [
            [{"at": t, **event_to_plain(e)} for t, e in script] for script in sc.scripts
        ],
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
