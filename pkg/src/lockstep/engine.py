"""The replicated event log and the state queries computed from it.

Clients never exchange worlds, only timestamped input events.  Each client
feeds every event (its own and its peers') into a Log and recomputes the
world on demand by folding the events over a start state.  Because the fold
and the rules are deterministic, clients that have seen the same events agree
on the world bit for bit, no matter what order the events arrived in.

A Log keeps a committed prefix (a timestamped world that every player's
activity has moved past, which no late event can ever precede) and a pending
suffix of individual events that might still gain earlier-timestamped
neighbours.  Queries fold the pending events on top of the committed world;
commitment is what keeps that fold short and memory bounded.

Everything in this module is a pure function over immutable values: ops
return new Logs and never mutate their arguments.  Worlds are opaque; they
only meet the rules object's start/step/handle functions, which must be pure
and must not mutate worlds in place.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Any, Iterable, Protocol

from .errors import InvalidArgumentError, OutOfOrderError, QueryInPastError
from .events import Message

GAME_RATE = 0.0625

DEFAULT_SMOOTHING_WINDOW = 0.25


class GameRules(Protocol):
    """What a game must provide; the engine treats worlds as opaque values."""

    num_players: int

    def start(self, seed: int) -> Any: ...

    def step(self, dt: float, world: Any) -> Any: ...

    def handle(self, player: int, event: Any, world: Any) -> Any: ...


@dataclass(frozen=True, slots=True)
class Log:
    """Replicated event log: committed basis, pending events, peer activity.

    committed   -- (t, world): the fold of every event that can no longer be
                   preceded by anything, advanced to the latest such event
    events      -- pending messages, ascending by (t, p), ties in insertion
                   order
    latest      -- most recent activity timestamp per player; its minimum is
                   the commit horizon
    revision    -- bumped on every observable change; lets StateCache detect
                   staleness cheaply.  Not part of log equivalence: different
                   arrival orders may count mutations differently.
    """

    committed: tuple[float, Any]
    events: tuple[Message, ...]
    latest: dict[int, float]
    revision: int = 0


def init_log(players: Iterable[int], rules: GameRules, seed: int) -> Log:
    ids = list(players)
    if not ids:
        raise InvalidArgumentError("a game needs at least one player")
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError(f"duplicate player ids: {ids!r}")
    for p in ids:
        if not isinstance(p, int) or isinstance(p, bool) or p < 0:
            raise InvalidArgumentError(f"player id must be a non-negative int, got {p!r}")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 1 << 64:
        raise InvalidArgumentError(f"seed must be a 64-bit unsigned int, got {seed!r}")
    return Log(
        committed=(0.0, rules.start(seed)),
        events=(),
        latest={p: 0.0 for p in ids},
        revision=0,
    )


def commit_horizon(log: Log) -> float:
    """The time below which no new event can ever land."""
    return min(log.latest.values())


def sort_messages(messages: Iterable[Message]) -> list[Message]:
    """Canonical event order: by (t, p), equal keys keeping input order.

    Stability is what makes the order well defined when one player stamps two
    events with the same time: their submission order is preserved, and every
    client sorts arrivals into this same sequence.
    """
    return sorted(messages, key=Message.sort_key)


def game_step(dt: float, world: Any, rules: GameRules) -> Any:
    """Advance ``world`` by ``dt``, chopping into GAME_RATE-sized steps.

    The chopping is the determinism trick: every client slices an interval at
    the same fixed offsets regardless of how events and frames subdivided it,
    so a fold that pauses for an event mid-interval produces the same step
    sequence as one that never paused.
    """
    while dt > GAME_RATE:
        world = rules.step(GAME_RATE, world)
        dt = dt - GAME_RATE
    if dt <= 0.0:
        return world
    return rules.step(dt, world)


def apply_events(
    messages: Iterable[Message], basis: tuple[float, Any], rules: GameRules
) -> tuple[float, Any]:
    """Fold messages (already in canonical order) over a timestamped world."""
    t0, world = basis
    for m in messages:
        world = rules.handle(m.p, m.e, game_step(m.t - t0, world, rules))
        t0 = m.t
    return (t0, world)


def advance_committed(log: Log, rules: GameRules) -> Log:
    """Absorb into ``committed`` every pending event below the horizon.

    Strictly below: an event at exactly the horizon could still gain an
    equal-timestamped neighbour from the least-active player, and committing
    it would pin an order that a later arrival is allowed to precede.
    """
    horizon = commit_horizon(log)
    n = 0
    for m in log.events:
        if m.t < horizon:
            n += 1
        else:
            break
    if n == 0:
        return log
    return Log(
        committed=apply_events(log.events[:n], log.committed, rules),
        events=log.events[n:],
        latest=log.latest,
        revision=log.revision,
    )


def record_activity(t: float, p: int, log: Log, rules: GameRules) -> Log:
    """Note that player ``p`` has been heard from up to time ``t``.

    Raises OutOfOrderError if ``t`` precedes the player's recorded activity;
    an equal timestamp is fine (several events may share one instant) and
    changes nothing.
    """
    old = log.latest.get(p)
    if old is None:
        raise InvalidArgumentError(f"unknown player {p!r}")
    if t < old:
        raise OutOfOrderError("Messages out of order")
    if t == old:
        return log
    latest = dict(log.latest)
    latest[p] = t
    return advance_committed(
        Log(log.committed, log.events, latest, log.revision + 1), rules
    )


def add_event(msg: Message, log: Log, rules: GameRules) -> Log:
    """Insert one player input and account for the activity it proves.

    The message lands after any pending event with an equal (t, p) key, so a
    player's equal-timestamped events stay in submission order.  The
    activity note then commits whatever the new horizon uncovers.  The new
    event itself always stays pending: its own timestamp now bounds the
    horizon from above.
    """
    i = bisect_right(log.events, msg.sort_key(), key=Message.sort_key)
    grown = Log(
        committed=log.committed,
        events=log.events[:i] + (msg,) + log.events[i:],
        latest=log.latest,
        revision=log.revision + 1,
    )
    return record_activity(msg.t, msg.p, grown, rules)


def add_ping(t: float, p: int, log: Log, rules: GameRules) -> Log:
    """Record activity with no input attached; this is what drives commitment
    forward while a player is idle."""
    return record_activity(t, p, log, rules)


def _applicable(events: tuple[Message, ...], now: float) -> int:
    n = 0
    for m in events:
        if m.t <= now:
            n += 1
        else:
            break
    return n


def current_state(now: float, log: Log, rules: GameRules) -> Any:
    """The world at time ``now``: fold pending events up to and including
    ``now`` over the committed basis, then advance the remaining gap.

    Raises QueryInPastError for ``now`` before the commit horizon: the events
    that produced those worlds have been absorbed, so the question is no
    longer answerable (and by construction no longer needs to be).
    """
    if not isinstance(now, (int, float)) or not math.isfinite(now):
        raise InvalidArgumentError(f"query time must be finite, got {now!r}")
    if now < commit_horizon(log):
        raise QueryInPastError("Cannot look into the past")
    n = _applicable(log.events, now)
    t, world = apply_events(log.events[:n], log.committed, rules)
    return game_step(now - t, world, rules)


@dataclass(frozen=True, slots=True)
class StateCache:
    """A reusable fold prefix: the committed basis extended by the first
    ``applied`` pending events of log ``revision``."""

    revision: int
    applied: int
    basis: tuple[float, Any]


EMPTY_CACHE = StateCache(revision=-1, applied=0, basis=(0.0, None))


def current_state_cached(
    now: float, log: Log, cache: StateCache, rules: GameRules
) -> tuple[Any, StateCache]:
    """current_state plus a cache carrying the fold prefix between calls.

    Bit-identical to current_state for every query: the cached prefix is the
    same fold, just not recomputed.  The final gap from the last event to
    ``now`` is always advanced fresh, because ``now`` moves between calls
    while the prefix does not.  Any log change (revision mismatch) or a
    ``now`` before the cached prefix throws the cache away; correctness never
    depends on the cache being useful.
    """
    if not isinstance(now, (int, float)) or not math.isfinite(now):
        raise InvalidArgumentError(f"query time must be finite, got {now!r}")
    if now < commit_horizon(log):
        raise QueryInPastError("Cannot look into the past")
    applied = 0
    basis = log.committed
    if cache.revision == log.revision and not (cache.applied > 0 and cache.basis[0] > now):
        applied = cache.applied
        basis = cache.basis
    t0, world = basis
    while applied < len(log.events):
        m = log.events[applied]
        if m.t > now:
            break
        world = rules.handle(m.p, m.e, game_step(m.t - t0, world, rules))
        t0 = m.t
        applied += 1
    return (
        game_step(now - t0, world, rules),
        StateCache(revision=log.revision, applied=applied, basis=(t0, world)),
    )


@dataclass(frozen=True, slots=True)
class SmoothingEntry:
    """A remote message paired with the local clock reading at its arrival."""

    msg: Message
    arrival: float


@dataclass(frozen=True, slots=True)
class SmoothingBuffer:
    """Recent remote arrivals, kept while their easing windows are open."""

    entries: tuple[SmoothingEntry, ...] = ()
    window: float = DEFAULT_SMOOTHING_WINDOW


def note_arrival(msg: Message, local_now: float, buf: SmoothingBuffer) -> SmoothingBuffer:
    """Remember that ``msg`` arrived at local time ``local_now``.

    Entries whose windows have closed are dropped here rather than on a
    timer; an expired entry renders identically to no entry at all, so lazy
    pruning is invisible.
    """
    if not isinstance(local_now, (int, float)) or not math.isfinite(local_now):
        raise InvalidArgumentError(f"arrival time must be finite, got {local_now!r}")
    kept = tuple(e for e in buf.entries if local_now < e.arrival + buf.window)
    return SmoothingBuffer(kept + (SmoothingEntry(msg, local_now),), buf.window)


def apparent_time(entry: SmoothingEntry, now: float, window: float) -> float:
    """Where the renderer pretends this message sits at local time ``now``.

    A late event (actual timestamp before its arrival) is applied at arrival
    time first, then slid linearly back toward its actual timestamp over the
    window, so the correction eases in rather than snapping.  The result
    never drops below the actual timestamp, and once the window has elapsed
    it equals the actual timestamp exactly, which is what lets the smoothed
    world reconverge to the consistent one bit for bit.
    """
    dt = now - entry.arrival
    if dt >= window:
        return entry.msg.t
    frac = dt / window
    if frac < 0.0:
        frac = 0.0
    a = entry.arrival + (entry.msg.t - entry.arrival) * frac
    return entry.msg.t if a < entry.msg.t else a


def smoothed_state(now: float, log: Log, buf: SmoothingBuffer, rules: GameRules) -> Any:
    """The world as rendered: pending events repositioned at apparent times.

    Events with open smoothing windows fold in at their apparent times (and
    in apparent-time order, which may differ from canonical order while a
    correction is easing); everything else behaves exactly as in
    current_state.  With no open windows the two queries are bit-identical.
    """
    if not isinstance(now, (int, float)) or not math.isfinite(now):
        raise InvalidArgumentError(f"query time must be finite, got {now!r}")
    if now < commit_horizon(log):
        raise QueryInPastError("Cannot look into the past")
    if not buf.entries:
        return current_state(now, log, rules)
    apparent: dict[Message, float] = {}
    for entry in buf.entries:
        apparent[entry.msg] = apparent_time(entry, now, buf.window)
    placed = sorted(
        ((apparent.get(m, m.t), m) for m in log.events),
        key=lambda am: (am[0], am[1].p),
    )
    t0, world = log.committed
    for a, m in placed:
        if a > now:
            break
        world = rules.handle(m.p, m.e, game_step(a - t0, world, rules))
        t0 = a
    return game_step(now - t0, world, rules)
