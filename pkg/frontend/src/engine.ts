// The replicated event log, ported from the engine so this client computes
// the same world as any other implementation fed the same events.
//
// Clients exchange only timestamped inputs.  The log keeps a committed
// basis (the fold of everything no late event can precede) plus a pending
// suffix, sorted by (t, player) with ties in insertion order.  Queries fold
// pending events over the basis.  All float arithmetic follows the
// reference operation for operation; the chopping of time into fixed-rate
// steps is what makes the fold insensitive to where queries happened to
// pause it.

import type { InputEvent } from "./frames.js";

export const GAME_RATE = 0.0625;
export const DEFAULT_SMOOTHING_WINDOW = 0.25;

export interface Rules<W> {
  readonly numPlayers: number;
  start(seed: bigint): W;
  step(dt: number, world: W): W;
  handle(player: number, event: InputEvent, world: W): W;
}

export interface Message {
  readonly t: number;
  readonly p: number;
  readonly e: InputEvent;
}

export interface Log<W> {
  readonly committed: readonly [number, W];
  readonly events: readonly Message[];
  readonly latest: ReadonlyMap<number, number>;
  readonly revision: number;
}

export class OutOfOrderError extends Error {}
export class QueryInPastError extends Error {}

export function initLog<W>(players: number[], rules: Rules<W>, seed: bigint): Log<W> {
  const latest = new Map<number, number>();
  for (const p of players) latest.set(p, 0.0);
  return { committed: [0.0, rules.start(seed)], events: [], latest, revision: 0 };
}

export function commitHorizon<W>(log: Log<W>): number {
  let h = Infinity;
  for (const t of log.latest.values()) h = Math.min(h, t);
  return h;
}

export function gameStep<W>(dt: number, world: W, rules: Rules<W>): W {
  while (dt > GAME_RATE) {
    world = rules.step(GAME_RATE, world);
    dt = dt - GAME_RATE;
  }
  if (dt <= 0.0) return world;
  return rules.step(dt, world);
}

function applyEvents<W>(
  messages: readonly Message[],
  basis: readonly [number, W],
  rules: Rules<W>,
): [number, W] {
  let [t0, world] = basis;
  for (const m of messages) {
    world = rules.handle(m.p, m.e, gameStep(m.t - t0, world, rules));
    t0 = m.t;
  }
  return [t0, world];
}

function advanceCommitted<W>(log: Log<W>, rules: Rules<W>): Log<W> {
  // strictly below the horizon: an event exactly at it could still gain an
  // equal-timestamped neighbour from the least-active player
  const horizon = commitHorizon(log);
  let n = 0;
  for (const m of log.events) {
    if (m.t < horizon) n++;
    else break;
  }
  if (n === 0) return log;
  return {
    committed: applyEvents(log.events.slice(0, n), log.committed, rules),
    events: log.events.slice(n),
    latest: log.latest,
    revision: log.revision,
  };
}

function recordActivity<W>(t: number, p: number, log: Log<W>, rules: Rules<W>): Log<W> {
  const old = log.latest.get(p);
  if (old === undefined) throw new RangeError(`unknown player ${p}`);
  if (t < old) throw new OutOfOrderError("Messages out of order");
  if (t === old) return log;
  const latest = new Map(log.latest);
  latest.set(p, t);
  return advanceCommitted(
    { committed: log.committed, events: log.events, latest, revision: log.revision + 1 },
    rules,
  );
}

export function addEvent<W>(msg: Message, log: Log<W>, rules: Rules<W>): Log<W> {
  // insert after any pending event with an equal (t, p) key, so one
  // player's equal-timestamped events stay in submission order
  let i = log.events.length;
  for (let j = 0; j < log.events.length; j++) {
    const m = log.events[j];
    if (m.t > msg.t || (m.t === msg.t && m.p > msg.p)) {
      i = j;
      break;
    }
  }
  const events = [...log.events.slice(0, i), msg, ...log.events.slice(i)];
  const grown: Log<W> = {
    committed: log.committed,
    events,
    latest: log.latest,
    revision: log.revision + 1,
  };
  return recordActivity(msg.t, msg.p, grown, rules);
}

export function addPing<W>(t: number, p: number, log: Log<W>, rules: Rules<W>): Log<W> {
  return recordActivity(t, p, log, rules);
}

export function currentState<W>(now: number, log: Log<W>, rules: Rules<W>): W {
  if (!Number.isFinite(now)) throw new RangeError(`query time must be finite, got ${now}`);
  if (now < commitHorizon(log)) throw new QueryInPastError("Cannot look into the past");
  let n = 0;
  for (const m of log.events) {
    if (m.t <= now) n++;
    else break;
  }
  const [t, world] = applyEvents(log.events.slice(0, n), log.committed, rules);
  return gameStep(now - t, world, rules);
}

// -- smoothing: rendering-only easing of late arrivals --

export interface SmoothingEntry {
  readonly msg: Message;
  readonly arrival: number;
}

export interface SmoothingBuffer {
  readonly entries: readonly SmoothingEntry[];
  readonly window: number;
}

export function emptyBuffer(window = DEFAULT_SMOOTHING_WINDOW): SmoothingBuffer {
  return { entries: [], window };
}

export function noteArrival(msg: Message, localNow: number, buf: SmoothingBuffer): SmoothingBuffer {
  const kept = buf.entries.filter((e) => localNow < e.arrival + buf.window);
  return { entries: [...kept, { msg, arrival: localNow }], window: buf.window };
}

export function apparentTime(entry: SmoothingEntry, now: number, window: number): number {
  // a late event applies at its arrival time first, then slides linearly
  // back to its actual timestamp over the window; never below the actual
  // timestamp, and exactly equal once the window has elapsed
  const dt = now - entry.arrival;
  if (dt >= window) return entry.msg.t;
  let frac = dt / window;
  if (frac < 0.0) frac = 0.0;
  const a = entry.arrival + (entry.msg.t - entry.arrival) * frac;
  return a < entry.msg.t ? entry.msg.t : a;
}

function messageKey(m: Message): string {
  return `${m.t}|${m.p}|${JSON.stringify(m.e)}`;
}

export function smoothedState<W>(
  now: number,
  log: Log<W>,
  buf: SmoothingBuffer,
  rules: Rules<W>,
): W {
  if (!Number.isFinite(now)) throw new RangeError(`query time must be finite, got ${now}`);
  if (now < commitHorizon(log)) throw new QueryInPastError("Cannot look into the past");
  if (buf.entries.length === 0) return currentState(now, log, rules);
  const apparent = new Map<string, number>();
  for (const entry of buf.entries) {
    apparent.set(messageKey(entry.msg), apparentTime(entry, now, buf.window));
  }
  const placed = log.events
    .map((m): [number, Message] => [apparent.get(messageKey(m)) ?? m.t, m])
    .sort((a, b) => a[0] - b[0] || a[1].p - b[1].p);
  let [t0, world] = log.committed;
  for (const [a, m] of placed) {
    if (a > now) break;
    world = rules.handle(m.p, m.e, gameStep(a - t0, world, rules));
    t0 = a;
  }
  return gameStep(now - t0, world, rules);
}
