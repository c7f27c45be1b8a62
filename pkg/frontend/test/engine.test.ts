// Hand-traced checks of the replicated log: commitment strictness, the
// fixed-rate chopping, order independence at this scale, and smoothing
// reconvergence.  Worlds here are tiny records built for observability.

import { describe, expect, it } from "vitest";
import {
  GAME_RATE,
  OutOfOrderError,
  QueryInPastError,
  addEvent,
  addPing,
  commitHorizon,
  currentState,
  emptyBuffer,
  gameStep,
  initLog,
  noteArrival,
  apparentTime,
  smoothedState,
  type Log,
  type Message,
  type Rules,
} from "../src/engine.js";
import type { InputEvent } from "../src/frames.js";

interface CountWorld {
  steps: number;
  handled: string[];
  time: number;
}

const countingRules: Rules<CountWorld> = {
  numPlayers: 2,
  start: () => ({ steps: 0, handled: [], time: 0 }),
  step: (dt, w) => ({ steps: w.steps + 1, handled: w.handled, time: w.time + dt }),
  handle: (p, e, w) => ({
    steps: w.steps,
    handled: [...w.handled, `${p}:${e.kind === "KeyPress" ? e.text : "?"}`],
    time: w.time,
  }),
};

function key(text: string): InputEvent {
  return { kind: "KeyPress", text };
}

function msg(t: number, p: number, text: string): Message {
  return { t, p, e: key(text) };
}

describe("gameStep", () => {
  it("chops one second into sixteen steps", () => {
    const w = gameStep(1.0, countingRules.start(0n), countingRules);
    expect(w.steps).toBe(16);
    expect(w.time).toBeCloseTo(1.0, 12);
  });

  it("takes ceil(16*dt) steps", () => {
    for (const [dt, want] of [
      [0.01, 1],
      [GAME_RATE, 1],
      [GAME_RATE + 1e-9, 2],
      [0.5, 8],
      [0.7, 12],
    ] as const) {
      expect(gameStep(dt, countingRules.start(0n), countingRules).steps).toBe(want);
    }
  });

  it("does nothing for non-positive dt", () => {
    expect(gameStep(0, countingRules.start(0n), countingRules).steps).toBe(0);
    expect(gameStep(-1, countingRules.start(0n), countingRules).steps).toBe(0);
  });
});

describe("commitment", () => {
  it("commits strictly below the horizon, never the newest event", () => {
    let log = initLog([0, 1], countingRules, 0n);
    log = addEvent(msg(0.5, 0, "a"), log, countingRules);
    // player 1 has no activity yet, so nothing commits
    expect(log.events.length).toBe(1);
    expect(commitHorizon(log)).toBe(0);

    log = addEvent(msg(0.5, 1, "b"), log, countingRules);
    // horizon is now 0.5; events at exactly 0.5 stay pending
    expect(commitHorizon(log)).toBe(0.5);
    expect(log.events.length).toBe(2);

    log = addPing(2.0, 0, log, countingRules);
    expect(log.events.length).toBe(2);
    log = addPing(2.0, 1, log, countingRules);
    // both events are below the new horizon and commit together
    expect(log.events.length).toBe(0);
    expect(log.committed[0]).toBe(0.5);
    expect(log.committed[1].handled).toEqual(["0:a", "1:b"]);
  });

  it("rejects a timestamp behind a player's recorded activity", () => {
    let log = initLog([0, 1], countingRules, 0n);
    log = addEvent(msg(1.0, 0, "a"), log, countingRules);
    expect(() => addEvent(msg(0.5, 0, "late"), log, countingRules)).toThrow(OutOfOrderError);
    // an equal timestamp is fine and preserves submission order
    log = addEvent(msg(1.0, 0, "b"), log, countingRules);
    expect(log.events.map((m) => (m.e.kind === "KeyPress" ? m.e.text : "?"))).toEqual(["a", "b"]);
  });
});

describe("currentState", () => {
  it("is independent of arrival order", () => {
    const messages = [
      msg(0.25, 0, "a"),
      msg(0.5, 1, "b"),
      msg(0.5, 0, "c"),
      msg(1.75, 1, "d"),
    ];
    const finals: string[] = [];
    // every order keeps each player's own messages in sequence, as the
    // network does; only the interleaving across players varies
    const orders = [
      [0, 1, 2, 3],
      [1, 0, 2, 3],
      [0, 2, 1, 3],
      [1, 3, 0, 2],
      [0, 1, 3, 2],
    ];
    for (const order of orders) {
      let log = initLog([0, 1], countingRules, 0n);
      for (const i of order) log = addEvent(messages[i], log, countingRules);
      const w = currentState(2.0, log, countingRules);
      finals.push(`${w.steps}|${w.time}|${w.handled.join(",")}`);
    }
    expect(new Set(finals).size).toBe(1);
    expect(finals[0]).toContain("0:a,1:b,0:c,1:d");
  });

  it("refuses queries behind the horizon", () => {
    let log = initLog([0, 1], countingRules, 0n);
    log = addEvent(msg(1.0, 0, "a"), log, countingRules);
    log = addEvent(msg(1.0, 1, "b"), log, countingRules);
    expect(() => currentState(0.5, log, countingRules)).toThrow(QueryInPastError);
    expect(currentState(1.0, log, countingRules).handled).toEqual(["0:a", "1:b"]);
  });
});

describe("smoothing", () => {
  it("apparent time slides from arrival back to actual, then pins", () => {
    const m = msg(1.0, 1, "a");
    const entry = { msg: m, arrival: 2.0 };
    const w = 0.25;
    expect(apparentTime(entry, 2.0, w)).toBe(2.0);
    const mid = apparentTime(entry, 2.1, w);
    expect(mid).toBeLessThan(2.0);
    expect(mid).toBeGreaterThan(1.0);
    expect(apparentTime(entry, 2.25, w)).toBe(1.0);
    expect(apparentTime(entry, 99, w)).toBe(1.0);
  });

  it("reconverges to the consistent state once windows close", () => {
    let log = initLog([0, 1], countingRules, 0n);
    let buf = emptyBuffer(0.25);
    log = addEvent(msg(0.3, 0, "mine"), log, countingRules);
    const late = msg(0.2, 1, "theirs");
    log = addEvent(late, log, countingRules);
    buf = noteArrival(late, 0.6, buf);

    // while the window is open the late event applies at a shifted time
    const during = smoothedState(0.7, log, buf, countingRules);
    const settled = smoothedState(0.9, log, buf, countingRules);
    const consistent = currentState(0.9, log, countingRules);
    expect(settled).toEqual(consistent);
    expect(during.handled).toEqual(["0:mine", "1:theirs"]);
    expect(settled.handled).toEqual(["1:theirs", "0:mine"]);
  });
});
