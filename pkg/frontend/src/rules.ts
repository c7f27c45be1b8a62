// The dot-trace game: two cursors leaving fading trails.
//
// Each mouse movement drops a dot of radius 1 at the cursor; every step
// multiplies radii by a decaying exponential of the elapsed time and culls
// dots whose pre-decay radius fell below visibility.  Culling on the
// pre-decay radius makes survival depend only on total elapsed time, never
// on how the interval was subdivided, which is what keeps every client's
// world identical.

import { detExp } from "./detmath.js";
import type { InputEvent } from "./frames.js";
import type { Rules } from "./engine.js";

export const RULES_ID = "dot-trace";

export interface Dot {
  readonly p: number;
  readonly r: number;
  readonly x: number;
  readonly y: number;
}

export type TraceWorld = readonly Dot[];

export const dotTraceRules: Rules<TraceWorld> = {
  numPlayers: 2,

  start(_seed: bigint): TraceWorld {
    return [];
  },

  step(dt: number, world: TraceWorld): TraceWorld {
    const decay = detExp(-dt);
    const out: Dot[] = [];
    for (const d of world) {
      if (d.r >= 0.1) out.push({ p: d.p, r: d.r * decay, x: d.x, y: d.y });
    }
    return out;
  },

  handle(player: number, event: InputEvent, world: TraceWorld): TraceWorld {
    if (event.kind === "MouseMovement" && player < 2) {
      return [{ p: player, r: 1.0, x: event.x, y: event.y }, ...world];
    }
    return world;
  },
};

export const GRID_WIDTH = 60;
export const GRID_HEIGHT = 20;

// per-player glyph ramps, brightest for the freshest dots; distinct glyphs
// per player so a grid dump still shows ownership without color
const GLYPHS = ["@o.", "#+,"];

export function glyphFor(d: Dot): string {
  const ramp = GLYPHS[d.p] ?? "?";
  if (d.r >= 0.66) return ramp[0];
  if (d.r >= 0.33) return ramp[1];
  return ramp[2];
}

// Paint the world onto a character grid.  The world is newest-first, so the
// first dot claiming a cell wins and fresher dots draw over stale ones.
export function renderGrid(world: TraceWorld, width = GRID_WIDTH, height = GRID_HEIGHT): string[] {
  const rows: string[][] = [];
  for (let y = 0; y < height; y++) rows.push(new Array(width).fill(" "));
  for (const d of world) {
    const cx = Math.round(d.x);
    const cy = Math.round(d.y);
    if (cx < 0 || cx >= width || cy < 0 || cy >= height) continue;
    if (rows[cy][cx] === " ") rows[cy][cx] = glyphFor(d);
  }
  return rows.map((r) => r.join(""));
}
