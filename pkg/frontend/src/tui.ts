// ANSI terminal plumbing: full-screen redraws and raw-mode key decoding.
// No curses dependency; the handful of escape codes we need is stable
// across every terminal anyone is likely to run this in.

import type { TraceWorld } from "./rules.js";
import { glyphFor, GRID_HEIGHT, GRID_WIDTH } from "./rules.js";

const COLORS = ["\x1b[31m", "\x1b[32m"]; // player 0 red, player 1 green
const RESET = "\x1b[0m";

export type KeyInput =
  | { kind: "move"; dx: number; dy: number }
  | { kind: "quit" };

// Decode one stdin chunk in raw mode.  Arrow keys arrive as ESC [ A..D;
// WASD works too for terminals that swallow escapes.
export function decodeKeys(chunk: Buffer): KeyInput[] {
  const out: KeyInput[] = [];
  for (let i = 0; i < chunk.length; i++) {
    const b = chunk[i];
    if (b === 0x03 || b === 0x71) {
      // Ctrl-C or q
      out.push({ kind: "quit" });
    } else if (b === 0x1b && chunk[i + 1] === 0x5b && i + 2 < chunk.length) {
      const arrow = chunk[i + 2];
      if (arrow === 0x41) out.push({ kind: "move", dx: 0, dy: -1 });
      if (arrow === 0x42) out.push({ kind: "move", dx: 0, dy: 1 });
      if (arrow === 0x43) out.push({ kind: "move", dx: 1, dy: 0 });
      if (arrow === 0x44) out.push({ kind: "move", dx: -1, dy: 0 });
      i += 2;
    } else if (b === 0x77) out.push({ kind: "move", dx: 0, dy: -1 });
    else if (b === 0x73) out.push({ kind: "move", dx: 0, dy: 1 });
    else if (b === 0x64) out.push({ kind: "move", dx: 1, dy: 0 });
    else if (b === 0x61) out.push({ kind: "move", dx: -1, dy: 0 });
  }
  return out;
}

export interface Overlay {
  room: string;
  player: number;
  horizon: number;
  pending: number;
  lagMs: number;
}

// One full frame: colored dots, the local cursor, and a status line.
export function paintFrame(
  world: TraceWorld,
  cursor: { x: number; y: number },
  me: number,
  overlay: Overlay,
): string {
  const cells: string[][] = [];
  for (let y = 0; y < GRID_HEIGHT; y++) cells.push(new Array(GRID_WIDTH).fill(" "));
  for (const d of world) {
    const cx = Math.round(d.x);
    const cy = Math.round(d.y);
    if (cx < 0 || cx >= GRID_WIDTH || cy < 0 || cy >= GRID_HEIGHT) continue;
    if (cells[cy][cx] === " ") {
      cells[cy][cx] = (COLORS[d.p] ?? "") + glyphFor(d) + RESET;
    }
  }
  const cx = Math.round(cursor.x);
  const cy = Math.round(cursor.y);
  if (cx >= 0 && cx < GRID_WIDTH && cy >= 0 && cy < GRID_HEIGHT) {
    cells[cy][cx] = (COLORS[me] ?? "") + "+" + RESET;
  }
  const border = "+" + "-".repeat(GRID_WIDTH) + "+";
  const lines = [border, ...cells.map((r) => "|" + r.join("") + "|"), border];
  lines.push(
    `room ${overlay.room}  player ${overlay.player}  ` +
      `horizon ${overlay.horizon.toFixed(2)}s  pending ${overlay.pending}  ` +
      `lag ${overlay.lagMs}ms  (arrows move, q quits)`,
  );
  // home the cursor and clear each line instead of wiping the screen, which
  // avoids flicker on slow terminals
  return "\x1b[H" + lines.map((l) => l + "\x1b[K").join("\r\n") + "\x1b[J";
}

export function enterAltScreen(): void {
  process.stdout.write("\x1b[?1049h\x1b[?25l");
}

export function leaveAltScreen(): void {
  process.stdout.write("\x1b[?25h\x1b[?1049l");
}
