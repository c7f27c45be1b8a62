#!/usr/bin/env node
// Playable terminal client for the dot-trace demo.
//
//   demo --server HOST:PORT --create 2        start a room, print its code
//   demo --server HOST:PORT --join CODE       join a friend's room
//
// Arrow keys steer; the cursor leaves a fading trail in your color, and the
// other player's trail fades in live.  A scripted headless mode drives the
// same session without a terminal for end-to-end tests:
//
//   demo --server HOST:PORT --create 2 --script RRUULL --dump-grid
//
// sends one cursor move per script letter, waits until both sides have
// everything, then prints the final grid between GRID-BEGIN/GRID-END at a
// dump time both clients compute identically, so two dumps of the same
// game must match byte for byte.

import { Session } from "./client.js";
import { dotTraceRules, renderGrid, GRID_HEIGHT, GRID_WIDTH, RULES_ID } from "./rules.js";
import type { TraceWorld } from "./rules.js";
import { decodeKeys, enterAltScreen, leaveAltScreen, paintFrame } from "./tui.js";

interface Args {
  host: string;
  port: number;
  create: number | null;
  join: string | null;
  script: string | null;
  dumpGrid: boolean;
  moveMs: number;
}

function usage(): never {
  process.stderr.write(
    "usage: demo --server HOST:PORT (--create [N] | --join CODE) " +
      "[--script MOVES --dump-grid] [--move-ms MS]\n",
  );
  process.exit(2);
}

function parseArgs(argv: string[]): Args {
  const args: Args = {
    host: "",
    port: 0,
    create: null,
    join: null,
    script: null,
    dumpGrid: false,
    moveMs: 25,
  };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--server") {
      const addr = argv[++i] ?? usage();
      const colon = addr.lastIndexOf(":");
      if (colon < 0) usage();
      args.host = addr.slice(0, colon);
      args.port = Number(addr.slice(colon + 1));
      if (!Number.isInteger(args.port) || args.port < 0 || args.port > 65535) usage();
    } else if (a === "--create") {
      const next = argv[i + 1];
      args.create = next !== undefined && /^\d+$/.test(next) ? Number(argv[++i]) : 2;
    } else if (a === "--join") {
      args.join = (argv[++i] ?? usage()).toUpperCase();
    } else if (a === "--script") {
      args.script = argv[++i] ?? usage();
      if (!/^[UDLR]*$/.test(args.script)) usage();
    } else if (a === "--dump-grid") {
      args.dumpGrid = true;
    } else if (a === "--move-ms") {
      args.moveMs = Number(argv[++i] ?? usage());
      if (!Number.isInteger(args.moveMs) || args.moveMs < 1) usage();
    } else {
      usage();
    }
  }
  if (!args.host || (args.create === null) === (args.join === null)) usage();
  return args;
}

const DELTAS: Record<string, [number, number]> = {
  U: [0, -1],
  D: [0, 1],
  L: [-1, 0],
  R: [1, 0],
};

function startCursor(player: number): { x: number; y: number } {
  // opposite corners of the middle band, a function of the player id only
  return player === 0
    ? { x: Math.floor(GRID_WIDTH / 4), y: Math.floor(GRID_HEIGHT / 2) }
    : { x: Math.floor((3 * GRID_WIDTH) / 4), y: Math.floor(GRID_HEIGHT / 2) };
}

function clampCursor(c: { x: number; y: number }): void {
  c.x = Math.min(GRID_WIDTH - 1, Math.max(0, c.x));
  c.y = Math.min(GRID_HEIGHT - 1, Math.max(0, c.y));
}

// -- headless scripted mode ---------------------------------------------------

function runHeadless(args: Args): void {
  const script = args.script ?? "";
  let relayedSeen = 0;
  let dumped = false;

  // no pings: with both sides scripted, event exchange alone drives
  // commitment, and the shared set of event stamps then determines a dump
  // time both clients agree on exactly
  const session = new Session<TraceWorld>(
    dotTraceRules,
    RULES_ID,
    {
      onCode: (code) => process.stdout.write(`code ${code}\n`),
      onStarted: () => queueMicrotask(drive),
      onRelayed: () => {
        relayedSeen++;
        maybeDump();
      },
      onFault: (reason) => {
        if (dumped) return;
        process.stderr.write(`fault: ${reason}\n`);
        process.exit(1);
      },
    },
    Infinity,
  );

  const cursor = { x: 0, y: 0 };
  let sent = 0;
  let placed = false;

  function drive(): void {
    if (!placed) {
      const start = startCursor(session.player);
      cursor.x = start.x;
      cursor.y = start.y;
      placed = true;
    }
    if (sent < script.length) {
      const [dx, dy] = DELTAS[script[sent]];
      cursor.x += dx;
      cursor.y += dy;
      clampCursor(cursor);
      session.submitLocal({ kind: "MouseMovement", x: cursor.x, y: cursor.y });
      sent++;
      setTimeout(drive, args.moveMs);
      return;
    }
    maybeDump();
  }

  function maybeDump(): void {
    if (dumped || !session.started) return;
    if (sent < script.length || relayedSeen < script.length) return;
    dumped = true;
    // both clients know the same event stamps, so both compute this same
    // dump time; the +5s margin closes every smoothing window first
    const dumpAt = session.stats().maxT + 5.0;
    const world = session.render(dumpAt);
    const lines = renderGrid(world);
    process.stdout.write("GRID-BEGIN\n" + lines.join("\n") + "\nGRID-END\n");
    session.close();
    process.exit(0);
  }

  session.connect(
    args.host,
    args.port,
    args.create !== null ? { create: args.create } : { join: args.join ?? "" },
  );

  setTimeout(() => {
    process.stderr.write("timed out waiting for the game to finish\n");
    process.exit(1);
  }, 45_000).unref();
}

// -- interactive mode ---------------------------------------------------------

function runInteractive(args: Args): void {
  let room = "----";
  const cursor = { x: 0, y: 0 };
  let placed = false;

  const session = new Session<TraceWorld>(dotTraceRules, RULES_ID, {
    onCode: (code) => {
      room = code;
      process.stdout.write(`room code: ${code}  (waiting for players...)\n`);
    },
    onLobby: (_player, joined, total) => {
      process.stdout.write(`players: ${joined}/${total}\n`);
    },
    onStarted: (player) => {
      const start = startCursor(player);
      cursor.x = start.x;
      cursor.y = start.y;
      placed = true;
      enterAltScreen();
    },
    onFault: (reason) => {
      leaveAltScreen();
      process.stderr.write(`\ndisconnected: ${reason}\n`);
      process.exit(1);
    },
  });

  if (args.join !== null) room = args.join;

  if (process.stdin.isTTY) process.stdin.setRawMode(true);
  process.stdin.resume();
  process.stdin.on("data", (chunk: Buffer) => {
    for (const key of decodeKeys(chunk)) {
      if (key.kind === "quit") {
        leaveAltScreen();
        session.close();
        process.exit(0);
      }
      if (!placed || !session.started) continue;
      cursor.x += key.dx;
      cursor.y += key.dy;
      clampCursor(cursor);
      session.submitLocal({ kind: "MouseMovement", x: cursor.x, y: cursor.y });
    }
  });

  // 30 Hz is plenty for a character grid; the engine's fixed step rate is
  // independent of how often we sample it
  setInterval(() => {
    if (!session.started || session.faulted !== null) return;
    session.tick();
    const stats = session.stats();
    process.stdout.write(
      paintFrame(session.render(), cursor, session.player, {
        room,
        player: session.player,
        horizon: stats.horizon,
        pending: stats.pending,
        lagMs: stats.lagMs,
      }),
    );
  }, 33);

  session.connect(
    args.host,
    args.port,
    args.create !== null ? { create: args.create } : { join: args.join ?? "" },
  );
}

const args = parseArgs(process.argv.slice(2));
if (args.script !== null) runHeadless(args);
else runInteractive(args);
