// Client session: one socket to the relay, one replicated log behind it.
//
// Local input is applied to the log first and sent second, so the player's
// own actions render immediately; remote input folds in as it arrives.
// The relay never interprets frames, so everything game-shaped lives here.

import { Socket } from "node:net";
import {
  DecodeError,
  FrameSplitter,
  PROTO_VERSION,
  encodeFrame,
  gameHash,
  type Frame,
  type InputEvent,
} from "./frames.js";
import {
  addEvent,
  addPing,
  commitHorizon,
  currentState,
  emptyBuffer,
  initLog,
  noteArrival,
  smoothedState,
  type Log,
  type Message,
  type Rules,
  type SmoothingBuffer,
} from "./engine.js";
import { bitsToFloat, floatToBits } from "./util.js";

export interface SessionEvents {
  onCode?(code: string): void;
  onLobby?(player: number, joined: number, total: number): void;
  onStarted?(player: number, numPlayers: number): void;
  onRelayed?(msg: Message): void;
  onFault?(reason: string): void;
}

export type Mode = { create: number } | { join: string };

export class Session<W> {
  private sock: Socket | null = null;
  private splitter = new FrameSplitter();
  private log: Log<W> | null = null;
  private buf: SmoothingBuffer;
  private startedAt = 0n;
  private lastSent = 0.0;
  private fault: string | null = null;
  private lagSeconds = 0.0;

  player = -1;
  numPlayers = 0;

  constructor(
    private rules: Rules<W>,
    private rulesId: string,
    private events: SessionEvents,
    private pingInterval = 1.0,
    smoothingWindow = 0.25,
  ) {
    this.buf = emptyBuffer(smoothingWindow);
  }

  connect(host: string, port: number, mode: Mode): void {
    const sock = new Socket();
    this.sock = sock;
    sock.setNoDelay(true);
    sock.on("error", (err) => this.fail(`connection error: ${err.message}`));
    sock.on("close", () => {
      if (this.fault === null) this.fail("connection closed");
    });
    sock.on("data", (chunk) => {
      let frames: Frame[];
      try {
        frames = this.splitter.feed(chunk);
      } catch (err) {
        this.fail(err instanceof DecodeError ? err.message : String(err));
        return;
      }
      for (const f of frames) this.onFrame(f);
    });
    sock.connect(port, host, () => {
      this.send({ kind: "ClientHello", protoVersion: PROTO_VERSION, gameHash: gameHash(this.rulesId) });
      if ("create" in mode) {
        this.send({ kind: "CreateGame", numPlayers: mode.create });
      } else {
        this.send({ kind: "JoinGame", code: mode.join });
      }
    });
  }

  get started(): boolean {
    return this.log !== null;
  }

  get faulted(): string | null {
    return this.fault;
  }

  // seconds of game time since GameStarted arrived
  now(): number {
    if (this.startedAt === 0n) return 0.0;
    return Number(process.hrtime.bigint() - this.startedAt) / 1e9;
  }

  private send(frame: Frame): void {
    this.sock?.write(encodeFrame(frame));
  }

  private fail(reason: string): void {
    if (this.fault !== null) return;
    this.fault = reason;
    this.events.onFault?.(reason);
  }

  private onFrame(frame: Frame): void {
    if (this.fault !== null) return;
    switch (frame.kind) {
      case "GameCreated":
        this.events.onCode?.(frame.code);
        return;
      case "Joined":
        this.player = frame.player;
        this.events.onLobby?.(frame.player, frame.joined, frame.total);
        return;
      case "GameStarted": {
        this.player = frame.player;
        this.numPlayers = frame.numPlayers;
        const players = Array.from({ length: frame.numPlayers }, (_, i) => i);
        this.log = initLog(players, this.rules, frame.seed);
        this.startedAt = process.hrtime.bigint();
        this.events.onStarted?.(frame.player, frame.numPlayers);
        return;
      }
      case "Relayed":
      case "RelayedPing": {
        if (this.log === null) {
          this.fail(`server relayed input before the game started`);
          return;
        }
        const t = bitsToFloat(frame.tBits);
        if (!Number.isFinite(t)) {
          this.fail(`peer sent a non-finite timestamp`);
          return;
        }
        let relayed: Message | null = null;
        try {
          if (frame.kind === "Relayed") {
            relayed = { t, p: frame.player, e: frame.event };
            this.log = addEvent(relayed, this.log, this.rules);
            this.buf = noteArrival(relayed, this.now(), this.buf);
          } else {
            this.log = addPing(t, frame.player, this.log, this.rules);
          }
        } catch (err) {
          this.fail(String(err instanceof Error ? err.message : err));
          return;
        }
        this.lagSeconds = Math.max(0, this.now() - t);
        if (relayed !== null) this.events.onRelayed?.(relayed);
        return;
      }
      case "Error":
        this.fail(`${frame.code}: ${frame.detail}`);
        return;
      default:
        this.fail(`unexpected ${frame.kind} frame from server`);
    }
  }

  // Stamp, apply locally, then send.  The stamp never goes backwards even
  // if the wall clock stalls, because a player's own times must ascend.
  submitLocal(event: InputEvent): void {
    if (this.log === null || this.fault !== null) return;
    const own = this.log.latest.get(this.player) ?? 0.0;
    const t = Math.max(this.now(), own);
    this.log = addEvent({ t, p: this.player, e: event }, this.log, this.rules);
    this.send({ kind: "Input", tBits: floatToBits(t), event });
    this.lastSent = t;
  }

  // Call at the render cadence: pings keep the commit horizon moving while
  // this player is idle, so peers can keep committing.
  tick(): void {
    if (this.log === null || this.fault !== null) return;
    const now = this.now();
    if (now - this.lastSent >= this.pingInterval) {
      const own = this.log.latest.get(this.player) ?? 0.0;
      const t = Math.max(now, own);
      this.log = addPing(t, this.player, this.log, this.rules);
      this.send({ kind: "Ping", tBits: floatToBits(t) });
      this.lastSent = t;
    }
  }

  render(now?: number): W {
    if (this.log === null) throw new Error("game has not started");
    return smoothedState(now ?? this.now(), this.log, this.buf, this.rules);
  }

  consistent(now: number): W {
    if (this.log === null) throw new Error("game has not started");
    return currentState(now, this.log, this.rules);
  }

  stats(): { horizon: number; pending: number; lagMs: number; maxT: number } {
    if (this.log === null) return { horizon: 0, pending: 0, lagMs: 0, maxT: 0 };
    let maxT = 0.0;
    for (const t of this.log.latest.values()) maxT = Math.max(maxT, t);
    return {
      horizon: commitHorizon(this.log),
      pending: this.log.events.length,
      lagMs: Math.round(this.lagSeconds * 1000),
      maxT,
    };
  }

  close(): void {
    this.sock?.destroy();
    this.sock = null;
  }
}
