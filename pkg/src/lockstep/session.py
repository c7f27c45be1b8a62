"""Client-side session: one player's clock, log, and transport glue.

A Session owns this client's view of the shared game.  Local input goes into
the log immediately (the local player never waits on the network) and out to
the relay; remote frames come in through on_frame; tick keeps activity
flowing while the player is idle, because peers cannot commit past a player
they have not heard from.

The Session is transport-agnostic: it calls a send function and is fed
decoded frames.  LiveSession pairs one with a real socket and a reader
thread; the simulation harness pairs the same class with virtual time and
scripted delivery, which is exactly what makes the harness's results
transferable to live runs.
"""

from __future__ import annotations

import math
import queue
import socket
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Optional, Union

from .engine import (
    DEFAULT_SMOOTHING_WINDOW,
    EMPTY_CACHE,
    GameRules,
    Log,
    SmoothingBuffer,
    add_event,
    add_ping,
    current_state_cached,
    init_log,
    note_arrival,
    smoothed_state,
)
from .errors import InvalidArgumentError, LobbyError, OutOfOrderError, SessionFault
from .events import InputEvent, Message, MouseMovement
from .protocol import (
    PROTO_VERSION,
    ClientHello,
    CreateGame,
    Error,
    Frame,
    FrameStream,
    GameCreated,
    GameStarted,
    Input,
    JoinGame,
    Joined,
    Ping,
    Relayed,
    RelayedPing,
    bits_to_float,
    float_to_bits,
    game_hash,
    send_frame,
)

DEFAULT_PING_INTERVAL = 1.0

# ceiling on forwarded mouse movements when coalescing is on
MOVES_PER_SECOND = 30.0


class GameClock:
    """Game time from the monotonic clock, zeroed at construction.

    Constructed the moment GameStarted arrives, so every client's time zero
    is its own receipt of the start signal.  Clocks need not agree across
    clients; consistency never depends on them, only responsiveness does.
    """

    def __init__(self) -> None:
        self._epoch = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._epoch


class VirtualClock:
    """A clock that moves only when told to; the harness drives this."""

    def __init__(self, start: float = 0.0) -> None:
        self.time = float(start)

    def now(self) -> float:
        return self.time

    def advance_to(self, t: float) -> None:
        if t < self.time:
            raise InvalidArgumentError(
                f"virtual time cannot move backwards: {t!r} < {self.time!r}"
            )
        self.time = float(t)


Clock = Union[GameClock, VirtualClock]


class Session:
    """One player's running game.

    submit_local and tick stamp outgoing activity, on_frame ingests peer
    frames, and render/consistent_state answer queries.  All methods must be
    called from one thread (or under one lock); LiveSession takes care of
    that for socket use.
    """

    def __init__(
        self,
        player: int,
        num_players: int,
        rules: GameRules,
        seed: int,
        clock: Clock,
        send: Callable[[Frame], None],
        ping_interval: float = DEFAULT_PING_INTERVAL,
        smoothing_window: float = DEFAULT_SMOOTHING_WINDOW,
        coalesce_mouse: bool = False,
    ) -> None:
        if not 0 <= player < num_players:
            raise InvalidArgumentError(
                f"player {player!r} out of range for {num_players} players"
            )
        if not ping_interval > 0.0:
            raise InvalidArgumentError(f"ping interval must be positive, got {ping_interval!r}")
        self.player = player
        self.num_players = num_players
        self.rules = rules
        self.clock = clock
        self.log: Log = init_log(range(num_players), rules, seed)
        self.smoothing = SmoothingBuffer(window=smoothing_window)
        self.ping_interval = ping_interval
        self.coalesce_mouse = coalesce_mouse
        self.faulted: Optional[SessionFault] = None
        self._send = send
        self._cache = EMPTY_CACHE
        self._last_sent = 0.0
        self._last_move_sent = float("-inf")

    def _stamp(self) -> float:
        # the monotonic clock may repeat a reading; never stamp earlier than
        # our own recorded activity or the log would reject the message
        now = self.clock.now()
        floor = self.log.latest[self.player]
        return floor if now < floor else now

    def submit_local(self, event: InputEvent) -> bool:
        """Apply one local input and forward it; returns False if coalescing
        dropped a mouse movement instead."""
        self._check_ok()
        t = self._stamp()
        if self.coalesce_mouse and isinstance(event, MouseMovement):
            if t - self._last_move_sent < 1.0 / MOVES_PER_SECOND:
                return False
            self._last_move_sent = t
        self.log = add_event(Message(t, self.player, event), self.log, self.rules)
        self._last_sent = t
        self._send(Input(t_bits=float_to_bits(t), event=event))
        return True

    def tick(self) -> bool:
        """Send a ping if the peers have not heard from us recently.

        Call this a few times a second (the frame loop is the natural spot).
        Returns True when a ping actually went out.
        """
        self._check_ok()
        now = self.clock.now()
        if now - self._last_sent < self.ping_interval:
            return False
        t = self._stamp()
        self.log = add_ping(t, self.player, self.log, self.rules)
        self._last_sent = t
        self._send(Ping(t_bits=float_to_bits(t)))
        return True

    def on_frame(self, frame: Frame) -> None:
        """Ingest one frame from the relay."""
        self._check_ok()
        if isinstance(frame, Relayed):
            t = self._ingest_time(frame.t_bits)
            if frame.player == self.player:
                self._fault("relay echoed our own input back")
            try:
                msg = Message(t, frame.player, frame.event)
            except InvalidArgumentError as exc:
                self._fault(f"bad relayed input: {exc}")
            try:
                self.log = add_event(msg, self.log, self.rules)
            except OutOfOrderError:
                self._fault(f"player {frame.player} sent timestamps out of order")
            except InvalidArgumentError as exc:
                self._fault(f"bad relayed input: {exc}")
            self.smoothing = note_arrival(msg, self.clock.now(), self.smoothing)
        elif isinstance(frame, RelayedPing):
            t = self._ingest_time(frame.t_bits)
            if frame.player == self.player:
                self._fault("relay echoed our own ping back")
            try:
                self.log = add_ping(t, frame.player, self.log, self.rules)
            except OutOfOrderError:
                self._fault(f"player {frame.player} sent timestamps out of order")
            except InvalidArgumentError as exc:
                self._fault(f"bad relayed ping: {exc}")
        elif isinstance(frame, Error):
            self._fault(f"relay reported {frame.code.value}: {frame.detail}")
        else:
            self._fault(f"unexpected {type(frame).__name__} during a game")

    def render(self) -> Any:
        """The world to draw right now: smoothed, eased, frame-rate friendly."""
        self._check_ok()
        return smoothed_state(self.clock.now(), self.log, self.smoothing, self.rules)

    def consistent_state(self, at: Optional[float] = None) -> Any:
        """The exact world at ``at`` (default: now); what replicas agree on."""
        self._check_ok()
        t = self.clock.now() if at is None else at
        world, self._cache = current_state_cached(t, self.log, self._cache, self.rules)
        return world

    def _ingest_time(self, t_bits: int) -> float:
        t = bits_to_float(t_bits)
        if not math.isfinite(t) or t < 0.0:
            self._fault(f"peer timestamp is not a finite non-negative time: {t!r}")
        return t

    def _fault(self, why: str) -> None:
        self.faulted = SessionFault(why)
        raise self.faulted

    def _check_ok(self) -> None:
        if self.faulted is not None:
            raise self.faulted


@dataclass(frozen=True)
class Create:
    """Lobby intent: open a fresh room for this many players."""

    num_players: int


@dataclass(frozen=True)
class Join:
    """Lobby intent: enter an existing room by its code."""

    code: str


class LiveSession:
    """A Session wired to a real relay over TCP.

    connect() blocks through the lobby until the game starts, then spawns a
    reader thread that queues incoming frames; call pump() from your frame
    loop to apply them (plus tick(), submit(), render()).  The lobby_update
    callback sees GameCreated and Joined frames as they happen, which is how
    a UI learns the room code it must show the other players.
    """

    def __init__(
        self,
        sock: socket.socket,
        session: Session,
        code: str,
    ) -> None:
        self.sock = sock
        self.session = session
        self.code = code
        self._frames: queue.Queue[Union[Frame, None, Exception]] = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, name="session-reader", daemon=True)
        self._reader.start()

    @classmethod
    def connect(
        cls,
        host: str,
        port: int,
        rules: GameRules,
        rules_identity: str,
        intent: Union[Create, Join],
        lobby_update: Optional[Callable[[Frame], None]] = None,
        ping_interval: float = DEFAULT_PING_INTERVAL,
        smoothing_window: float = DEFAULT_SMOOTHING_WINDOW,
        coalesce_mouse: bool = False,
    ) -> "LiveSession":
        sock = socket.create_connection((host, port))
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        try:
            stream = FrameStream(sock)
            send_frame(sock, ClientHello(PROTO_VERSION, game_hash(rules_identity)))
            if isinstance(intent, Create):
                send_frame(sock, CreateGame(intent.num_players))
            else:
                send_frame(sock, JoinGame(intent.code))
            code = intent.code if isinstance(intent, Join) else ""
            while True:
                frame = stream.read_frame()
                if frame is None:
                    raise LobbyError("ProtocolError", "relay closed the connection")
                if isinstance(frame, GameCreated):
                    code = frame.code
                    if lobby_update:
                        lobby_update(frame)
                elif isinstance(frame, Joined):
                    if lobby_update:
                        lobby_update(frame)
                elif isinstance(frame, Error):
                    raise LobbyError(frame.code.value, frame.detail)
                elif isinstance(frame, GameStarted):
                    session = Session(
                        player=frame.player,
                        num_players=frame.num_players,
                        rules=rules,
                        seed=frame.seed,
                        clock=GameClock(),
                        send=lambda f: send_frame(sock, f),
                        ping_interval=ping_interval,
                        smoothing_window=smoothing_window,
                        coalesce_mouse=coalesce_mouse,
                    )
                    return cls(sock, session, code)
                else:
                    raise LobbyError(
                        "ProtocolError", f"unexpected {type(frame).__name__} in lobby"
                    )
        except BaseException:
            sock.close()
            raise

    def _read_loop(self) -> None:
        stream = FrameStream(self.sock)
        while True:
            try:
                frame = stream.read_frame()
            except Exception as exc:
                self._frames.put(exc)
                return
            self._frames.put(frame)
            if frame is None:
                return

    def pump(self) -> int:
        """Apply every queued frame; returns how many were applied.

        Raises SessionFault if the connection dropped or a peer misbehaved.
        """
        n = 0
        while True:
            try:
                item = self._frames.get_nowait()
            except queue.Empty:
                return n
            if item is None:
                raise SessionFault("relay closed the connection")
            if isinstance(item, Exception):
                raise SessionFault(f"transport failed: {item}")
            self.session.on_frame(item)
            n += 1

    def submit(self, event: InputEvent) -> bool:
        return self.session.submit_local(event)

    def tick(self) -> bool:
        return self.session.tick()

    def render(self) -> Any:
        return self.session.render()

    def close(self) -> None:
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()
        self._reader.join(timeout=5)
