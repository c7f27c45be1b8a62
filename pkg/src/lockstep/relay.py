"""The relay server: a lobby and a per-room broadcast pipe, nothing more.

The relay never parses timestamps, never orders events, and never simulates.
It pairs clients up under four-letter room codes, hands every room one fresh
seed, checks that everyone claims the same game hash, and then forwards each
member's frames to the other members in arrival order.  All consistency
logic lives in the clients; keeping the relay dumb is what lets one relay
serve any game built on this package.

One lock serializes the whole table, which makes per-room frame order
trivially well defined.  That is deliberate: this server targets rooms of a
handful of players, not thousands, and correctness of ordering is worth far
more here than concurrency.
"""

from __future__ import annotations

import logging
import secrets
import socket
import string
import threading
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidArgumentError
from .protocol import (
    MAX_FRAME_BYTES,
    PROTO_VERSION,
    ClientHello,
    CreateGame,
    DecodeError,
    Error,
    ErrorCode,
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
    send_frame,
)

log = logging.getLogger("lockstep.relay")

_CODE_ALPHABET = string.ascii_uppercase
_MAX_CODES = 26 ** 4


class _Member:
    def __init__(self, sock: socket.socket) -> None:
        self.sock = sock
        self.hello: Optional[ClientHello] = None
        self.room: Optional[_Room] = None
        self.player = -1
        self.closing = False

    def send(self, frame: Frame) -> None:
        try:
            send_frame(self.sock, frame)
        except OSError:
            # the reader thread for this socket will notice and clean up
            pass

    def shut_down(self) -> None:
        self.closing = True
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass


@dataclass
class _Room:
    code: str
    required: int
    members: list[_Member] = field(default_factory=list)
    running: bool = False


class RelayServer:
    """Threaded TCP relay; one thread per connection plus an acceptor.

    Construct, then start(); address tells you where it actually bound,
    which matters when asking for port 0.  close() shuts everything down and
    joins the threads, so tests can use it as a context manager.
    """

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        max_rooms: int = 1024,
        frame_cap: int = MAX_FRAME_BYTES,
    ) -> None:
        if not 1 <= max_rooms <= _MAX_CODES:
            raise InvalidArgumentError(f"max_rooms must be in 1..{_MAX_CODES}")
        self._listen_addr = (host, port)
        self._max_rooms = max_rooms
        self._frame_cap = frame_cap
        self._lock = threading.Lock()
        self._rooms: dict[str, _Room] = {}
        self._members: set[_Member] = set()
        self._threads: list[threading.Thread] = []
        self._listener: Optional[socket.socket] = None
        self._closed = False
        self._stopped = threading.Event()

    def start(self) -> None:
        listener = socket.create_server(self._listen_addr, reuse_port=False)
        listener.listen(32)
        self._listener = listener
        t = threading.Thread(target=self._accept_loop, name="relay-accept", daemon=True)
        self._threads.append(t)
        t.start()
        log.info("listening on %s:%d", *self.address)

    @property
    def address(self) -> tuple[str, int]:
        assert self._listener is not None, "start() first"
        addr = self._listener.getsockname()
        return (addr[0], addr[1])

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            members = list(self._members)
        self._stopped.set()
        if self._listener is not None:
            # closing the fd alone leaves a thread blocked in accept()
            # blocked forever on Linux; shutdown wakes it first
            try:
                self._listener.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self._listener.close()
            except OSError:
                pass
        for m in members:
            m.shut_down()
        for t in self._threads:
            t.join(timeout=5)

    def __enter__(self) -> "RelayServer":
        self.start()
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def serve_forever(self) -> None:
        """Block until close() or KeyboardInterrupt."""
        assert self._listener is not None, "start() first"
        try:
            self._stopped.wait()
        except KeyboardInterrupt:
            pass
        finally:
            self.close()

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while True:
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            member = _Member(sock)
            with self._lock:
                if self._closed:
                    sock.close()
                    return
                self._members.add(member)
                t = threading.Thread(
                    target=self._serve_member,
                    args=(member,),
                    name=f"relay-{addr[0]}:{addr[1]}",
                    daemon=True,
                )
                self._threads.append(t)
            t.start()

    def _serve_member(self, member: _Member) -> None:
        stream = FrameStream(member.sock, self._frame_cap)
        try:
            while True:
                try:
                    frame = stream.read_frame()
                except DecodeError as exc:
                    # framing is lost, so the connection cannot continue
                    member.send(Error(ErrorCode.PROTOCOL_ERROR, str(exc)))
                    break
                except OSError:
                    # abrupt reset; same cleanup as a clean disconnect
                    break
                if frame is None:
                    break
                with self._lock:
                    if self._closed:
                        break
                    self._dispatch(member, frame)
        finally:
            with self._lock:
                self._members.discard(member)
                if not member.closing:
                    self._leave(member)
            try:
                member.sock.close()
            except OSError:
                pass

    # All handlers below run with the table lock held.

    def _dispatch(self, member: _Member, frame: Frame) -> None:
        if member.hello is None:
            if not isinstance(frame, ClientHello):
                member.send(
                    Error(ErrorCode.PROTOCOL_ERROR, "expected ClientHello first")
                )
                member.shut_down()
                return
            if frame.proto_version != PROTO_VERSION:
                member.send(
                    Error(
                        ErrorCode.PROTOCOL_ERROR,
                        f"protocol version {frame.proto_version} unsupported, need {PROTO_VERSION}",
                    )
                )
                member.shut_down()
                return
            member.hello = frame
            return
        if isinstance(frame, CreateGame):
            self._create(member, frame)
        elif isinstance(frame, JoinGame):
            self._join(member, frame)
        elif isinstance(frame, (Input, Ping)):
            self._forward(member, frame)
        else:
            member.send(
                Error(ErrorCode.PROTOCOL_ERROR, f"unexpected {type(frame).__name__}")
            )

    def _create(self, member: _Member, frame: CreateGame) -> None:
        if member.room is not None:
            member.send(Error(ErrorCode.PROTOCOL_ERROR, "already in a room"))
            return
        if len(self._rooms) >= self._max_rooms:
            member.send(Error(ErrorCode.PROTOCOL_ERROR, "server is full"))
            return
        while True:
            code = "".join(
                _CODE_ALPHABET[secrets.randbelow(26)] for _ in range(4)
            )
            if code not in self._rooms:
                break
        room = _Room(code=code, required=frame.num_players)
        self._rooms[code] = room
        room.members.append(member)
        member.room = room
        member.player = 0
        log.info("room %s created for %d players", code, frame.num_players)
        member.send(GameCreated(code))
        if len(room.members) == room.required:
            self._start_game(room)

    def _join(self, member: _Member, frame: JoinGame) -> None:
        if member.room is not None:
            member.send(Error(ErrorCode.PROTOCOL_ERROR, "already in a room"))
            return
        room = self._rooms.get(frame.code)
        if room is None:
            member.send(Error(ErrorCode.BAD_CODE, f"no room {frame.code}"))
            return
        if room.running or len(room.members) >= room.required:
            member.send(Error(ErrorCode.GAME_FULL, f"room {frame.code} is full"))
            return
        room.members.append(member)
        member.room = room
        member.player = len(room.members) - 1
        log.info("room %s: %d/%d joined", room.code, len(room.members), room.required)
        for m in room.members:
            m.send(Joined(player=m.player, joined=len(room.members), total=room.required))
        if len(room.members) == room.required:
            self._start_game(room)

    def _start_game(self, room: _Room) -> None:
        hashes = {m.hello.game_hash for m in room.members if m.hello is not None}
        if len(hashes) > 1:
            log.warning("room %s: mismatched game hashes, closing", room.code)
            self._close_room(room, Error(ErrorCode.HASH_MISMATCH, "game hashes differ"))
            return
        seed = secrets.randbits(64)
        room.running = True
        log.info("room %s: starting with seed %d", room.code, seed)
        for m in room.members:
            m.send(
                GameStarted(player=m.player, num_players=room.required, seed=seed)
            )

    def _forward(self, member: _Member, frame: Frame) -> None:
        room = member.room
        if room is None or not room.running:
            member.send(Error(ErrorCode.PROTOCOL_ERROR, "no running game"))
            return
        if isinstance(frame, Input):
            out: Frame = Relayed(t_bits=frame.t_bits, player=member.player, event=frame.event)
        else:
            assert isinstance(frame, Ping)
            out = RelayedPing(t_bits=frame.t_bits, player=member.player)
        for m in room.members:
            if m is not member:
                m.send(out)

    def _close_room(self, room: _Room, error: Error) -> None:
        self._rooms.pop(room.code, None)
        for m in room.members:
            m.room = None
            m.player = -1
            m.send(error)
            m.shut_down()

    def _leave(self, member: _Member) -> None:
        room = member.room
        if room is None:
            return
        member.room = None
        if room.running:
            # the shared timeline cannot continue without this player's
            # activity, so the whole room ends rather than stalling forever
            log.info("room %s: player %d left mid-game, closing", room.code, member.player)
            room.members.remove(member)
            self._close_room(room, Error(ErrorCode.PROTOCOL_ERROR, "player left"))
            return
        room.members.remove(member)
        if not room.members:
            log.info("room %s: empty, removed", room.code)
            self._rooms.pop(room.code, None)
            return
        # waiting members get fresh ids so the eventual numbering is dense
        for i, m in enumerate(room.members):
            m.player = i
        log.info("room %s: %d/%d after departure", room.code, len(room.members), room.required)
        for m in room.members:
            m.send(Joined(player=m.player, joined=len(room.members), total=room.required))
