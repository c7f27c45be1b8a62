"""Wire protocol: length-prefixed canonical JSON frames.

A frame is a 4-byte big-endian payload length followed by that many bytes of
UTF-8 JSON.  The JSON is canonical -- object keys sorted, no whitespace,
non-ASCII escaped -- so a given frame has exactly one encoding and tests can
compare frames as bytes.

Floats never appear in payloads.  Timestamps, coordinates, and seeds travel
as decimal integers holding their IEEE-754 bit pattern (the *_bits fields),
because a JSON float would be re-rounded by whatever parser reads it and the
whole engine depends on every client folding the exact same doubles.  The
decoder rejects any JSON float outright rather than trusting one.
"""

from __future__ import annotations

import hashlib
import json
import re
import socket
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .errors import InvalidArgumentError, LockstepError
from .events import (
    InputEvent,
    KeyPress,
    KeyRelease,
    MouseButton,
    MouseMovement,
    MousePress,
    MouseRelease,
)

PROTO_VERSION = 1

MAX_FRAME_BYTES = 1 << 20

_U32 = 1 << 32
_U64 = 1 << 64

_CODE_RE = re.compile(r"\A[A-Z]{4}\Z")


class EncodeError(LockstepError):
    """The frame cannot be put on the wire (oversized payload)."""


class DecodeError(LockstepError):
    """The bytes are not a valid frame; the detail says what was wrong."""


class ErrorCode(Enum):
    BAD_CODE = "BadCode"
    GAME_FULL = "GameFull"
    HASH_MISMATCH = "HashMismatch"
    OUT_OF_ORDER = "OutOfOrder"
    PROTOCOL_ERROR = "ProtocolError"


def float_to_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", x))[0]


def bits_to_float(b: int) -> float:
    if not isinstance(b, int) or isinstance(b, bool) or not 0 <= b < _U64:
        raise InvalidArgumentError(f"bit pattern must be a 64-bit unsigned int, got {b!r}")
    return struct.unpack("<d", struct.pack("<Q", b))[0]


def game_hash(rules_identity: str, proto_version: int = PROTO_VERSION) -> str:
    """Fingerprint guarding against mixed game or protocol versions.

    Any client whose rules identity string or protocol version differs gets a
    different hash, and the relay refuses to start a game with mixed hashes:
    divergent rules would silently compute divergent worlds forever.
    """
    if not isinstance(rules_identity, str) or not rules_identity:
        raise InvalidArgumentError("rules identity must be a non-empty string")
    if not isinstance(proto_version, int) or isinstance(proto_version, bool) or not 0 <= proto_version < _U32:
        raise InvalidArgumentError(f"protocol version must be a 32-bit unsigned int, got {proto_version!r}")
    h = hashlib.sha256(struct.pack(">I", proto_version) + rules_identity.encode("utf-8"))
    return h.hexdigest()


def _check_u64(value: object, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < _U64:
        raise InvalidArgumentError(f"{what} must be a 64-bit unsigned int, got {value!r}")
    return value


def _check_u8(value: object, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < 256:
        raise InvalidArgumentError(f"{what} must be in 0..255, got {value!r}")
    return value


@dataclass(frozen=True, slots=True)
class ClientHello:
    proto_version: int
    game_hash: str

    def __post_init__(self) -> None:
        if not isinstance(self.proto_version, int) or isinstance(self.proto_version, bool) or not 0 <= self.proto_version < _U32:
            raise InvalidArgumentError(f"bad proto_version: {self.proto_version!r}")
        if not isinstance(self.game_hash, str) or not re.fullmatch(r"[0-9a-f]{64}", self.game_hash):
            raise InvalidArgumentError("game_hash must be 64 lowercase hex digits")


@dataclass(frozen=True, slots=True)
class CreateGame:
    num_players: int

    def __post_init__(self) -> None:
        if not isinstance(self.num_players, int) or isinstance(self.num_players, bool) or not 1 <= self.num_players < 256:
            raise InvalidArgumentError(f"num_players must be in 1..255, got {self.num_players!r}")


@dataclass(frozen=True, slots=True)
class GameCreated:
    code: str

    def __post_init__(self) -> None:
        if not isinstance(self.code, str) or not _CODE_RE.match(self.code):
            raise InvalidArgumentError(f"room code must be four capital letters, got {self.code!r}")


@dataclass(frozen=True, slots=True)
class JoinGame:
    code: str

    def __post_init__(self) -> None:
        if not isinstance(self.code, str) or not _CODE_RE.match(self.code):
            raise InvalidArgumentError(f"room code must be four capital letters, got {self.code!r}")


@dataclass(frozen=True, slots=True)
class Joined:
    player: int
    joined: int
    total: int

    def __post_init__(self) -> None:
        _check_u8(self.player, "player")
        _check_u8(self.joined, "joined")
        _check_u8(self.total, "total")


@dataclass(frozen=True, slots=True)
class GameStarted:
    player: int
    num_players: int
    seed: int

    def __post_init__(self) -> None:
        _check_u8(self.player, "player")
        _check_u8(self.num_players, "num_players")
        _check_u64(self.seed, "seed")


@dataclass(frozen=True, slots=True)
class Input:
    t_bits: int
    event: InputEvent

    def __post_init__(self) -> None:
        _check_u64(self.t_bits, "t_bits")


@dataclass(frozen=True, slots=True)
class Ping:
    t_bits: int

    def __post_init__(self) -> None:
        _check_u64(self.t_bits, "t_bits")


@dataclass(frozen=True, slots=True)
class Relayed:
    t_bits: int
    player: int
    event: InputEvent

    def __post_init__(self) -> None:
        _check_u64(self.t_bits, "t_bits")
        _check_u8(self.player, "player")


@dataclass(frozen=True, slots=True)
class RelayedPing:
    t_bits: int
    player: int

    def __post_init__(self) -> None:
        _check_u64(self.t_bits, "t_bits")
        _check_u8(self.player, "player")


@dataclass(frozen=True, slots=True)
class Error:
    code: ErrorCode
    detail: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.code, ErrorCode):
            raise InvalidArgumentError(f"not an error code: {self.code!r}")
        if not isinstance(self.detail, str):
            raise InvalidArgumentError("error detail must be a string")


Frame = Union[
    ClientHello,
    CreateGame,
    GameCreated,
    JoinGame,
    Joined,
    GameStarted,
    Input,
    Ping,
    Relayed,
    RelayedPing,
    Error,
]


def _event_to_obj(e: InputEvent) -> dict:
    if isinstance(e, KeyPress):
        return {"type": "KeyPress", "text": e.text}
    if isinstance(e, KeyRelease):
        return {"type": "KeyRelease", "text": e.text}
    if isinstance(e, MousePress):
        return {
            "type": "MousePress",
            "button": e.button.value,
            "x_bits": float_to_bits(e.point[0]),
            "y_bits": float_to_bits(e.point[1]),
        }
    if isinstance(e, MouseRelease):
        return {
            "type": "MouseRelease",
            "button": e.button.value,
            "x_bits": float_to_bits(e.point[0]),
            "y_bits": float_to_bits(e.point[1]),
        }
    if isinstance(e, MouseMovement):
        return {
            "type": "MouseMovement",
            "x_bits": float_to_bits(e.point[0]),
            "y_bits": float_to_bits(e.point[1]),
        }
    raise InvalidArgumentError(f"not an input event: {e!r}")


_BUTTONS = {b.value: b for b in MouseButton}


def _obj_to_event(obj: object) -> InputEvent:
    if not isinstance(obj, dict):
        raise DecodeError(f"event must be an object, got {type(obj).__name__}")
    kind = obj.get("type")
    if kind in ("KeyPress", "KeyRelease"):
        _require_keys(obj, {"type", "text"})
        text = obj["text"]
        if not isinstance(text, str):
            raise DecodeError("key text must be a string")
        return KeyPress(text) if kind == "KeyPress" else KeyRelease(text)
    if kind in ("MousePress", "MouseRelease"):
        _require_keys(obj, {"type", "button", "x_bits", "y_bits"})
        button = _BUTTONS.get(obj["button"])
        if button is None:
            raise DecodeError(f"unknown mouse button {obj['button']!r}")
        point = _decode_point(obj)
        cls = MousePress if kind == "MousePress" else MouseRelease
        try:
            return cls(button, point)
        except InvalidArgumentError as exc:
            raise DecodeError(str(exc)) from exc
    if kind == "MouseMovement":
        _require_keys(obj, {"type", "x_bits", "y_bits"})
        try:
            return MouseMovement(_decode_point(obj))
        except InvalidArgumentError as exc:
            raise DecodeError(str(exc)) from exc
    raise DecodeError(f"unknown event type {kind!r}")


def _decode_point(obj: dict) -> tuple[float, float]:
    x_bits = obj["x_bits"]
    y_bits = obj["y_bits"]
    for name, value in (("x_bits", x_bits), ("y_bits", y_bits)):
        if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < _U64:
            raise DecodeError(f"{name} must be a 64-bit unsigned int, got {value!r}")
    return (bits_to_float(x_bits), bits_to_float(y_bits))


def _frame_to_obj(frame: Frame) -> dict:
    if isinstance(frame, ClientHello):
        return {
            "type": "ClientHello",
            "proto_version": frame.proto_version,
            "game_hash": frame.game_hash,
        }
    if isinstance(frame, CreateGame):
        return {"type": "CreateGame", "num_players": frame.num_players}
    if isinstance(frame, GameCreated):
        return {"type": "GameCreated", "code": frame.code}
    if isinstance(frame, JoinGame):
        return {"type": "JoinGame", "code": frame.code}
    if isinstance(frame, Joined):
        return {
            "type": "Joined",
            "player": frame.player,
            "joined": frame.joined,
            "total": frame.total,
        }
    if isinstance(frame, GameStarted):
        return {
            "type": "GameStarted",
            "player": frame.player,
            "num_players": frame.num_players,
            "seed": frame.seed,
        }
    if isinstance(frame, Input):
        return {"type": "Input", "t_bits": frame.t_bits, "event": _event_to_obj(frame.event)}
    if isinstance(frame, Ping):
        return {"type": "Ping", "t_bits": frame.t_bits}
    if isinstance(frame, Relayed):
        return {
            "type": "Relayed",
            "t_bits": frame.t_bits,
            "player": frame.player,
            "event": _event_to_obj(frame.event),
        }
    if isinstance(frame, RelayedPing):
        return {"type": "RelayedPing", "t_bits": frame.t_bits, "player": frame.player}
    if isinstance(frame, Error):
        return {"type": "Error", "code": frame.code.value, "detail": frame.detail}
    raise InvalidArgumentError(f"not a frame: {frame!r}")


def encode_frame(frame: Frame) -> bytes:
    """Canonical bytes for ``frame``, length prefix included."""
    payload = json.dumps(
        _frame_to_obj(frame), sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("ascii")
    if len(payload) > MAX_FRAME_BYTES:
        raise EncodeError(f"payload is {len(payload)} bytes, cap is {MAX_FRAME_BYTES}")
    return struct.pack(">I", len(payload)) + payload


def _reject_float(text: str) -> float:
    raise DecodeError(f"floats are not allowed in payloads, got {text!r}")


def _reject_constant(text: str) -> float:
    raise DecodeError(f"non-finite literals are not allowed in payloads, got {text!r}")


def _require_keys(obj: dict, keys: set) -> None:
    if set(obj) != keys:
        missing = keys - set(obj)
        extra = set(obj) - keys
        parts = []
        if missing:
            parts.append(f"missing {sorted(missing)}")
        if extra:
            parts.append(f"unexpected {sorted(extra)}")
        raise DecodeError(f"bad frame keys: {', '.join(parts)}")


def decode_payload(payload: bytes) -> Frame:
    """Parse one frame's JSON payload (no length prefix)."""
    try:
        obj = json.loads(
            payload.decode("utf-8"),
            parse_float=_reject_float,
            parse_constant=_reject_constant,
        )
    except DecodeError:
        raise
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(f"payload is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise DecodeError(f"frame must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("type")
    try:
        if kind == "ClientHello":
            _require_keys(obj, {"type", "proto_version", "game_hash"})
            return ClientHello(obj["proto_version"], obj["game_hash"])
        if kind == "CreateGame":
            _require_keys(obj, {"type", "num_players"})
            return CreateGame(obj["num_players"])
        if kind == "GameCreated":
            _require_keys(obj, {"type", "code"})
            return GameCreated(obj["code"])
        if kind == "JoinGame":
            _require_keys(obj, {"type", "code"})
            return JoinGame(obj["code"])
        if kind == "Joined":
            _require_keys(obj, {"type", "player", "joined", "total"})
            return Joined(obj["player"], obj["joined"], obj["total"])
        if kind == "GameStarted":
            _require_keys(obj, {"type", "player", "num_players", "seed"})
            return GameStarted(obj["player"], obj["num_players"], obj["seed"])
        if kind == "Input":
            _require_keys(obj, {"type", "t_bits", "event"})
            return Input(obj["t_bits"], _obj_to_event(obj["event"]))
        if kind == "Ping":
            _require_keys(obj, {"type", "t_bits"})
            return Ping(obj["t_bits"])
        if kind == "Relayed":
            _require_keys(obj, {"type", "t_bits", "player", "event"})
            return Relayed(obj["t_bits"], obj["player"], _obj_to_event(obj["event"]))
        if kind == "RelayedPing":
            _require_keys(obj, {"type", "t_bits", "player"})
            return RelayedPing(obj["t_bits"], obj["player"])
        if kind == "Error":
            codes = {c.value: c for c in ErrorCode}
            _require_keys(obj, {"type", "code", "detail"})
            if obj["code"] not in codes:
                raise DecodeError(f"unknown error code {obj['code']!r}")
            if not isinstance(obj["detail"], str):
                raise DecodeError("error detail must be a string")
            return Error(codes[obj["code"]], obj["detail"])
    except InvalidArgumentError as exc:
        raise DecodeError(str(exc)) from exc
    raise DecodeError(f"unknown frame type {kind!r}")


def decode_frame(data: bytes, frame_cap: int = MAX_FRAME_BYTES) -> Frame:
    """Parse one complete frame: length prefix plus exactly its payload."""
    if len(data) < 4:
        raise DecodeError(f"frame shorter than its length prefix: {len(data)} bytes")
    (n,) = struct.unpack(">I", data[:4])
    if n > frame_cap:
        raise DecodeError(f"declared payload of {n} bytes exceeds cap of {frame_cap}")
    if len(data) != 4 + n:
        raise DecodeError(f"expected {4 + n} bytes total, got {len(data)}")
    return decode_payload(data[4:])


def send_frame(sock: socket.socket, frame: Frame) -> None:
    sock.sendall(encode_frame(frame))


class FrameStream:
    """Blocking frame reader over a stream socket.

    read_frame returns None on a clean EOF at a frame boundary and raises
    DecodeError for torn frames, oversized declarations, or bad payloads.
    The declared length is checked against the cap before any payload is
    read, so a hostile peer cannot make us buffer more than one cap's worth.
    """

    def __init__(self, sock: socket.socket, frame_cap: int = MAX_FRAME_BYTES) -> None:
        self._sock = sock
        self._cap = frame_cap

    def _read_exact(self, n: int) -> Optional[bytes]:
        chunks = []
        got = 0
        while got < n:
            chunk = self._sock.recv(min(n - got, 65536))
            if not chunk:
                if got == 0:
                    return None
                raise DecodeError(f"connection closed mid-frame after {got} bytes")
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    def read_frame(self) -> Optional[Frame]:
        prefix = self._read_exact(4)
        if prefix is None:
            return None
        (n,) = struct.unpack(">I", prefix)
        if n > self._cap:
            raise DecodeError(f"declared payload of {n} bytes exceeds cap of {self._cap}")
        payload = self._read_exact(n)
        if payload is None:
            raise DecodeError("connection closed before payload")
        return decode_payload(payload)
