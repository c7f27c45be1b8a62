"""Exception types shared across the engine, protocol, and session layers."""

from __future__ import annotations


class LockstepError(Exception):
    """Base class for every error this package raises deliberately."""


class InvalidArgumentError(LockstepError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class OutOfOrderError(LockstepError):
    """A player's timestamp went backwards relative to their recorded activity."""


class QueryInPastError(LockstepError):
    """A state query asked about a time before the commit horizon."""


class SessionFault(LockstepError):
    """A peer or the transport violated the protocol mid-game.

    Once raised the session is unusable: the shared timeline can no longer be
    reconstructed, so the only safe move is to surface the fault and leave.
    """


class LobbyError(LockstepError):
    """A typed failure reported by the relay while joining or creating a game."""

    def __init__(self, code: str, detail: str = "") -> None:
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail
