"""Lock-step simulation engine for networked multi-user programs.

Clients exchange nothing but timestamped input events; every client folds
the same events with the same deterministic rules and gets the same world,
bit for bit.  The package provides the replicated log and state queries
(engine), reproducible math so "same rules" holds across machines (detmath),
a canonical wire protocol and a dumb relay server (protocol, relay), the
client-side session glue (session), and a virtual-time harness that makes
whole multi-client runs unit-testable (harness).
"""

from .engine import (
    DEFAULT_SMOOTHING_WINDOW,
    EMPTY_CACHE,
    GAME_RATE,
    GameRules,
    Log,
    SmoothingBuffer,
    StateCache,
    add_event,
    add_ping,
    apparent_time,
    commit_horizon,
    current_state,
    current_state_cached,
    init_log,
    note_arrival,
    smoothed_state,
    sort_messages,
)
from .errors import (
    InvalidArgumentError,
    LobbyError,
    LockstepError,
    OutOfOrderError,
    QueryInPastError,
    SessionFault,
)
from .events import (
    InputEvent,
    KeyPress,
    KeyRelease,
    Message,
    MouseButton,
    MouseMovement,
    MousePress,
    MouseRelease,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SMOOTHING_WINDOW",
    "EMPTY_CACHE",
    "GAME_RATE",
    "GameRules",
    "InputEvent",
    "InvalidArgumentError",
    "KeyPress",
    "KeyRelease",
    "LobbyError",
    "LockstepError",
    "Log",
    "Message",
    "MouseButton",
    "MouseMovement",
    "MousePress",
    "MouseRelease",
    "OutOfOrderError",
    "QueryInPastError",
    "SessionFault",
    "SmoothingBuffer",
    "StateCache",
    "add_event",
    "add_ping",
    "apparent_time",
    "commit_horizon",
    "current_state",
    "current_state_cached",
    "init_log",
    "note_arrival",
    "smoothed_state",
    "sort_messages",
]
