from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Tuple

from .violation import ViolationReport


@dataclass(frozen=True)
class SavedContext:
    """Control context captured at a domain-call boundary."""
    thread_id: int
    depth: int
    rights: Tuple[Tuple[int, Any], ...]


@dataclass
class ExecutionSnapshot:
    """
    Rewind target recorded immediately before domain code is entered.

    Attributes
    ----------
    context: rewind.models.SavedContext
        Thread, nesting depth and the caller's access rights at the boundary.
    domain_id: int
    epoch: int
        Strictly increasing; a rewind must carry the epoch of the live snapshot.
    valid: bool
        Cleared on normal return and after the one permitted rewind.
    """
    context: SavedContext
    domain_id: int
    epoch: int
    valid: bool = True


class Path(Enum):
    """Which of the two returns of a snapshot is being observed."""
    normal: str = "normal"
    recovery: str = "recovery"


@dataclass(frozen=True)
class Landing:
    """Where control arrived after running code under a snapshot."""
    path: Path
    value: Any = None
    report: Optional[ViolationReport] = None
