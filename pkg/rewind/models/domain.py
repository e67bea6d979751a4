import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..errors import ConfigError
from .arena import ArenaState
from .key import ProtectionKeyHandle
from .region import MemoryRegion


class DomainState(Enum):
    """Lifecycle states of an isolation domain."""
    initialized: str = "Initialized"
    active: str = "Active"
    faulted: str = "Faulted"
    retired: str = "Retired"

    def can_become(self, other: "DomainState") -> bool:
        return other in _TRANSITIONS[self]


_TRANSITIONS = {
    DomainState.initialized: {DomainState.active, DomainState.retired},
    DomainState.active: {DomainState.initialized, DomainState.faulted},
    # leaving faulted for initialized happens only through discard and rewind
    DomainState.faulted: {DomainState.initialized, DomainState.retired},
    DomainState.retired: set(),
}


@dataclass(frozen=True)
class DomainConfig:
    """
    Parameters of a new domain.

    Attributes
    ----------
    stack_bytes: int
        Size of the domain stack, rounded up to whole pages.
    arena_bytes: int
        Size of the domain heap, rounded up to whole pages.
    zero_fill: bool
        Zero the used part of the arena on every discard and reset.
    confidentiality: bool
        Deny reads of non-domain memory while the domain runs (integrity mode only denies writes).
    retain_heap: bool
        Keep successful calls' allocations instead of resetting the arena after each call.
    """
    stack_bytes: int = 256 * 1024
    arena_bytes: int = 16 * 1024 * 1024
    zero_fill: bool = True
    confidentiality: bool = False
    retain_heap: bool = False

    def __post_init__(self):
        if self.stack_bytes <= 0:
            raise ConfigError(f"stack_bytes must be positive, got {self.stack_bytes}")
        if self.arena_bytes <= 0:
            raise ConfigError(f"arena_bytes must be positive, got {self.arena_bytes}")


@dataclass(eq=False)
class DomainDescriptor:
    """
    Identity and memory of one isolation domain.

    Attributes
    ----------
    id: int
    key: rewind.models.ProtectionKeyHandle
        Key tagging both the stack and the arena.
    stack: rewind.models.MemoryRegion
    arena: rewind.models.ArenaState
    arena_region: rewind.models.MemoryRegion
    config: rewind.models.DomainConfig
    canary: int
        Guard word planted at both ends of the stack; never 0.
    parent: int, optional
        Domain that was active on the creating thread, if any.
    state: rewind.models.DomainState
    executions: int
    violations: int
    """
    id: int
    key: ProtectionKeyHandle
    stack: MemoryRegion
    arena: ArenaState
    arena_region: MemoryRegion
    config: DomainConfig
    canary: int
    parent: Optional[int] = None
    state: DomainState = DomainState.initialized
    executions: int = 0
    violations: int = 0
    entry_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
