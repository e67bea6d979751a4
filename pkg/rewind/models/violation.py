from dataclasses import dataclass
from enum import Enum
from typing import Optional


class ViolationKind(Enum):
    """Sources of a detected memory violation."""
    protection_fault: str = "protection-fault"
    canary_mismatch: str = "canary-mismatch"
    explicit_abort: str = "explicit-abort"
    corrupt_result: str = "corrupt-result"


class AccessType(Enum):
    load: str = "load"
    store: str = "store"


@dataclass(frozen=True)
class FaultInfo:
    """Raw description of a refused access, as delivered to the monitor."""
    address: int
    access_type: AccessType
    thread_id: int


@dataclass(frozen=True)
class ViolationReport:
    """
    Classified memory violation.

    Attributes
    ----------
    kind: rewind.models.ViolationKind
    domain_id: int
        Domain active on `thread_id` when the violation was detected.
    thread_id: int
    timestamp: int
        Monotonic clock reading in nanoseconds.
    faulting_address: int, optional
        Present for protection faults only.
    reason: int
        Code passed to an explicit abort, 0 otherwise.
    """
    kind: ViolationKind
    domain_id: int
    thread_id: int
    timestamp: int
    faulting_address: Optional[int] = None
    reason: int = 0

    def __post_init__(self):
        assert (self.faulting_address is not None) == (self.kind is ViolationKind.protection_fault)

    def serialize(self) -> dict:
        return {
            "kind": self.kind.value,
            "domain_id": self.domain_id,
            "thread_id": self.thread_id,
            "timestamp": self.timestamp,
            "faulting_address": self.faulting_address,
            "reason": self.reason,
        }
