from dataclasses import dataclass

from .violation import ViolationReport


class DomainOutcome:
    """Result of one domain execution: either Completed or Violated."""

    @property
    def completed(self) -> bool:
        return isinstance(self, Completed)


@dataclass(frozen=True)
class Completed(DomainOutcome):
    """The entry returned normally; `payload` is the marshalled return value."""
    payload: bytes


@dataclass(frozen=True)
class Violated(DomainOutcome):
    """The entry was rewound after a memory violation."""
    report: ViolationReport
