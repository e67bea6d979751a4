from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from ..errors import ConfigError
from .domain import DomainConfig


class DomainMode(Enum):
    """How a guarded function obtains its domain."""
    per_call: str = "per-call"
    persistent: str = "persistent"


class OnViolation(Enum):
    """Alternate action taken when a guarded call is rewound."""
    return_error: str = "return-error"
    fallback_value: str = "fallback-value"
    retry_then_error: str = "retry-then-error"


@dataclass(frozen=True)
class GuardPolicy:
    """
    Execution and recovery policy of a guarded function.

    Attributes
    ----------
    domain_mode: rewind.models.DomainMode
    on_violation: rewind.models.OnViolation
    retry_limit: int
        Extra executions after the first one; only meaningful with retry_then_error.
    stack_bytes: int
    arena_bytes: int
    confidentiality: bool
    fallback: callable, optional
        Producer of the fallback value. Receives the call arguments and runs outside the domain.
    retain_heap: bool
        Persistent mode only: keep the arena contents between successful calls.
    zero_fill: bool
    """
    domain_mode: DomainMode = DomainMode.per_call
    on_violation: OnViolation = OnViolation.return_error
    retry_limit: int = 0
    stack_bytes: int = DomainConfig.stack_bytes
    arena_bytes: int = DomainConfig.arena_bytes
    confidentiality: bool = False
    fallback: Optional[Callable] = None
    retain_heap: bool = False
    zero_fill: bool = True

    def __post_init__(self):
        # accept the textual forms used on command lines
        object.__setattr__(self, "domain_mode", DomainMode(self.domain_mode))
        object.__setattr__(self, "on_violation", OnViolation(self.on_violation))

        if self.retry_limit < 0:
            raise ConfigError(f"retry_limit must be >= 0, got {self.retry_limit}")
        if self.retry_limit > 0 and self.on_violation is not OnViolation.retry_then_error:
            raise ConfigError("retry_limit > 0 requires on_violation=retry-then-error")
        if self.on_violation is OnViolation.fallback_value and self.fallback is None:
            raise ConfigError("on_violation=fallback-value requires a fallback producer")

    def domain_config(self) -> DomainConfig:
        return DomainConfig(stack_bytes=self.stack_bytes, arena_bytes=self.arena_bytes, zero_fill=self.zero_fill,
                            confidentiality=self.confidentiality, retain_heap=self.retain_heap)
