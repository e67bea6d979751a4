from .access import AccessRights  # noqa:F401
from .arena import ArenaState  # noqa:F401
from .availability import AvailabilityModel, SECONDS_PER_YEAR  # noqa:F401
from .call import MarshalledCall, SCHEMA_TAG  # noqa:F401
from .command import KvCommand, Verb, MAX_KEY_LENGTH, MAX_VALUE_LENGTH  # noqa:F401
from .domain import DomainConfig, DomainDescriptor, DomainState  # noqa:F401
from .key import ProtectionKeyHandle, ROOT_KEY  # noqa:F401
from .outcome import DomainOutcome, Completed, Violated  # noqa:F401
from .policy import GuardPolicy, DomainMode, OnViolation  # noqa:F401
from .region import MemoryRegion, page_round_up  # noqa:F401
from .report import (AttackReport, BenchReport, LatencyStats, OverheadReport, RecoveryComparison,  # noqa:F401
                     ThroughputReport)
from .snapshot import ExecutionSnapshot, Landing, Path, SavedContext  # noqa:F401
from .violation import AccessType, FaultInfo, ViolationKind, ViolationReport  # noqa:F401
