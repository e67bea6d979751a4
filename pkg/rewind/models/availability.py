from dataclasses import dataclass

from ..errors import DomainError

SECONDS_PER_YEAR = 365 * 24 * 60 * 60


@dataclass(frozen=True)
class AvailabilityModel:
    """
    Downtime-fraction availability model.

    Attributes
    ----------
    faults_per_year: float
    recovery_seconds: float
        Service interruption caused by one fault.
    target_availability: float
        Fraction in [0, 1).
    seconds_per_year: int
        Fixed at 365 days.
    """
    faults_per_year: float
    recovery_seconds: float
    target_availability: float = 0.99999
    seconds_per_year: int = SECONDS_PER_YEAR

    def __post_init__(self):
        if self.faults_per_year < 0:
            raise DomainError(f"faults_per_year must be >= 0, got {self.faults_per_year}")
        if self.recovery_seconds < 0:
            raise DomainError(f"recovery_seconds must be >= 0, got {self.recovery_seconds}")
        if not 0 <= self.target_availability < 1:
            raise DomainError(f"target_availability must lie in [0, 1), got {self.target_availability}")
