"""
Downtime-fraction availability arithmetic.

Inputs are converted to `decimal.Decimal` from their shortest decimal representation, so comparisons
against targets such as 0.99999 are exact instead of depending on binary rounding.
"""

import math
from decimal import ROUND_FLOOR, Decimal, localcontext
from typing import Union

from .errors import DomainError
from .models import SECONDS_PER_YEAR, AvailabilityModel

Number = Union[int, float, Decimal]

PRECISION = 60


def _exact(value: Number) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(value)


def availability_exact(model: AvailabilityModel) -> Decimal:
    with localcontext() as context:
        context.prec = PRECISION
        downtime = _exact(model.faults_per_year) * _exact(model.recovery_seconds)
        return max(Decimal(1) - downtime / Decimal(model.seconds_per_year), Decimal(0))


def availability(model: AvailabilityModel) -> float:
    """
    Fraction of the year the service is up: ``1 - faults * recovery / seconds_per_year``, floored at 0.

    Parameters
    ----------
    model: rewind.models.AvailabilityModel

    Returns
    -------
    availability: float
    """
    return float(availability_exact(model))


def meets_target(model: AvailabilityModel) -> bool:
    """Tells whether the model's availability reaches its target, compared exactly."""
    return availability_exact(model) >= _exact(model.target_availability)


def recovery_budget(target_availability: Number, recovery_seconds: Number,
                    seconds_per_year: int = SECONDS_PER_YEAR) -> int:
    """
    Largest number of recoveries per year that keeps the target availability.

    Parameters
    ----------
    target_availability: float
        Fraction in [0, 1).
    recovery_seconds: float
        Positive duration of one recovery.
    seconds_per_year: int

    Returns
    -------
    recoveries: int
        ``floor((1 - target) * seconds_per_year / recovery_seconds)``

    Raises
    ------
    rewind.errors.DomainError: if `recovery_seconds` <= 0 or the target lies outside [0, 1).
    """
    target, recovery = _exact(target_availability), _exact(recovery_seconds)
    if recovery <= 0:
        raise DomainError(f"recovery_seconds must be positive, got {recovery_seconds}")
    if not 0 <= target < 1:
        raise DomainError(f"target_availability must lie in [0, 1), got {target_availability}")

    with localcontext() as context:
        context.prec = PRECISION
        budget = (Decimal(1) - target) * Decimal(seconds_per_year) / recovery
        return int(budget.to_integral_value(rounding=ROUND_FLOOR))


def downtime_budget(target_availability: Number, seconds_per_year: int = SECONDS_PER_YEAR) -> float:
    """Seconds of downtime per year allowed by the target (five nines: 315.36 s)."""
    target = _exact(target_availability)
    if not 0 <= target <= 1:
        raise DomainError(f"target_availability must lie in [0, 1], got {target_availability}")
    with localcontext() as context:
        context.prec = PRECISION
        return float((Decimal(1) - target) * Decimal(seconds_per_year))


def replica_model(single_node_availability: Number, replicas: int) -> float:
    """
    Availability of `replicas` independently failing nodes of which one suffices: ``1 - (1 - A) ** replicas``.

    Raises
    ------
    rewind.errors.DomainError: if `replicas` < 1 or A lies outside [0, 1].
    """
    return float(_replica_exact(_exact(single_node_availability), replicas))


def _replica_exact(single: Decimal, replicas: int) -> Decimal:
    if replicas < 1:
        raise DomainError(f"replicas must be >= 1, got {replicas}")
    if not 0 <= single <= 1:
        raise DomainError(f"single_node_availability must lie in [0, 1], got {single}")
    with localcontext() as context:
        context.prec = PRECISION
        return Decimal(1) - (Decimal(1) - single) ** replicas


def replicas_needed(single_node_availability: Number, target_availability: Number, limit: int = 16) -> int:
    """
    Smallest number of replicas whose combined availability reaches the target.

    Returns
    -------
    replicas: int

    Raises
    ------
    rewind.errors.DomainError: if the target is not reached with `limit` replicas.
    """
    single, target = _exact(single_node_availability), _exact(target_availability)
    for replicas in range(1, limit + 1):
        if _replica_exact(single, replicas) >= target:
            return replicas
    raise DomainError(f"{limit} replicas of availability {single_node_availability} do not reach "
                      f"{target_availability}")


def nines(value: Number) -> float:
    """Number of nines of an availability, e.g. 0.99999 gives 5.0; infinite for 1."""
    exact = _exact(value)
    if exact >= 1:
        return math.inf
    if exact < 0:
        raise DomainError(f"availability must be >= 0, got {value}")
    with localcontext() as context:
        context.prec = PRECISION
        return float(-(Decimal(1) - exact).log10())


def format_duration(seconds: float) -> str:
    """Human-readable duration, from nanoseconds to days."""
    if seconds < 0:
        return "-" + format_duration(-seconds)
    if seconds == 0:
        return "0s"
    for limit, unit, scale in ((1e-6, "ns", 1e9), (1e-3, "µs", 1e6), (1, "ms", 1e3)):
        if seconds < limit:
            return f"{seconds * scale:.3g}{unit}"
    if seconds < 60:
        return f"{seconds:.3g}s"

    parts = []
    remaining = int(round(seconds))
    for unit, size in (("d", 86400), ("h", 3600), ("m", 60), ("s", 1)):
        count, remaining = divmod(remaining, size)
        if count:
            parts.append(f"{count}{unit}")
    return " ".join(parts)
