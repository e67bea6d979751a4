import math

import numpy as np
import pytest

from rewind.availability import (availability, downtime_budget, format_duration, meets_target, nines,
                                 recovery_budget, replica_model, replicas_needed)
from rewind.errors import DomainError
from rewind.models import AvailabilityModel
from tests.helpers import deterministic_test

FIVE_NINES = 0.99999


@pytest.mark.unit
def test_rewind_recovery_budget_for_five_nines():
    assert recovery_budget(FIVE_NINES, 3.5e-6) == 90102857


@pytest.mark.unit
def test_restart_recovery_budget_for_five_nines():
    assert recovery_budget(FIVE_NINES, 120) == 2


@pytest.mark.unit
def test_five_nines_downtime_budget():
    assert downtime_budget(FIVE_NINES) == pytest.approx(315.36, abs=1e-9)


@pytest.mark.unit
def test_three_restarts_miss_five_nines():
    model = AvailabilityModel(faults_per_year=3, recovery_seconds=120, target_availability=FIVE_NINES)

    assert availability(model) == pytest.approx(0.99998858, abs=1e-8)
    assert availability(model) < FIVE_NINES
    assert not meets_target(model)


@pytest.mark.unit
def test_budget_boundary_is_exact():
    assert meets_target(AvailabilityModel(2, 120, FIVE_NINES))
    assert not meets_target(AvailabilityModel(3, 120, FIVE_NINES))


@pytest.mark.unit
def test_availability_is_floored_at_zero():
    assert availability(AvailabilityModel(faults_per_year=1e9, recovery_seconds=1)) == 0.0


@pytest.mark.unit
def test_no_faults_means_full_availability():
    assert availability(AvailabilityModel(0, 120)) == 1.0
    assert nines(1.0) == math.inf


@pytest.mark.unit
@pytest.mark.parametrize("target, recovery", [(1.0, 1), (-0.5, 1), (FIVE_NINES, 0), (FIVE_NINES, -1)])
def test_recovery_budget_domain_errors(target, recovery):
    with pytest.raises(DomainError):
        recovery_budget(target, recovery)


@pytest.mark.unit
def test_two_replicas_of_ninety_percent():
    assert replica_model(0.9, 2) == pytest.approx(0.99)
    assert replica_model(0.9, 1) == pytest.approx(0.9)


@pytest.mark.unit
def test_replicas_needed_for_restart_and_rewind():
    restart = availability(AvailabilityModel(3, 120))
    rewind = availability(AvailabilityModel(3, 3.5e-6))

    assert replicas_needed(restart, FIVE_NINES) == 2
    assert replicas_needed(rewind, FIVE_NINES) == 1


@pytest.mark.unit
def test_unreachable_target_raises():
    with pytest.raises(DomainError):
        replicas_needed(0.0, FIVE_NINES)
    with pytest.raises(DomainError):
        replica_model(0.9, 0)


@pytest.mark.unit
@pytest.mark.parametrize("value, expected", [(0.9, 1.0), (0.99, 2.0), (FIVE_NINES, 5.0), (0.0, 0.0)])
def test_nines(value, expected):
    assert nines(value) == pytest.approx(expected)


@pytest.mark.unit
@pytest.mark.parametrize("seconds, expected", [
    (0, "0s"),
    (3.5e-6, "3.5µs"),
    (2.5e-9, "2.5ns"),
    (0.0125, "12.5ms"),
    (1.5, "1.5s"),
    (315.36, "5m 15s"),
    (93784, "1d 2h 3m 4s"),
])
def test_format_duration(seconds, expected):
    assert format_duration(seconds) == expected


@pytest.mark.unit
@deterministic_test(seed=11)
def test_budget_is_the_largest_fault_count_meeting_the_target():
    for _ in range(500):
        target = float(1 - 10 ** -np.random.uniform(1, 7))
        recovery = float(10 ** np.random.uniform(-7, 3))
        budget = recovery_budget(target, recovery)

        assert meets_target(AvailabilityModel(budget, recovery, target))
        assert not meets_target(AvailabilityModel(budget + 1, recovery, target))
