import pytest

from rewind import monitor
from rewind.bench import bench_overhead, bench_rewind_vs_restart, run_attack_demo
from rewind.config import MIB
from rewind.domains import DomainManager, set_manager
from rewind.snapshot import measure_rewind_cycle
from tests.helpers import make_backend, make_settings


@pytest.fixture
def default_manager():
    yield
    previous = set_manager(None)
    if previous is not None:
        previous.close()
    monitor.monitor_uninstall()


def cycle_stats(backend_name: str, iterations: int):
    manager = DomainManager(make_backend(backend_name), make_settings(backend_name))
    try:
        return measure_rewind_cycle(iterations, manager)
    finally:
        manager.close()
        monitor.monitor_uninstall()


@pytest.mark.integration
@pytest.mark.slow
def test_hardware_rewind_cycle_stays_within_35_microseconds():
    stats = cycle_stats("hardware", 10 ** 5)

    assert stats.samples == 10 ** 5
    assert stats.mean <= 35_000


@pytest.mark.integration
@pytest.mark.slow
def test_portable_rewind_cycle_is_not_faster_than_hardware():
    hardware = cycle_stats("hardware", 10 ** 4)
    portable = cycle_stats("portable", 10 ** 4)

    assert portable.samples == 10 ** 4
    assert portable.p50 >= hardware.p50


@pytest.mark.integration
@pytest.mark.slow
def test_rewind_recovers_a_thousand_times_faster_than_restart(default_manager):
    comparison = bench_rewind_vs_restart(dataset_bytes=100 * MIB, samples=3, rewind_iterations=1000)

    assert comparison.rewind.latency.samples == 1000
    assert comparison.ratio >= 1e3


@pytest.mark.integration
@pytest.mark.slow
def test_persistent_guard_costs_at_most_fifteen_percent_throughput():
    report = bench_overhead(duration=5.0, clients=4, read_ratio=0.9, guard_mode="persistent")

    assert report.candidate.requests > 0 and report.baseline.requests > 0
    assert report.overhead <= 0.15


@pytest.mark.integration
@pytest.mark.slow
def test_honest_client_is_unaffected_by_one_hundred_handler_crashes():
    report = run_attack_demo(attack_requests=100, honest_requests=10 ** 4)

    assert report.honest_errors == 0
    assert report.rewinds == 100
    assert report.pid_before == report.pid_after
    assert report.survived
