import fire
from loguru import logger

from ..bench import bench_overhead, bench_rewind_vs_restart
from ..reporting import emit
from . import configure_logging


def bench_recovery(dataset_bytes: int = 0, samples: int = 5, rewind_iterations: int = 1000,
                   pretty: bool = False) -> None:
    """
    Measures recovery by process restart against recovery by rewind.

    Parameters
    ----------
    dataset_bytes: int
        Data the restarted service loads before answering.
    samples: int
        Number of restarts.
    rewind_iterations: int
        Number of rewind cycles.
    pretty: bool
        Print tables instead of JSON lines.
    """
    comparison = bench_rewind_vs_restart(dataset_bytes, samples, rewind_iterations)
    emit([comparison.restart.serialize(), comparison.rewind.serialize(), comparison.serialize()], pretty)


def bench_service_overhead(duration: float = 5.0, clients: int = 4, read_ratio: float = 0.9,
                           guard_mode: str = "persistent", baseline: str = "off", pretty: bool = False) -> None:
    """
    Measures the throughput cost of guarding the key-value service.

    Parameters
    ----------
    duration: float
        Seconds of load per configuration.
    clients: int
        Concurrent client connections.
    read_ratio: float
        Share of GET requests.
    guard_mode: str
        per-call, persistent or off.
    baseline: str
        Configuration to compare against.
    pretty: bool
    """
    report = bench_overhead(duration, clients, read_ratio, guard_mode, baseline)
    emit([report.baseline.serialize(), report.candidate.serialize(), report.serialize()], pretty)


COMMANDS = {
    "recovery": bench_recovery,
    "overhead": bench_service_overhead,
}


@logger.catch
def main():
    configure_logging()
    fire.Fire(COMMANDS)


if __name__ == "__main__":
    main()
