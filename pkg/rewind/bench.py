import os
import random
import subprocess
import sys
import threading
import time
from contextlib import contextmanager
from typing import List, Optional

from loguru import logger

from .domains import get_manager
from .errors import KvResponseError
from .kv import KvClient, KvServer
from .models import (AttackReport, BenchReport, LatencyStats, OverheadReport, RecoveryComparison,
                     ThroughputReport)
from .snapshot import measure_rewind_cycle

SPAWN_TIMEOUT_S = 120.0


class ServerProcess:
    """Key-value service running in a child interpreter."""

    def __init__(self, process: subprocess.Popen, host: str, port: int) -> None:
        self.process = process
        self.host = host
        self.port = port

    @property
    def pid(self) -> int:
        return self.process.pid

    def client(self, timeout: float = 10.0) -> KvClient:
        return KvClient(self.host, self.port, timeout)

    def stop(self) -> int:
        if self.process.poll() is None:
            self.process.terminate()
            try:
                self.process.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.process.kill()
                self.process.wait()
        self.process.stdout.close()
        return self.process.returncode


def start_server(*flags: str, log_level: str = "ERROR") -> ServerProcess:
    """
    Spawns ``rewind-kv`` on an ephemeral port and waits for its ``LISTENING`` line.

    Raises
    ------
    RuntimeError: if the child exits or stays silent.
    """
    env = dict(os.environ, REWIND_LOG_LEVEL=log_level)
    command = [sys.executable, "-m", "rewind.cli.serve", "--listen", "127.0.0.1:0", *flags]
    process = subprocess.Popen(command, stdout=subprocess.PIPE, env=env)

    line = process.stdout.readline().decode("utf-8", "replace").strip()
    if not line.startswith("LISTENING "):
        process.kill()
        process.wait()
        process.stdout.close()
        raise RuntimeError(f"{' '.join(command)} did not start (exit {process.returncode}): {line!r}")

    host, _, port = line.split(" ", 1)[1].rpartition(":")
    return ServerProcess(process, host, int(port))


@contextmanager
def running_server(*flags: str, log_level: str = "ERROR"):
    server = start_server(*flags, log_level=log_level)
    try:
        yield server
    finally:
        server.stop()


def bench_rewind_vs_restart(dataset_bytes: int = 0, samples: int = 5,
                            rewind_iterations: Optional[int] = None) -> RecoveryComparison:
    """
    Compares recovering by process restart with recovering by rewind.

    Parameters
    ----------
    dataset_bytes: int
        Data loaded by the service before it can answer.
    samples: int
        Restarts measured.
    rewind_iterations: int, optional
        Rewind cycles measured, defaults to `samples`.

    Returns
    -------
    comparison: rewind.models.RecoveryComparison
    """
    assert samples >= 1

    restarts = []
    for index in range(samples):
        start = time.perf_counter_ns()
        with running_server("--preload-bytes", str(dataset_bytes)) as server:
            with server.client(timeout=SPAWN_TIMEOUT_S) as client:
                client.get("key:0")
            restarts.append(time.perf_counter_ns() - start)
        logger.info(f"restart {index + 1}/{samples}: {restarts[-1] / 1e6:.1f} ms")

    manager = get_manager()
    loaded = KvServer(("127.0.0.1", 0), guarded=False)
    try:
        loaded.preload(dataset_bytes)
        rewind_stats = measure_rewind_cycle(rewind_iterations or samples, manager)
    finally:
        loaded.server_close()

    backend = manager.backend.name
    return RecoveryComparison(
        restart=BenchReport("restart", LatencyStats.from_samples(restarts), dataset_bytes, backend),
        rewind=BenchReport("rewind", rewind_stats, dataset_bytes, backend))


def _workload(server: ServerProcess, seed: int, read_ratio: float, deadline: float, latencies: List[int],
              keys: int = 100, value_bytes: int = 100) -> int:
    rng = random.Random(seed)
    value = bytes(value_bytes)
    completed = 0
    with server.client() as client:
        for index in range(keys):
            client.set(f"bench:{index}", value)
        while time.perf_counter() < deadline:
            key = f"bench:{rng.randrange(keys)}"
            start = time.perf_counter_ns()
            if rng.random() < read_ratio:
                client.get(key)
            else:
                client.set(key, value)
            latencies.append(time.perf_counter_ns() - start)
            completed += 1
    return completed


def measure_throughput(guard_mode: str, duration: float, clients: int, read_ratio: float,
                       seed: int = 0) -> ThroughputReport:
    """Drives a GET/SET mix from `clients` connections against one freshly spawned service."""
    flags = ("--no-guard",) if guard_mode == "off" else ("--guard-mode", guard_mode)
    with running_server(*flags) as server:
        deadline = time.perf_counter() + duration
        counts = [0] * clients
        latencies: List[List[int]] = [[] for _ in range(clients)]

        def run(index: int) -> None:
            counts[index] = _workload(server, seed + index, read_ratio, deadline, latencies[index])

        threads = [threading.Thread(target=run, args=(index,)) for index in range(clients)]
        start = time.perf_counter()
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        elapsed = time.perf_counter() - start

    merged = [sample for samples in latencies for sample in samples]
    logger.info(f"{guard_mode}: {sum(counts)} requests in {elapsed:.2f} s")
    return ThroughputReport(guard_mode, sum(counts), elapsed, LatencyStats.from_samples(merged or [0]))


def bench_overhead(duration: float = 5.0, clients: int = 4, read_ratio: float = 0.9,
                   guard_mode: str = "persistent", baseline: str = "off") -> OverheadReport:
    """
    Relative throughput loss of a guarded service against a baseline configuration.

    Parameters
    ----------
    duration: float
        Seconds of load per configuration.
    clients: int
        Concurrent connections.
    read_ratio: float
        Share of GET requests.
    guard_mode: str
        per-call, persistent or off.
    baseline: str
        Configuration compared against, off by default.

    Returns
    -------
    report: rewind.models.OverheadReport
    """
    assert duration > 0 and clients >= 1 and 0 <= read_ratio <= 1
    baseline_report = measure_throughput(baseline, duration, clients, read_ratio)
    candidate_report = measure_throughput(guard_mode, duration, clients, read_ratio)
    return OverheadReport(candidate=candidate_report, baseline=baseline_report)


def run_attack_demo(attack_requests: int = 100, honest_requests: int = 10000,
                    guard_mode: str = "persistent", seed: int = 0) -> AttackReport:
    """
    A malicious client crashes request handlers while an honest client keeps using the service.

    Every honest response is checked against a reference map.

    Returns
    -------
    report: rewind.models.AttackReport
    """
    with running_server("--guard-mode", guard_mode) as server:
        with server.client() as observer:
            pid_before = int(observer.stats()["pid"])

        honest_errors = [0]

        def honest() -> None:
            rng = random.Random(seed)
            reference = {}
            with server.client() as client:
                for index in range(honest_requests):
                    key = f"honest:{rng.randrange(64)}"
                    try:
                        if rng.random() < 0.5:
                            value = f"{index}".encode()
                            client.set(key, value)
                            reference[key] = value
                        elif client.get(key) != reference.get(key):
                            honest_errors[0] += 1
                    except (KvResponseError, ConnectionError, OSError):
                        honest_errors[0] += 1

        def attacker() -> None:
            with server.client() as client:
                for index in range(attack_requests):
                    response = client.crashme(f"evil:{index}")
                    if response != "SERVER_ERROR recovered":
                        logger.error(f"unexpected CRASHME response {response!r}")

        threads = [threading.Thread(target=honest), threading.Thread(target=attacker)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        with server.client() as observer:
            stats = observer.stats()

    return AttackReport(honest_requests=honest_requests, honest_errors=honest_errors[0],
                        attack_requests=attack_requests, rewinds=int(stats["rewinds"]),
                        pid_before=pid_before, pid_after=int(stats["pid"]))
