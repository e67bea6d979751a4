import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class LatencyStats:
    """Latency distribution in nanoseconds."""
    samples: int
    p50: float
    p99: float
    mean: float
    min: float
    max: float

    @staticmethod
    def from_samples(samples_ns: Sequence[int]) -> "LatencyStats":
        """
        Summarises raw latency samples.

        Parameters
        ----------
        samples_ns: sequence of int
            At least one sample, in nanoseconds.

        Returns
        -------
        stats: rewind.models.LatencyStats
        """
        assert len(samples_ns) > 0

        values = np.asarray(samples_ns, dtype=np.float64)
        p50, p99 = np.percentile(values, [50, 99])
        return LatencyStats(samples=int(values.size), p50=float(p50), p99=float(p99), mean=float(values.mean()),
                            min=float(values.min()), max=float(values.max()))


def _machine_note() -> str:
    return f"{platform.node()} {platform.machine()} {platform.python_implementation()} {platform.python_version()}"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class BenchReport:
    """
    Measurement of one benchmark scenario.

    Attributes
    ----------
    scenario: str
    latency: rewind.models.LatencyStats
    dataset_bytes: int
    backend: str
    machine: str
    timestamp: str
        ISO-8601 UTC time of the report.
    """
    scenario: str
    latency: LatencyStats
    dataset_bytes: int
    backend: str = ""
    machine: str = field(default_factory=_machine_note)
    timestamp: str = field(default_factory=_now)

    def __post_init__(self):
        assert self.latency.samples >= 1
        assert self.latency.p50 <= self.latency.p99

    def serialize(self) -> dict:
        """
        Serializes this report into a dict with a fixed key order.

        Returns
        -------
        serializable_dict: dict
        """
        return {
            "report": "bench",
            "scenario": self.scenario,
            "samples": self.latency.samples,
            "p50_ns": self.latency.p50,
            "p99_ns": self.latency.p99,
            "mean_ns": self.latency.mean,
            "dataset_bytes": self.dataset_bytes,
            "backend": self.backend,
            "machine": self.machine,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class RecoveryComparison:
    """Recovery by process restart against recovery by rewind on the same dataset."""
    restart: BenchReport
    rewind: BenchReport

    @property
    def ratio(self) -> float:
        return self.restart.latency.mean / self.rewind.latency.mean

    def serialize(self) -> dict:
        return {
            "report": "recovery-ratio",
            "restart_mean_ns": self.restart.latency.mean,
            "rewind_mean_ns": self.rewind.latency.mean,
            "ratio": self.ratio,
            "dataset_bytes": self.restart.dataset_bytes,
        }


@dataclass(frozen=True)
class ThroughputReport:
    """Requests completed by one service configuration under a fixed workload."""
    guard_mode: str
    requests: int
    duration_s: float
    latency: LatencyStats

    @property
    def throughput(self) -> float:
        return self.requests / self.duration_s

    def serialize(self) -> dict:
        return {
            "report": "throughput",
            "guard_mode": self.guard_mode,
            "requests": self.requests,
            "duration_s": self.duration_s,
            "throughput_rps": self.throughput,
            "p50_ns": self.latency.p50,
            "p99_ns": self.latency.p99,
        }


@dataclass(frozen=True)
class OverheadReport:
    """Throughput of a candidate configuration relative to a baseline."""
    candidate: ThroughputReport
    baseline: ThroughputReport

    @property
    def overhead(self) -> float:
        return 1.0 - self.candidate.throughput / self.baseline.throughput

    def serialize(self) -> dict:
        return {
            "report": "overhead",
            "candidate": self.candidate.guard_mode,
            "baseline": self.baseline.guard_mode,
            "candidate_rps": self.candidate.throughput,
            "baseline_rps": self.baseline.throughput,
            "overhead": self.overhead,
        }


@dataclass(frozen=True)
class AttackReport:
    """Outcome of a malicious client crashing request handlers next to an honest client."""
    honest_requests: int
    honest_errors: int
    attack_requests: int
    rewinds: int
    pid_before: int
    pid_after: int

    @property
    def survived(self) -> bool:
        return self.pid_before == self.pid_after and self.honest_errors == 0 and self.rewinds == self.attack_requests

    def serialize(self) -> dict:
        return {
            "report": "attack",
            "honest_requests": self.honest_requests,
            "honest_errors": self.honest_errors,
            "attack_requests": self.attack_requests,
            "rewinds": self.rewinds,
            "pid_before": self.pid_before,
            "pid_after": self.pid_after,
            "survived": self.survived,
        }
