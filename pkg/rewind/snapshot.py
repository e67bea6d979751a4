"""
Execution snapshots at domain-call boundaries and the rewind transfer back to them.

A snapshot has two returns. `resume_point` runs the body on the normal path; a `rewind_to` issued while the
body runs unwinds the body and lands back in `resume_point` on the recovery path.
"""

import itertools
import threading
import time
from typing import Any, Callable, Dict, Optional

from loguru import logger

from .errors import StaleSnapshot
from .models import (DomainDescriptor, ExecutionSnapshot, Landing, LatencyStats, Path, SavedContext,
                     ViolationReport)

_epochs = itertools.count(1)
_live: Dict[int, ExecutionSnapshot] = {}
_slots: Dict[int, "PendingSlot"] = {}


class PendingSlot:
    """Per-thread record of the violation being delivered, allocated before any domain code runs."""
    __slots__ = ("epoch", "report")

    def __init__(self) -> None:
        self.epoch = 0
        self.report = None

    def clear(self) -> None:
        self.epoch = 0
        self.report = None


class RewindTransfer(BaseException):
    """Unwinds domain code up to the boundary whose snapshot carries `epoch`."""

    def __init__(self, epoch: int) -> None:
        super().__init__(epoch)
        self.epoch = epoch


def pending_slot(thread_id: Optional[int] = None) -> PendingSlot:
    thread_id = threading.get_ident() if thread_id is None else thread_id
    slot = _slots.get(thread_id)
    if slot is None:
        slot = _slots.setdefault(thread_id, PendingSlot())
    return slot


def forget_slot(thread_id: Optional[int] = None) -> None:
    """Drops the thread's pending slot unless a violation is being delivered through it."""
    thread_id = threading.get_ident() if thread_id is None else thread_id
    slot = _slots.get(thread_id)
    if slot is not None and slot.epoch == 0:
        del _slots[thread_id]


def snapshot_capture(domain: DomainDescriptor, context: SavedContext) -> ExecutionSnapshot:
    """
    Records the rewind target for the next execution of `domain` and makes it the domain's live snapshot.

    Parameters
    ----------
    domain: rewind.models.DomainDescriptor
    context: rewind.models.SavedContext
        Caller state to restore after a rewind.

    Returns
    -------
    snapshot: rewind.models.ExecutionSnapshot
    """
    pending_slot(context.thread_id)
    snapshot = ExecutionSnapshot(context=context, domain_id=domain.id, epoch=next(_epochs))
    _live[domain.id] = snapshot
    logger.debug(f"snapshot {snapshot.epoch} captured for domain {domain.id}")
    return snapshot


def snapshot_release(snapshot: ExecutionSnapshot) -> None:
    """Invalidates `snapshot` once its boundary has been left."""
    snapshot.valid = False
    if _live.get(snapshot.domain_id) is snapshot:
        del _live[snapshot.domain_id]


def live_snapshot(domain_id: int) -> Optional[ExecutionSnapshot]:
    return _live.get(domain_id)


def resume_point(snapshot: ExecutionSnapshot, body: Callable[[], Any]) -> Landing:
    """
    Runs `body` under `snapshot`.

    Returns
    -------
    landing: rewind.models.Landing
        On the normal path it carries the body's return value. On the recovery path it carries the
        report given to `rewind_to`, including when domain code swallowed the transfer.
    """
    slot = pending_slot(snapshot.context.thread_id)
    try:
        value = body()
    except RewindTransfer as transfer:
        if transfer.epoch != snapshot.epoch:
            raise
        report = slot.report
        slot.clear()
        return Landing(Path.recovery, report=report)

    if slot.epoch == snapshot.epoch:
        report = slot.report
        slot.clear()
        return Landing(Path.recovery, report=report)

    return Landing(Path.normal, value=value)


def rewind_to(snapshot: ExecutionSnapshot, report: ViolationReport) -> None:
    """
    Transfers control back to the recovery path of `snapshot`. Does not return.

    Runs on the fault path: no logging, no locks.

    Raises
    ------
    rewind.errors.StaleSnapshot: after escalation, when the snapshot is not the live one of its domain.
    """
    slot = pending_slot(snapshot.context.thread_id)
    if not snapshot.valid or _live.get(snapshot.domain_id) is not snapshot:
        if slot.epoch == snapshot.epoch:
            # a fault while already unwinding to this boundary
            raise RewindTransfer(snapshot.epoch)
        from .monitor import escalate
        error = StaleSnapshot(f"Snapshot epoch {snapshot.epoch} of domain {snapshot.domain_id} is not live")
        escalate(error)
        raise error

    snapshot.valid = False
    slot.report = report
    slot.epoch = snapshot.epoch
    raise RewindTransfer(snapshot.epoch)


def measure_rewind_cycle(iterations: int, manager=None) -> LatencyStats:
    """
    Times complete abort-and-rewind cycles through a domain.

    Parameters
    ----------
    iterations: int
        Number of cycles, at least 1.
    manager: rewind.domains.DomainManager, optional
        Defaults to the process-wide manager.

    Returns
    -------
    stats: rewind.models.LatencyStats
    """
    assert iterations >= 1
    from .domains import current_context, get_manager
    from .marshal import marshal_call

    def abort_entry():
        current_context().abort(1)

    manager = manager or get_manager()
    domain = manager.domain_create()
    call = marshal_call("rewind-cycle", ())
    samples = []
    logger.disable("rewind")
    try:
        for _ in range(iterations):
            start = time.perf_counter_ns()
            outcome = manager.domain_execute(domain, abort_entry, call)
            samples.append(time.perf_counter_ns() - start)
            assert not outcome.completed
    finally:
        logger.enable("rewind")
        manager.domain_destroy(domain)

    return LatencyStats.from_samples(samples)
