"""
Interception and classification of memory violations.

The fault path (`deliver_fault`, `classify`, `rewind_to`) runs with a violation in flight: it does not log
and takes no locks. Logging happens on the recovery path once control has landed at the domain boundary.
"""

import faulthandler
import signal
import sys
import threading
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Union

from loguru import logger

from .errors import HandlerConflict, NoActiveDomain
from .models import DomainDescriptor, ExecutionSnapshot, FaultInfo, ViolationKind, ViolationReport
from .snapshot import rewind_to

CANARY_BYTES = 8


class _Escalate:
    def __repr__(self) -> str:
        return "ESCALATE"


ESCALATE = _Escalate()


@dataclass
class ActiveFrame:
    """One domain execution in progress on a thread."""
    domain: DomainDescriptor
    snapshot: ExecutionSnapshot
    context: Any = None


_frames: Dict[int, List[ActiveFrame]] = {}
_installed = False
_enabled_faulthandler = False


def monitor_install() -> None:
    """
    Arms violation interception for the process. Calling it again is a no-op.

    Raises
    ------
    rewind.errors.HandlerConflict: if a Python-level SIGSEGV handler is already installed.
    """
    global _installed, _enabled_faulthandler
    if _installed:
        return

    current = signal.getsignal(signal.SIGSEGV)
    if callable(current):
        logger.error(f"SIGSEGV handler {current!r} already installed, domains stay disarmed")
        raise HandlerConflict(f"A SIGSEGV handler is already installed: {current!r}")

    if not faulthandler.is_enabled():
        faulthandler.enable(file=sys.stderr, all_threads=True)
        _enabled_faulthandler = True

    _installed = True
    logger.debug("violation monitor installed")


def monitor_uninstall() -> None:
    """Restores the process state from before `monitor_install`."""
    global _installed, _enabled_faulthandler
    if _enabled_faulthandler:
        faulthandler.disable()
        _enabled_faulthandler = False
    _installed = False


def is_installed() -> bool:
    return _installed


def enter(frame: ActiveFrame) -> None:
    """Marks `frame.domain` as the innermost active domain of the calling thread."""
    thread_id = threading.get_ident()
    stack = _frames.get(thread_id)
    if stack is None:
        stack = _frames.setdefault(thread_id, [])
    stack.append(frame)


def leave() -> None:
    thread_id = threading.get_ident()
    stack = _frames[thread_id]
    stack.pop()
    if not stack:
        del _frames[thread_id]


def current_frame(thread_id: Optional[int] = None) -> Optional[ActiveFrame]:
    stack = _frames.get(threading.get_ident() if thread_id is None else thread_id)
    return stack[-1] if stack else None


def depth(thread_id: Optional[int] = None) -> int:
    """Number of domain executions nested on the thread."""
    return len(_frames.get(threading.get_ident() if thread_id is None else thread_id, ()))


def active_domain(thread_id: Optional[int] = None) -> Optional[int]:
    """Id of the innermost domain executing on `thread_id`, or None."""
    frame = current_frame(thread_id)
    return frame.domain.id if frame is not None else None


def active_domains(thread_id: Optional[int] = None) -> List[int]:
    """Ids of every domain executing on `thread_id`, outermost first."""
    return [frame.domain.id for frame in _frames.get(threading.get_ident() if thread_id is None else thread_id, ())]


def classify(fault_info: FaultInfo) -> Union[ViolationReport, _Escalate]:
    """
    Turns a refused access into a report against the domain active on the faulting thread.

    Returns
    -------
    report: rewind.models.ViolationReport or ESCALATE
        ESCALATE when no domain is active on the thread.
    """
    stack = _frames.get(fault_info.thread_id)
    if not stack:
        return ESCALATE
    return ViolationReport(kind=ViolationKind.protection_fault, domain_id=stack[-1].domain.id,
                           thread_id=fault_info.thread_id, timestamp=time.monotonic_ns(),
                           faulting_address=fault_info.address)


def deliver_fault(fault_info: FaultInfo) -> None:
    """Routes a refused access to the rewind of the active domain, or escalates. Does not return."""
    report = classify(fault_info)
    if report is ESCALATE:
        escalate(MemoryError(f"{fault_info.access_type.value} at {fault_info.address:#x} outside any domain"))
        return
    rewind_to(_frames[fault_info.thread_id][-1].snapshot, report)


def check_canary(domain: DomainDescriptor, space) -> Optional[ViolationReport]:
    """
    Compares the guard words at both ends of the domain stack with the planted value.

    Returns
    -------
    report: rewind.models.ViolationReport, optional
        None when both guard words are intact.
    """
    expected = domain.canary.to_bytes(CANARY_BYTES, "little")
    low = space.read(domain.stack.base, CANARY_BYTES)
    high = space.read(domain.stack.end - CANARY_BYTES, CANARY_BYTES)
    if low == expected and high == expected:
        return None
    return ViolationReport(kind=ViolationKind.canary_mismatch, domain_id=domain.id,
                           thread_id=threading.get_ident(), timestamp=time.monotonic_ns())


def raise_abort(reason: int = 0) -> None:
    """
    Rewinds the calling thread's innermost domain with an explicit-abort report. Does not return.

    Raises
    ------
    rewind.errors.NoActiveDomain: if no domain is executing on the calling thread.
    """
    thread_id = threading.get_ident()
    frame = current_frame(thread_id)
    if frame is None:
        raise NoActiveDomain("raise_abort called outside any domain")
    report = ViolationReport(kind=ViolationKind.explicit_abort, domain_id=frame.domain.id, thread_id=thread_id,
                             timestamp=time.monotonic_ns(), reason=reason)
    rewind_to(frame.snapshot, report)


def escalate(error: BaseException) -> None:
    """
    Hands a violation that cannot be rewound to the process-default fault handling.

    The traceback of every thread is dumped and SIGSEGV is delivered to the process. If a handler
    consumes the signal, `error` is raised.
    """
    logger.error(f"escalating: {error}")
    faulthandler.dump_traceback(file=sys.stderr, all_threads=True)
    signal.raise_signal(signal.SIGSEGV)
    raise error
