import itertools
import secrets
import threading
from typing import Callable, Dict, List, Optional

from loguru import logger

from . import monitor
from .allocator import arena_alloc, arena_reset, note_write
from .backends import IsolationBackend, select_backend
from .config import Settings, load_settings
from .errors import (BusyDomain, EntryRaised, IllegalState, NestingLimit, NoActiveDomain,
                     OversizedArgument)
from .marshal import copy_in, encode, quota_for, unmarshal_out
from .memory import AddressSpace
from .models import (AccessRights, AccessType, ArenaState, Completed, DomainConfig, DomainDescriptor,
                     DomainOutcome, DomainState, FaultInfo, MarshalledCall, Path, SavedContext, Violated)
from .monitor import CANARY_BYTES, ActiveFrame
from .snapshot import forget_slot, resume_point, snapshot_capture, snapshot_release

FRAME_ALIGN = 16


class _Raised:
    __slots__ = ("type_name", "message")

    def __init__(self, error: BaseException) -> None:
        self.type_name = type(error).__name__
        self.message = str(error)


def _new_canary() -> int:
    while True:
        canary = secrets.randbits(CANARY_BYTES * 8)
        if canary:
            return canary


class DomainContext:
    """
    Operations available to code running inside a domain.

    Loads and stores go through the checked access path, so an access the domain may not perform rewinds it
    instead of touching memory.
    """

    def __init__(self, manager: "DomainManager", domain: DomainDescriptor) -> None:
        self._space = manager.space
        self.domain = domain
        self._frames: List[int] = []
        self._sp = domain.stack.end - CANARY_BYTES

    @property
    def arena_base(self) -> int:
        return self.domain.arena.base

    @property
    def arena_end(self) -> int:
        return self.domain.arena.end

    @property
    def stack_pointer(self) -> int:
        return self._sp

    def alloc(self, size: int, align: int = 8) -> int:
        return arena_alloc(self.domain, size, align)

    def load(self, address: int, size: int) -> bytes:
        return self._space.checked_load(address, size)

    def store(self, address: int, data: bytes) -> None:
        self._space.checked_store(address, data)
        note_write(self.domain.arena, address, len(data))

    def push_frame(self, size: int) -> int:
        """
        Reserves `size` bytes on the domain stack, which grows downward.

        Returns
        -------
        address: int
            Lowest address of the new frame.
        """
        assert size > 0
        new_sp = (self._sp - size) & ~(FRAME_ALIGN - 1)
        if new_sp < self.domain.stack.base + CANARY_BYTES:
            monitor.deliver_fault(FaultInfo(new_sp, AccessType.store, threading.get_ident()))
        self._frames.append(self._sp)
        self._sp = new_sp
        return new_sp

    def pop_frame(self) -> None:
        self._sp = self._frames.pop()

    def abort(self, reason: int = 0) -> None:
        monitor.raise_abort(reason)


class DomainManager:
    """
    Owner of the address space, the domain table and the domain lifecycle.

    Parameters
    ----------
    backend: rewind.backends.IsolationBackend, optional
        Defaults to the backend selected by `settings`.
    settings: rewind.config.Settings, optional
        Defaults to the settings read from the environment.
    """

    def __init__(self, backend: Optional[IsolationBackend] = None, settings: Optional[Settings] = None) -> None:
        self.settings = settings or load_settings()
        self.backend = backend or select_backend(self.settings)
        self.space = AddressSpace(self.backend)
        self._lock = threading.Lock()
        self._domains: Dict[int, DomainDescriptor] = {}
        self._ids = itertools.count(1)

    def default_config(self) -> DomainConfig:
        return DomainConfig(stack_bytes=self.settings.stack_bytes, arena_bytes=self.settings.arena_bytes,
                            zero_fill=self.settings.zero_fill)

    def domains(self) -> List[DomainDescriptor]:
        return list(self._domains.values())

    def domain_create(self, config: Optional[DomainConfig] = None) -> DomainDescriptor:
        """
        Creates a domain with its own key, stack and arena.

        Parameters
        ----------
        config: rewind.models.DomainConfig, optional
            Defaults to the sizes of the manager settings.

        Returns
        -------
        domain: rewind.models.DomainDescriptor
            In state Initialized, stack and arena tagged with a fresh key, canary planted.

        Raises
        ------
        rewind.errors.KeyExhausted
        rewind.errors.OsRejected
        rewind.errors.HandlerConflict: if violation interception cannot be armed.
        """
        config = config or self.default_config()
        monitor.monitor_install()

        domain_id = next(self._ids)
        key = self.backend.acquire_key()
        try:
            stack, arena = self.space.map_reservation(config.stack_bytes, config.arena_bytes, owner=domain_id)
        except Exception:
            self.backend.release_key(key)
            raise

        try:
            self.space.tag(stack, key)
            self.space.tag(arena, key)
        except Exception:
            for region in (stack, arena):
                if self.backend.key_of(region) is not None:
                    self.space.untag(region)
            self.space.unmap(stack)
            self.backend.release_key(key)
            raise

        domain = DomainDescriptor(id=domain_id, key=key, stack=stack, arena=ArenaState(arena.base, arena.length),
                                  arena_region=arena, config=config, canary=_new_canary(),
                                  parent=monitor.active_domain())
        self._plant_canary(domain)
        with self._lock:
            self._domains[domain_id] = domain

        logger.debug(f"domain {domain_id} created with key {key.key_id}: stack {stack.length} B, "
                     f"arena {arena.length} B")
        return domain

    def domain_execute(self, domain: DomainDescriptor, entry: Callable, call: MarshalledCall) -> DomainOutcome:
        """
        Runs `entry` inside `domain` with the arguments encoded in `call`.

        Parameters
        ----------
        domain: rewind.models.DomainDescriptor
        entry: Callable
            Receives the decoded positional and keyword arguments.
        call: rewind.models.MarshalledCall

        Returns
        -------
        outcome: rewind.models.DomainOutcome
            Completed with the encoded return value, or Violated after the domain was discarded and
            execution rewound to this call.

        Raises
        ------
        rewind.errors.IllegalState: if the domain is not Initialized.
        rewind.errors.NestingLimit: if the thread already runs the maximum number of nested domains.
        rewind.errors.BusyDomain: if another thread is executing the domain.
        rewind.errors.OversizedArgument: if the payload exceeds half the arena.
        rewind.errors.EntryRaised: if `entry` raised an ordinary exception.
        """
        if not domain.entry_lock.acquire(blocking=False):
            if domain.id in monitor.active_domains():
                raise IllegalState(f"Domain {domain.id} is already active on this thread")
            raise BusyDomain(f"Domain {domain.id} is being executed by another thread")

        try:
            if domain.state is not DomainState.initialized:
                raise IllegalState(f"Domain {domain.id} is {domain.state.value}, expected Initialized")
            if monitor.depth() >= self.settings.max_nesting:
                raise NestingLimit(f"Thread already runs {monitor.depth()} nested domain(s), "
                                   f"limit is {self.settings.max_nesting}")
            if call.payload_len > quota_for(domain):
                raise OversizedArgument(f"Payload of {call.payload_len} bytes exceeds quota {quota_for(domain)}")
            return self._execute(domain, entry, call)
        finally:
            domain.entry_lock.release()

    def _execute(self, domain: DomainDescriptor, entry: Callable, call: MarshalledCall) -> DomainOutcome:
        backend, space = self.backend, self.space
        others = [other for other in self.domains() if other is not domain]

        saved_rights = backend.save_rights([domain.key.key_id] + [other.key.key_id for other in others])
        saved_untagged = space.untagged_rights()
        snapshot = snapshot_capture(domain, SavedContext(threading.get_ident(), monitor.depth(), saved_rights))

        domain.arena.baseline = domain.arena.watermark
        self._transition(domain, DomainState.active)
        domain.executions += 1

        context = DomainContext(self, domain)
        monitor.enter(ActiveFrame(domain, snapshot, context))
        landing = None
        try:
            for other in others:
                if other.key.key_id in backend.live_keys():
                    backend.set_thread_access(other.key, AccessRights.no_access)
            backend.set_thread_access(domain.key, AccessRights.read_write)
            space.set_untagged_rights(AccessRights.no_access if domain.config.confidentiality
                                      else AccessRights.read_only)
            landing = resume_point(snapshot, lambda: self._enter(context, entry, call))
        finally:
            monitor.leave()
            backend.restore_rights(saved_rights)
            space.set_untagged_rights(saved_untagged)
            if monitor.depth() == 0:
                forget_slot()
            if landing is None:
                # left by an exception that is not a rewind to this boundary
                snapshot_release(snapshot)
                self._abandon(domain)

        report = landing.report
        if landing.path is Path.normal:
            report = monitor.check_canary(domain, space)
        snapshot_release(snapshot)

        if report is not None:
            return self._discard(domain, report)

        result = landing.value
        if isinstance(result, _Raised):
            self._finish(domain)
            raise EntryRaised(result.type_name, result.message)

        address, length = result
        payload = space.read(address, length)
        self._finish(domain)
        return Completed(payload)

    def _enter(self, context: DomainContext, entry: Callable, call: MarshalledCall):
        domain = context.domain
        address = copy_in(domain, call.payload, self.space)
        args, kwargs = unmarshal_out(context.load(address, call.payload_len))
        try:
            payload = encode(entry(*args, **kwargs))
        except Exception as err:
            return _Raised(err)

        out = context.alloc(len(payload))
        context.store(out, payload)
        return out, len(payload)

    def _discard(self, domain: DomainDescriptor, report) -> Violated:
        self._transition(domain, DomainState.faulted)
        self._reset(domain)
        self._transition(domain, DomainState.initialized)
        domain.violations += 1
        logger.warning(f"domain {domain.id} rewound after {report.kind.value}"
                       + (f" at {report.faulting_address:#x}" if report.faulting_address is not None else ""))
        return Violated(report)

    def _abandon(self, domain: DomainDescriptor) -> None:
        self._reset(domain)
        self._transition(domain, DomainState.initialized)
        logger.debug(f"domain {domain.id} left without a result, arena reset")

    def _reset(self, domain: DomainDescriptor) -> None:
        arena_reset(domain, self.space)
        domain.canary = _new_canary()
        self._plant_canary(domain)

    def _plant_canary(self, domain: DomainDescriptor) -> None:
        guard_word = domain.canary.to_bytes(CANARY_BYTES, "little")
        self.space.write(domain.stack.base, guard_word)
        self.space.write(domain.stack.end - CANARY_BYTES, guard_word)

    def _finish(self, domain: DomainDescriptor) -> None:
        if domain.config.retain_heap:
            domain.arena.baseline = domain.arena.watermark
        else:
            arena_reset(domain, self.space)
        self._transition(domain, DomainState.initialized)

    @staticmethod
    def _transition(domain: DomainDescriptor, state: DomainState) -> None:
        assert domain.state.can_become(state), f"{domain.state.value} -> {state.value}"
        domain.state = state

    def domain_destroy(self, domain: DomainDescriptor) -> None:
        """
        Releases the memory and the key of a domain.

        Raises
        ------
        rewind.errors.IllegalState: if the domain is Active or already Retired.
        """
        with self._lock:
            if domain.state not in (DomainState.initialized, DomainState.faulted):
                raise IllegalState(f"Domain {domain.id} is {domain.state.value} and cannot be destroyed")
            if self._domains.get(domain.id) is not domain:
                raise IllegalState(f"Domain {domain.id} is already being destroyed")
            del self._domains[domain.id]

        self.space.untag(domain.stack)
        self.space.untag(domain.arena_region)
        self.space.unmap(domain.stack)
        self.backend.release_key(domain.key)
        self._transition(domain, DomainState.retired)
        logger.debug(f"domain {domain.id} destroyed after {domain.executions} execution(s), "
                     f"{domain.violations} violation(s)")

    def checksum_outside(self, domain: DomainDescriptor) -> str:
        """Digest of every registered region that does not belong to `domain`."""
        return self.space.checksum(self.space.regions_outside(domain.id))

    def close(self) -> None:
        """Destroys every domain that is not executing."""
        for domain in self.domains():
            if domain.state is not DomainState.active:
                try:
                    self.domain_destroy(domain)
                except IllegalState:
                    # destroyed concurrently by its owner
                    pass


_default_manager: Optional[DomainManager] = None
_default_lock = threading.Lock()


def get_manager() -> DomainManager:
    """Process-wide manager built from the environment settings on first use."""
    global _default_manager
    with _default_lock:
        if _default_manager is None:
            _default_manager = DomainManager()
        return _default_manager


def set_manager(manager: Optional[DomainManager]) -> Optional[DomainManager]:
    """Replaces the process-wide manager and returns the previous one."""
    global _default_manager
    with _default_lock:
        previous, _default_manager = _default_manager, manager
        return previous


def current_context() -> DomainContext:
    """
    Context of the innermost domain executing on the calling thread.

    Raises
    ------
    rewind.errors.NoActiveDomain
    """
    frame = monitor.current_frame()
    if frame is None:
        raise NoActiveDomain("No domain is executing on this thread")
    return frame.context
