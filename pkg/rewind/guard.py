import functools
import threading
import time
import typing
from typing import Any, Callable, Dict, List, Optional, Tuple

from loguru import logger

from .domains import DomainManager, get_manager
from .errors import DecodeError, DuplicateFunctionId, GuardError, IllegalState, NonSerializableSignature
from .marshal import marshal_call, unmarshal_out
from .models import (DomainDescriptor, DomainMode, DomainOutcome, DomainState, GuardPolicy, OnViolation,
                     ViolationKind, ViolationReport, page_round_up)

_SERIALIZABLE = {type(None), bool, int, float, str, bytes, bytearray, list, tuple, dict, set, frozenset,
                 typing.Any}

_registry: Dict[str, "GuardedFunction"] = {}
_registry_lock = threading.Lock()


def _check_annotation(annotation, where: str) -> None:
    if annotation is None or annotation in _SERIALIZABLE:
        return
    origin = typing.get_origin(annotation)
    if origin is typing.Union or origin in _SERIALIZABLE:
        for argument in typing.get_args(annotation):
            if argument is not Ellipsis:
                _check_annotation(argument, where)
        return
    raise NonSerializableSignature(f"{where} is annotated {annotation!r}, which cannot cross a domain boundary")


def check_signature(target: Callable) -> None:
    """
    Rejects targets whose annotated parameter or return types the codec cannot carry.

    Raises
    ------
    rewind.errors.NonSerializableSignature
    """
    try:
        hints = typing.get_type_hints(target)
    except Exception:
        # unresolvable forward references: nothing to check
        return
    for name, annotation in hints.items():
        _check_annotation(annotation, "return value" if name == "return" else f"parameter {name!r}")


class GuardedFunction:
    """
    Function that always runs inside an isolation domain.

    Calling it marshals the arguments, executes the target in a domain and applies the policy's alternate
    action when the execution is rewound.

    Attributes
    ----------
    function_id: str
    policy: rewind.models.GuardPolicy
    target: Callable
    calls: int
    violations: int
        Rewound executions, retries included.
    fallbacks: int
        Calls answered by the fallback producer.
    """

    def __init__(self, target: Callable, policy: GuardPolicy, function_id: str,
                 manager: Optional[DomainManager] = None) -> None:
        self.target = target
        self.policy = policy
        self.function_id = function_id
        self.calls = 0
        self.violations = 0
        self.fallbacks = 0
        self._manager = manager
        self._lock = threading.Lock()
        self._persistent: Dict[int, DomainDescriptor] = {}
        self._quota = page_round_up(policy.arena_bytes) // 2
        functools.update_wrapper(self, target)

    @property
    def manager(self) -> DomainManager:
        return self._manager or get_manager()

    def __call__(self, *args, **kwargs):
        return invoke(self, *args, **kwargs)

    def __repr__(self) -> str:
        return f"GuardedFunction({self.function_id!r}, {self.policy.domain_mode.value})"

    def _count(self, counter: str) -> None:
        with self._lock:
            setattr(self, counter, getattr(self, counter) + 1)

    def _persistent_domain(self) -> DomainDescriptor:
        thread_id = threading.get_ident()
        domain = self._persistent.get(thread_id)
        if domain is None or domain.state is DomainState.retired:
            domain = self.manager.domain_create(self.policy.domain_config())
            with self._lock:
                self._persistent[thread_id] = domain
        return domain

    def execute_once(self, args, kwargs) -> Tuple[DomainOutcome, int]:
        """Runs the target once; returns the outcome and the id of the domain it ran in."""
        call = marshal_call(self.function_id, args, kwargs, quota=self._quota)
        manager = self.manager
        if self.policy.domain_mode is DomainMode.persistent:
            domain = self._persistent_domain()
            return manager.domain_execute(domain, self.target, call), domain.id

        domain = manager.domain_create(self.policy.domain_config())
        try:
            return manager.domain_execute(domain, self.target, call), domain.id
        finally:
            self._destroy(domain)

    def release_thread(self) -> None:
        """Destroys the calling thread's persistent domain, if any."""
        with self._lock:
            domain = self._persistent.pop(threading.get_ident(), None)
        if domain is not None and domain.state is not DomainState.retired:
            self._destroy(domain)

    def close(self) -> None:
        """Destroys the persistent domains of every thread."""
        with self._lock:
            domains, self._persistent = list(self._persistent.values()), {}
        for domain in domains:
            if domain.state in (DomainState.initialized, DomainState.faulted):
                self._destroy(domain)

    def _destroy(self, domain: DomainDescriptor) -> None:
        try:
            self.manager.domain_destroy(domain)
        except IllegalState as err:
            logger.debug(f"{self.function_id}: {err}")


def invoke(guarded_function: GuardedFunction, *args, **kwargs) -> Any:
    """
    Calls a guarded function.

    Returns
    -------
    result: Any
        The target's return value, or the fallback value after a violation under the fallback-value policy.

    Raises
    ------
    rewind.errors.GuardError: if the call was rewound and the policy produced no value.
    rewind.errors.EntryRaised: if the target raised an ordinary exception.
    """
    policy = guarded_function.policy
    guarded_function._count("calls")
    limit = policy.retry_limit + 1 if policy.on_violation is OnViolation.retry_then_error else 1

    attempts = 0
    while True:
        attempts += 1
        outcome, domain_id = guarded_function.execute_once(args, kwargs)
        if outcome.completed:
            try:
                return unmarshal_out(outcome.payload)
            except DecodeError:
                report = ViolationReport(kind=ViolationKind.corrupt_result, domain_id=domain_id,
                                         thread_id=threading.get_ident(), timestamp=time.monotonic_ns())
        else:
            report = outcome.report

        guarded_function._count("violations")
        logger.warning(f"{guarded_function.function_id}: {report.kind.value} in domain {report.domain_id}, "
                       f"attempt {attempts}/{limit}")
        if attempts >= limit:
            break

    if policy.on_violation is OnViolation.fallback_value:
        guarded_function._count("fallbacks")
        return policy.fallback(*args, **kwargs)
    raise GuardError(report, attempts, guarded_function.function_id)


def guard(target: Callable, policy: Optional[GuardPolicy] = None, function_id: Optional[str] = None,
          manager: Optional[DomainManager] = None) -> GuardedFunction:
    """
    Registers `target` as a guarded function.

    Parameters
    ----------
    target: Callable
    policy: rewind.models.GuardPolicy, optional
        Per-call domains returning errors by default.
    function_id: str, optional
        Defaults to the target's module and qualified name.
    manager: rewind.domains.DomainManager, optional
        Defaults to the process-wide manager.

    Returns
    -------
    guarded_function: rewind.guard.GuardedFunction

    Raises
    ------
    rewind.errors.DuplicateFunctionId
    rewind.errors.NonSerializableSignature
    """
    function_id = function_id or f"{target.__module__}.{target.__qualname__}"
    check_signature(target)
    guarded_function = GuardedFunction(target, policy or GuardPolicy(), function_id, manager)

    with _registry_lock:
        if function_id in _registry:
            raise DuplicateFunctionId(f"{function_id} is already guarded")
        _registry[function_id] = guarded_function

    logger.debug(f"guarded {function_id} ({guarded_function.policy.domain_mode.value}, "
                 f"{guarded_function.policy.on_violation.value})")
    return guarded_function


def guarded(function_id: Optional[str] = None, policy: Optional[GuardPolicy] = None,
            manager: Optional[DomainManager] = None, **policy_fields):
    """
    Decorator form of `guard`.

    Usable bare (``@guarded``) or with arguments, e.g.
    ``@guarded(domain_mode="persistent", on_violation="fallback-value", fallback=lambda data: b"")``.
    """
    if callable(function_id):
        return guard(function_id)

    def decorate(target: Callable) -> GuardedFunction:
        return guard(target, policy or GuardPolicy(**policy_fields), function_id, manager)

    return decorate


def unregister(function_id: str) -> None:
    """Removes a guarded function from the registry and destroys its persistent domains."""
    with _registry_lock:
        guarded_function = _registry.pop(function_id, None)
    if guarded_function is not None:
        guarded_function.close()


def registered() -> List[str]:
    with _registry_lock:
        return sorted(_registry)
