import ast
import inspect
import signal
import threading

import pytest

from rewind import monitor, snapshot
from rewind.domains import current_context
from rewind.errors import HandlerConflict, NoActiveDomain
from rewind.marshal import marshal_call, unmarshal_out
from rewind.models import AccessType, FaultInfo, ViolationKind


@pytest.fixture
def uninstalled():
    monitor.monitor_uninstall()
    yield
    monitor.monitor_uninstall()


@pytest.mark.unit
def test_install_is_idempotent(uninstalled):
    monitor.monitor_install()
    monitor.monitor_install()

    assert monitor.is_installed()


@pytest.mark.unit
def test_foreign_segv_handler_conflicts(uninstalled, mocker):
    mocker.patch("rewind.monitor.signal.getsignal", return_value=lambda signum, frame: None)

    with pytest.raises(HandlerConflict):
        monitor.monitor_install()
    assert not monitor.is_installed()


@pytest.mark.unit
def test_default_segv_disposition_is_not_a_conflict(uninstalled):
    assert not callable(signal.getsignal(signal.SIGSEGV))
    monitor.monitor_install()


@pytest.mark.unit
def test_fault_outside_any_domain_escalates():
    assert monitor.classify(FaultInfo(0x1000, AccessType.store, threading.get_ident())) is monitor.ESCALATE


@pytest.mark.unit
def test_deliver_fault_outside_domain_calls_escalate(mocker):
    escalate = mocker.patch("rewind.monitor.escalate")
    monitor.deliver_fault(FaultInfo(0x1000, AccessType.load, threading.get_ident()))

    assert escalate.call_count == 1
    assert isinstance(escalate.call_args[0][0], MemoryError)


@pytest.mark.unit
def test_escalate_raises_sigsegv(mocker):
    raise_signal = mocker.patch("rewind.monitor.signal.raise_signal")
    mocker.patch("rewind.monitor.faulthandler.dump_traceback")

    with pytest.raises(MemoryError):
        monitor.escalate(MemoryError("boom"))
    raise_signal.assert_called_once_with(signal.SIGSEGV)


@pytest.mark.unit
def test_classify_reports_innermost_domain(record_manager):
    domain = record_manager.domain_create()
    seen = []

    def entry():
        seen.append(monitor.classify(FaultInfo(0x2000, AccessType.store, threading.get_ident())))
        seen.append(monitor.classify(FaultInfo(0x2000, AccessType.store, -1)))
        return monitor.active_domains()

    record_manager.domain_execute(domain, entry, marshal_call("entry"))

    report, other_thread = seen
    assert report.kind is ViolationKind.protection_fault
    assert report.domain_id == domain.id
    assert report.faulting_address == 0x2000
    assert other_thread is monitor.ESCALATE
    assert monitor.active_domain() is None


@pytest.mark.unit
def test_raise_abort_outside_domain():
    with pytest.raises(NoActiveDomain):
        monitor.raise_abort(1)


@pytest.mark.unit
def test_intact_canary_passes(record_manager):
    domain = record_manager.domain_create()

    assert monitor.check_canary(domain, record_manager.space) is None
    record_manager.space.write(domain.stack.end - monitor.CANARY_BYTES, b"\x00" * monitor.CANARY_BYTES)
    assert monitor.check_canary(domain, record_manager.space).kind is ViolationKind.canary_mismatch


@pytest.mark.unit
def test_depth_counts_nested_executions(record_manager):
    outer, inner = record_manager.domain_create(), record_manager.domain_create()

    def inner_entry():
        return [monitor.depth(), monitor.active_domains(), current_context().domain.id]

    def outer_entry():
        return record_manager.domain_execute(inner, inner_entry, marshal_call("inner")).payload

    payload = unmarshal_out(record_manager.domain_execute(outer, outer_entry, marshal_call("outer")).payload)

    assert unmarshal_out(payload) == [2, [outer.id, inner.id], inner.id]
    assert monitor.depth() == 0


def _function_names_used(function) -> set:
    tree = ast.parse(inspect.getsource(function).lstrip())
    return {node.id for node in ast.walk(tree) if isinstance(node, ast.Name)} | \
           {node.attr for node in ast.walk(tree) if isinstance(node, ast.Attribute)}


@pytest.mark.unit
@pytest.mark.parametrize("function", [monitor.deliver_fault, monitor.classify, snapshot.rewind_to])
def test_fault_path_does_not_log_or_lock(function):
    names = _function_names_used(function)

    assert "logger" not in names
    assert not {"Lock", "RLock", "acquire"} & names
