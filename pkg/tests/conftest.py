import pytest

from rewind import monitor
from rewind.backends import RecordingBackend
from rewind.domains import DomainManager
from rewind.guard import registered, unregister
from tests.helpers import make_backend, make_settings

BACKENDS = ["record", "portable", "hardware"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    return make_backend(request.param)


@pytest.fixture
def manager(backend):
    manager = DomainManager(backend, make_settings(backend.name))
    yield manager
    manager.close()
    monitor.monitor_uninstall()


@pytest.fixture
def record_manager():
    manager = DomainManager(RecordingBackend(), make_settings("record"))
    yield manager
    manager.close()
    monitor.monitor_uninstall()


@pytest.fixture(autouse=True)
def clean_guard_registry():
    yield
    for function_id in registered():
        unregister(function_id)
