import pytest

from rewind import libc
from rewind.backends import PortableBackend, SwitchCost
from rewind.errors import KeyExhausted
from rewind.models import AccessRights, MemoryRegion


@pytest.fixture
def region():
    length = 2 * libc.PAGE_SIZE
    region = MemoryRegion(libc.mmap_anonymous(length), length)
    yield region
    libc.munmap(region.base, region.length)


@pytest.mark.unit
def test_portable_backend_switches_through_syscalls():
    assert PortableBackend().backend_capabilities().switch_cost_class is SwitchCost.syscall


@pytest.mark.unit
def test_portable_backend_honours_its_key_limit():
    backend = PortableBackend(max_keys=4)
    for _ in range(4):
        backend.acquire_key()

    with pytest.raises(KeyExhausted):
        backend.acquire_key()


@pytest.mark.unit
def test_page_protection_follows_thread_rights(region):
    backend = PortableBackend()
    key = backend.acquire_key()
    backend.tag_region(region, key)
    saved = backend.save_rights([key.key_id])

    backend.set_thread_access(key, AccessRights.read_only)
    assert backend.applied_rights(key.key_id) is AccessRights.read_only

    backend.set_thread_access(key, AccessRights.no_access)
    assert backend.applied_rights(key.key_id) is AccessRights.no_access

    backend.restore_rights(saved)
    assert backend.applied_rights(key.key_id) is AccessRights.read_write
    assert backend.get_thread_access(key) is AccessRights.read_write

    backend.untag_region(region)
    backend.release_key(key)


@pytest.mark.unit
def test_tagging_applies_current_protection(region, mocker):
    backend = PortableBackend()
    key = backend.acquire_key()
    backend.set_thread_access(key, AccessRights.no_access)
    spy = mocker.spy(libc, "mprotect")

    backend.tag_region(region, key)

    spy.assert_called_once_with(region.base, region.length, libc.PROT_NONE)
    backend.untag_region(region)
