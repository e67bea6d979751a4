from typing import List

from loguru import logger

from .. import libc
from ..errors import BackendUnavailable, KeyExhausted, OsRejected
from ..models import AccessRights, MemoryRegion
from .base import IsolationBackend, SwitchCost

_DISCOVERY_LIMIT = 1024

_RIGHTS_TO_BITS = {
    AccessRights.read_write: 0,
    AccessRights.read_only: libc.PKEY_DISABLE_WRITE,
    AccessRights.no_access: libc.PKEY_DISABLE_ACCESS,
}


def _bits_to_rights(bits: int) -> AccessRights:
    if bits & libc.PKEY_DISABLE_ACCESS:
        return AccessRights.no_access
    if bits & libc.PKEY_DISABLE_WRITE:
        return AccessRights.read_only
    return AccessRights.read_write


def discover_key_count() -> int:
    """
    Counts the protection keys the kernel is willing to hand out.

    Keys are allocated until the kernel refuses and then released again.

    Returns
    -------
    count: int
        0 when the CPU or kernel does not support protection keys.
    """
    if not libc.HAS_PKEY_FUNCTIONS:
        return 0

    keys: List[int] = []
    try:
        while len(keys) < _DISCOVERY_LIMIT:
            keys.append(libc.pkey_alloc())
    except OsRejected:
        pass
    finally:
        for key in keys:
            libc.pkey_free(key)

    return len(keys)


class HardwareKeysBackend(IsolationBackend):
    """
    Protection Keys for Userspace.

    Rights live in the thread's PKRU register, so a switch is a register write and affects only the
    calling thread.
    """

    name = "hardware"
    switch_cost = SwitchCost.register_write

    def __init__(self) -> None:
        super().__init__()
        self._max_keys = discover_key_count()
        if self._max_keys == 0:
            raise BackendUnavailable("Protection keys are not available on this machine")
        logger.debug(f"hardware: {self._max_keys} protection keys available")

    @property
    def max_keys(self) -> int:
        return self._max_keys

    def _os_acquire(self) -> int:
        try:
            return libc.pkey_alloc(0)
        except OsRejected as err:
            raise KeyExhausted(f"Kernel refused a new protection key: {err}") from err

    def _os_release(self, key_id: int) -> None:
        libc.pkey_free(key_id)

    def _os_tag(self, region: MemoryRegion, key_id: int) -> None:
        libc.pkey_mprotect(region.base, region.length, libc.PROT_READ | libc.PROT_WRITE, key_id)

    def _os_untag(self, region: MemoryRegion, key_id: int) -> None:
        libc.pkey_mprotect(region.base, region.length, libc.PROT_READ | libc.PROT_WRITE, 0)

    def _os_set_rights(self, key_id: int, rights: AccessRights) -> None:
        libc.pkey_set(key_id, _RIGHTS_TO_BITS[rights])

    def _os_get_rights(self, key_id: int) -> AccessRights:
        return _bits_to_rights(libc.pkey_get(key_id))
