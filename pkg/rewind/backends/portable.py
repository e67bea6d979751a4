import threading
from typing import Optional

from .. import libc
from ..errors import KeyExhausted
from ..models import AccessRights, MemoryRegion
from .base import IsolationBackend, SwitchCost, ThreadRightsTable

_RIGHTS_TO_PROT = {
    AccessRights.read_write: libc.PROT_READ | libc.PROT_WRITE,
    AccessRights.read_only: libc.PROT_READ,
    AccessRights.no_access: libc.PROT_NONE,
}


class PortableBackend(IsolationBackend):
    """
    Page-protection backend for machines without protection keys.

    Rights are tracked per thread in software. The page protection of a key's regions follows the most
    permissive right any thread holds, since mprotect applies to the whole process.
    """

    name = "portable"
    switch_cost = SwitchCost.syscall

    def __init__(self, max_keys: int = 64) -> None:
        super().__init__()
        self._max_keys = max_keys
        self._rights = ThreadRightsTable()
        self._applied = {}
        self._protect_lock = threading.Lock()

    @property
    def max_keys(self) -> int:
        return self._max_keys

    def _os_acquire(self) -> int:
        for key_id in range(1, self._max_keys + 1):
            if key_id not in self._live:
                self._applied[key_id] = AccessRights.read_write
                return key_id
        raise KeyExhausted(f"portable backend has all {self._max_keys} keys in use")

    def _os_release(self, key_id: int) -> None:
        self._rights.forget(key_id)
        self._applied.pop(key_id, None)

    def _os_tag(self, region: MemoryRegion, key_id: int) -> None:
        prot = _RIGHTS_TO_PROT[self._applied.get(key_id, AccessRights.read_write)]
        libc.mprotect(region.base, region.length, prot)

    def _os_untag(self, region: MemoryRegion, key_id: int) -> None:
        libc.mprotect(region.base, region.length, libc.PROT_READ | libc.PROT_WRITE)

    def _os_set_rights(self, key_id: int, rights: AccessRights) -> None:
        self._rights.set(key_id, rights)
        self._reprotect(key_id)

    def _os_get_rights(self, key_id: int) -> AccessRights:
        return self._rights.get(key_id)

    def _os_save_rights(self, key_id: int) -> Optional[AccessRights]:
        return self._rights.explicit(key_id)

    def _os_restore_rights(self, key_id: int, rights: Optional[AccessRights]) -> None:
        if rights is None:
            self._rights.clear(key_id)
        else:
            self._rights.set(key_id, rights)
        self._reprotect(key_id)

    def _reprotect(self, key_id: int) -> None:
        with self._protect_lock:
            holders = self._rights.holders(key_id)
            target = AccessRights.most_permissive(holders) if holders else AccessRights.read_write
            if self._applied.get(key_id) == target:
                return
            for region in self.regions_of(key_id):
                libc.mprotect(region.base, region.length, _RIGHTS_TO_PROT[target])
            self._applied[key_id] = target

    def applied_rights(self, key_id: int) -> AccessRights:
        """Rights currently enforced by page protection for `key_id`."""
        return self._applied.get(key_id, AccessRights.read_write)
