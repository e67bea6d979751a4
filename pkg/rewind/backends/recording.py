from typing import Optional

from ..errors import KeyExhausted
from ..models import AccessRights, MemoryRegion
from .base import IsolationBackend, SwitchCost, ThreadRightsTable


class RecordingBackend(IsolationBackend):
    """
    Test double that changes no page protection and records every mechanism call in `calls`.

    Each entry is a tuple whose first element names the call, e.g. ``("tag", base, length, key_id)``.
    """

    name = "record"
    switch_cost = SwitchCost.register_write

    def __init__(self, max_keys: int = 15) -> None:
        super().__init__()
        self._max_keys = max_keys
        self._rights = ThreadRightsTable()
        self.calls = []

    @property
    def max_keys(self) -> int:
        return self._max_keys

    def call_names(self):
        return [call[0] for call in self.calls]

    def _os_acquire(self) -> int:
        for key_id in range(1, self._max_keys + 1):
            if key_id not in self._live:
                self.calls.append(("acquire", key_id))
                return key_id
        raise KeyExhausted(f"record backend has all {self._max_keys} keys in use")

    def _os_release(self, key_id: int) -> None:
        self.calls.append(("release", key_id))
        self._rights.forget(key_id)

    def _os_tag(self, region: MemoryRegion, key_id: int) -> None:
        self.calls.append(("tag", region.base, region.length, key_id))

    def _os_untag(self, region: MemoryRegion, key_id: int) -> None:
        self.calls.append(("untag", region.base, region.length, key_id))

    def _os_set_rights(self, key_id: int, rights: AccessRights) -> None:
        self.calls.append(("set_access", key_id, rights))
        self._rights.set(key_id, rights)

    def _os_get_rights(self, key_id: int) -> AccessRights:
        return self._rights.get(key_id)

    def _os_save_rights(self, key_id: int) -> Optional[AccessRights]:
        return self._rights.explicit(key_id)

    def _os_restore_rights(self, key_id: int, rights: Optional[AccessRights]) -> None:
        if rights is None:
            self.calls.append(("clear_access", key_id))
            self._rights.clear(key_id)
        else:
            self._os_set_rights(key_id, rights)
