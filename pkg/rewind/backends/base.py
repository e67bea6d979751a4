import threading
from abc import ABC, abstractmethod
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from loguru import logger

from ..errors import KeyExhausted, KeyInUse, UnknownKey
from ..models import AccessRights, MemoryRegion, ProtectionKeyHandle

RightsSnapshot = Tuple[Tuple[int, Optional[AccessRights]], ...]


class SwitchCost(Enum):
    """Price class of changing a thread's rights on one key."""
    register_write: str = "register-write"
    syscall: str = "syscall"


@dataclass(frozen=True)
class BackendCapabilities:
    """
    Attributes
    ----------
    max_keys: int
        Number of keys that can be live at the same time.
    switch_cost_class: rewind.backends.SwitchCost
    """
    max_keys: int
    switch_cost_class: SwitchCost

    def serialize(self) -> dict:
        return {"max_keys": self.max_keys, "switch_cost_class": self.switch_cost_class.value}


class IsolationBackend(ABC):
    """
    Per-thread memory access control over protection keys.

    Key bookkeeping, region tagging and the error contract live here, so every backend behaves the same
    way for the full operation set. Subclasses only provide the mechanism through the ``_os_*`` hooks.
    """

    name = ""
    switch_cost = SwitchCost.register_write

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._live = set()
        self._tags: Dict[MemoryRegion, int] = {}
        self._tag_counts = Counter()

    @property
    @abstractmethod
    def max_keys(self) -> int:
        """Number of keys that can be live at the same time."""

    def backend_capabilities(self) -> BackendCapabilities:
        """Reports how many keys can be used and how expensive a rights switch is."""
        return BackendCapabilities(self.max_keys, self.switch_cost)

    def live_keys(self) -> FrozenSet[int]:
        return frozenset(self._live)

    def key_of(self, region: MemoryRegion) -> Optional[int]:
        return self._tags.get(region)

    def regions_of(self, key_id: int):
        return [region for region, tagged in list(self._tags.items()) if tagged == key_id]

    def acquire_key(self) -> ProtectionKeyHandle:
        """
        Acquires a fresh protection key. The calling thread initially holds read_write rights on it.

        Returns
        -------
        key: rewind.models.ProtectionKeyHandle

        Raises
        ------
        rewind.errors.KeyExhausted: if `max_keys` keys are already live.
        """
        with self._lock:
            if len(self._live) >= self.max_keys:
                raise KeyExhausted(f"{self.name} backend has all {self.max_keys} keys in use")
            key_id = self._os_acquire()
            assert key_id != 0 and key_id not in self._live
            self._live.add(key_id)

        logger.debug(f"{self.name}: acquired key {key_id}")
        return ProtectionKeyHandle(key_id)

    def release_key(self, key: ProtectionKeyHandle) -> None:
        """
        Releases a key so a later acquire may hand it out again.

        Raises
        ------
        rewind.errors.KeyInUse: if a region is still tagged with `key`.
        rewind.errors.UnknownKey: if `key` is not live.
        """
        with self._lock:
            self._require_live(key)
            if self._tag_counts[key.key_id]:
                raise KeyInUse(f"Key {key.key_id} still tags {self._tag_counts[key.key_id]} region(s)")
            self._os_release(key.key_id)
            self._live.discard(key.key_id)
            del self._tag_counts[key.key_id]

        logger.debug(f"{self.name}: released key {key.key_id}")

    def tag_region(self, region: MemoryRegion, key: ProtectionKeyHandle) -> None:
        """
        Associates every page of `region` with `key`.

        Raises
        ------
        rewind.errors.AlignmentError: if the region is not page aligned.
        rewind.errors.UnknownKey: if `key` is not live.
        rewind.errors.OsRejected: if the operating system refuses the change.
        """
        region.validate()
        with self._lock:
            self._require_live(key)
            previous = self._tags.get(region)
            self._os_tag(region, key.key_id)
            if previous is not None:
                self._tag_counts[previous] -= 1
            self._tags[region] = key.key_id
            self._tag_counts[key.key_id] += 1

    def untag_region(self, region: MemoryRegion) -> None:
        """
        Returns the pages of `region` to the root key.

        Raises
        ------
        rewind.errors.UnknownKey: if the region carries no key.
        """
        with self._lock:
            key_id = self._tags.get(region)
            if key_id is None:
                raise UnknownKey(f"Region {region.base:#x}+{region.length} is not tagged")
            self._os_untag(region, key_id)
            del self._tags[region]
            self._tag_counts[key_id] -= 1

    def set_thread_access(self, key: ProtectionKeyHandle, rights: AccessRights) -> None:
        """
        Limits the calling thread's accesses to memory tagged with `key`.

        Raises
        ------
        rewind.errors.UnknownKey: if `key` is not live.
        """
        if key.key_id not in self._live:
            raise UnknownKey(f"Key {key.key_id} is not live")
        self._os_set_rights(key.key_id, rights)

    def get_thread_access(self, key: ProtectionKeyHandle) -> AccessRights:
        """Reads back the calling thread's rights on `key`; the root key is always read_write."""
        if key.is_root:
            return AccessRights.read_write
        if key.key_id not in self._live:
            raise UnknownKey(f"Key {key.key_id} is not live")
        return self._os_get_rights(key.key_id)

    def save_rights(self, key_ids: Iterable[int]) -> RightsSnapshot:
        """Captures the calling thread's rights on `key_ids` for a later `restore_rights`."""
        return tuple((key_id, self._os_save_rights(key_id)) for key_id in key_ids if key_id in self._live)

    def restore_rights(self, saved: RightsSnapshot) -> None:
        for key_id, rights in saved:
            if key_id in self._live:
                self._os_restore_rights(key_id, rights)

    @contextmanager
    def granted(self, key: ProtectionKeyHandle, rights: AccessRights = AccessRights.read_write):
        """Holds `rights` on `key` for the duration of the block, then restores the previous rights."""
        if key.is_root:
            yield
            return

        saved = self.save_rights([key.key_id])
        self.set_thread_access(key, rights)
        try:
            yield
        finally:
            self.restore_rights(saved)

    def _require_live(self, key: ProtectionKeyHandle) -> None:
        if key.key_id not in self._live:
            raise UnknownKey(f"Key {key.key_id} is not live on the {self.name} backend")

    @abstractmethod
    def _os_acquire(self) -> int:
        """Allocates a key id different from 0 and from every live id."""

    @abstractmethod
    def _os_release(self, key_id: int) -> None:
        pass

    @abstractmethod
    def _os_tag(self, region: MemoryRegion, key_id: int) -> None:
        pass

    @abstractmethod
    def _os_untag(self, region: MemoryRegion, key_id: int) -> None:
        pass

    @abstractmethod
    def _os_set_rights(self, key_id: int, rights: AccessRights) -> None:
        pass

    @abstractmethod
    def _os_get_rights(self, key_id: int) -> AccessRights:
        pass

    def _os_save_rights(self, key_id: int) -> Optional[AccessRights]:
        return self._os_get_rights(key_id)

    def _os_restore_rights(self, key_id: int, rights: Optional[AccessRights]) -> None:
        self._os_set_rights(key_id, rights)


class ThreadRightsTable:
    """
    Per-thread rights kept in software.

    Threads that never set rights on a key hold read_write on it. Each thread only writes its own entries.
    """

    def __init__(self) -> None:
        self._by_thread: Dict[int, Dict[int, AccessRights]] = {}

    def _own(self) -> Dict[int, AccessRights]:
        return self._by_thread.setdefault(threading.get_ident(), {})

    def get(self, key_id: int) -> AccessRights:
        return self._own().get(key_id, AccessRights.read_write)

    def explicit(self, key_id: int) -> Optional[AccessRights]:
        return self._own().get(key_id)

    def set(self, key_id: int, rights: AccessRights) -> None:
        self._own()[key_id] = rights

    def clear(self, key_id: int) -> None:
        self._own().pop(key_id, None)

    def holders(self, key_id: int):
        """Rights explicitly held on `key_id` by any thread."""
        return [table[key_id] for table in list(self._by_thread.values()) if key_id in table]

    def forget(self, key_id: int) -> None:
        for table in list(self._by_thread.values()):
            table.pop(key_id, None)
