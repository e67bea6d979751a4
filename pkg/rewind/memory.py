import bisect
import ctypes
import hashlib
import threading
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from loguru import logger

from . import libc
from .backends import IsolationBackend
from .models import (AccessRights, AccessType, FaultInfo, MemoryRegion, ProtectionKeyHandle, ROOT_KEY,
                     page_round_up)

FaultHandler = Callable[[FaultInfo], None]


@dataclass(frozen=True)
class Mapping:
    """
    Registered region of the address space.

    Attributes
    ----------
    region: rewind.models.MemoryRegion
    key: rewind.models.ProtectionKeyHandle
        Key the region is tagged with, the root key when untagged.
    owner: int
        Id of the domain owning the region, None for memory owned by trusted code.
    """
    region: MemoryRegion
    key: ProtectionKeyHandle = ROOT_KEY
    owner: Optional[int] = None


class AddressSpace:
    """
    Memory mapped for domains and trusted code, with a checked access path.

    Every load and store issued by domain code is resolved against the region table and allowed only if
    the calling thread's rights on the region's key permit it. A refused access never touches memory: it
    is handed to the fault handler, which rewinds the active domain or escalates.

    Parameters
    ----------
    backend: rewind.backends.IsolationBackend
    on_fault: Callable[[rewind.models.FaultInfo], None]
        Fault handler, `rewind.monitor.deliver_fault` by default. It is not expected to return.
    """

    def __init__(self, backend: IsolationBackend, on_fault: Optional[FaultHandler] = None) -> None:
        if on_fault is None:
            from .monitor import deliver_fault
            on_fault = deliver_fault

        self.backend = backend
        self._on_fault = on_fault
        self._lock = threading.Lock()
        self._table: Tuple[Tuple[int, ...], Tuple[Mapping, ...]] = ((), ())
        self._reservations: Dict[int, MemoryRegion] = {}
        self._untagged = threading.local()

    # mapping

    def map_reservation(self, stack_bytes: int, arena_bytes: int,
                        owner: Optional[int] = None) -> Tuple[MemoryRegion, MemoryRegion]:
        """
        Maps a domain reservation laid out as ``[stack][guard][arena][guard]``.

        Parameters
        ----------
        stack_bytes: int
            Rounded up to the page size.
        arena_bytes: int
            Rounded up to the page size.
        owner: int
            Domain the reservation belongs to.

        Returns
        -------
        stack: rewind.models.MemoryRegion
        arena: rewind.models.MemoryRegion

        Raises
        ------
        rewind.errors.OsRejected: if the mapping cannot be created.
        """
        stack_len, arena_len = page_round_up(stack_bytes), page_round_up(arena_bytes)
        total = stack_len + libc.PAGE_SIZE + arena_len + libc.PAGE_SIZE
        base = libc.mmap_anonymous(total)

        stack = MemoryRegion(base, stack_len)
        arena = MemoryRegion(stack.end + libc.PAGE_SIZE, arena_len)
        try:
            libc.mprotect(stack.end, libc.PAGE_SIZE, libc.PROT_NONE)
            libc.mprotect(arena.end, libc.PAGE_SIZE, libc.PROT_NONE)
        except Exception:
            libc.munmap(base, total)
            raise

        self._reservations[stack.base] = MemoryRegion(base, total)
        self._register(Mapping(stack, owner=owner), Mapping(arena, owner=owner))
        logger.debug(f"mapped reservation {base:#x}: stack {stack_len} B, arena {arena_len} B")
        return stack, arena

    def map_untagged(self, length: int) -> MemoryRegion:
        """Maps writable memory owned by trusted code."""
        region = MemoryRegion(libc.mmap_anonymous(page_round_up(length)), page_round_up(length))
        self._register(Mapping(region))
        return region

    def unmap(self, region: MemoryRegion) -> None:
        """
        Unmaps a region returned by `map_untagged`, or a whole reservation when given its stack region.

        Raises
        ------
        ValueError: if the region was not mapped by this address space.
        """
        reservation = self._reservations.pop(region.base, None)
        if reservation is not None:
            self._unregister(lambda mapping: reservation.contains(mapping.region.base))
            libc.munmap(reservation.base, reservation.length)
            return

        if self.lookup(region.base) is None or self.lookup(region.base).region != region:
            raise ValueError(f"Region {region.base:#x}+{region.length} is not mapped")
        self._unregister(lambda mapping: mapping.region == region)
        libc.munmap(region.base, region.length)

    def tag(self, region: MemoryRegion, key: ProtectionKeyHandle) -> None:
        self.backend.tag_region(region, key)
        self._rekey(region, key)

    def untag(self, region: MemoryRegion) -> None:
        self.backend.untag_region(region)
        self._rekey(region, ROOT_KEY)

    # region table

    def lookup(self, address: int) -> Optional[Mapping]:
        bases, mappings = self._table
        index = bisect.bisect_right(bases, address) - 1
        if index < 0:
            return None
        mapping = mappings[index]
        return mapping if mapping.region.contains(address) else None

    def mappings(self) -> Tuple[Mapping, ...]:
        return self._table[1]

    def _register(self, *added: Mapping) -> None:
        with self._lock:
            merged = sorted(self._table[1] + added, key=lambda mapping: mapping.region.base)
            self._table = (tuple(mapping.region.base for mapping in merged), tuple(merged))

    def _unregister(self, predicate: Callable[[Mapping], bool]) -> None:
        with self._lock:
            kept = [mapping for mapping in self._table[1] if not predicate(mapping)]
            self._table = (tuple(mapping.region.base for mapping in kept), tuple(kept))

    def _rekey(self, region: MemoryRegion, key: ProtectionKeyHandle) -> None:
        with self._lock:
            updated = tuple(replace(mapping, key=key) if mapping.region == region else mapping
                            for mapping in self._table[1])
            self._table = (self._table[0], updated)

    # checked access

    def set_untagged_rights(self, rights: AccessRights) -> AccessRights:
        """Sets the calling thread's rights on untagged memory for the checked path; returns the old ones."""
        previous = self.untagged_rights()
        self._untagged.rights = rights
        return previous

    def untagged_rights(self) -> AccessRights:
        return getattr(self._untagged, "rights", AccessRights.read_write)

    def rights_at(self, mapping: Mapping) -> AccessRights:
        if mapping.key.is_root:
            return self.untagged_rights()
        return self.backend.get_thread_access(mapping.key)

    def _check(self, address: int, size: int, access_type: AccessType) -> None:
        mapping = self.lookup(address)
        if mapping is None:
            self._on_fault(FaultInfo(address, access_type, threading.get_ident()))
            raise AssertionError("fault handler returned")
        if not mapping.region.contains(address, size):
            self._on_fault(FaultInfo(mapping.region.end, access_type, threading.get_ident()))
            raise AssertionError("fault handler returned")
        if not self.rights_at(mapping).allows(access_type is AccessType.store):
            self._on_fault(FaultInfo(address, access_type, threading.get_ident()))
            raise AssertionError("fault handler returned")

    def checked_load(self, address: int, size: int) -> bytes:
        """Reads `size` bytes if the calling thread may, otherwise delivers a protection fault."""
        assert size > 0
        self._check(address, size, AccessType.load)
        return ctypes.string_at(address, size)

    def checked_store(self, address: int, data: bytes) -> None:
        """Writes `data` if the calling thread may, otherwise delivers a protection fault."""
        if not data:
            return
        self._check(address, len(data), AccessType.store)
        ctypes.memmove(address, data, len(data))

    # trusted access

    def read(self, address: int, size: int) -> bytes:
        """Trusted read, performed with read rights on the region's key."""
        mapping = self.lookup(address)
        assert mapping is not None and mapping.region.contains(address, size)
        with self.backend.granted(mapping.key, AccessRights.read_only):
            return ctypes.string_at(address, size)

    def write(self, address: int, data: bytes) -> None:
        """Trusted write, performed with write rights on the region's key."""
        mapping = self.lookup(address)
        assert mapping is not None and mapping.region.contains(address, len(data))
        with self.backend.granted(mapping.key):
            ctypes.memmove(address, data, len(data))

    def zero(self, address: int, length: int) -> None:
        if length <= 0:
            return
        mapping = self.lookup(address)
        assert mapping is not None and mapping.region.contains(address, length)
        with self.backend.granted(mapping.key):
            ctypes.memset(address, 0, length)

    def checksum(self, regions: Iterable[MemoryRegion]) -> str:
        """
        BLAKE2b digest over the bytes of `regions`, in address order.

        Returns
        -------
        digest: str
        """
        digest = hashlib.blake2b(digest_size=32)
        for region in sorted(regions, key=lambda value: value.base):
            digest.update(self.read(region.base, region.length))
        return digest.hexdigest()

    def regions_outside(self, owner: int) -> List[MemoryRegion]:
        """Every registered region not owned by domain `owner`."""
        return [mapping.region for mapping in self.mappings() if mapping.owner != owner]
