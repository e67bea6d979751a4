from dataclasses import dataclass

from ..errors import AlignmentError
from ..libc import PAGE_SIZE


def page_round_up(length: int) -> int:
    """Rounds `length` up to a multiple of the page size."""
    return -(-length // PAGE_SIZE) * PAGE_SIZE


@dataclass(frozen=True)
class MemoryRegion:
    """
    Page-aligned interval of the address space.

    Attributes
    ----------
    base: int
        First address, aligned to the page size.
    length: int
        Size in bytes, a positive multiple of the page size.
    """
    base: int
    length: int

    @property
    def end(self) -> int:
        return self.base + self.length

    def contains(self, address: int, size: int = 1) -> bool:
        """Tells whether ``[address, address + size)`` lies inside the region."""
        return self.base <= address and address + size <= self.end

    def validate(self) -> None:
        """
        Checks the alignment invariants.

        Raises
        ------
        rewind.errors.AlignmentError: if the base or the length is not page aligned.
        """
        if self.base % PAGE_SIZE:
            raise AlignmentError(f"Region base {self.base:#x} is not aligned to {PAGE_SIZE} bytes")
        if self.length <= 0 or self.length % PAGE_SIZE:
            raise AlignmentError(f"Region length {self.length} is not a positive multiple of {PAGE_SIZE}")
