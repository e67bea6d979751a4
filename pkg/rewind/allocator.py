from typing import Optional

from .errors import ArenaExhausted
from .models import ArenaState, DomainDescriptor


def _align_up(value: int, align: int) -> int:
    return (value + align - 1) & ~(align - 1)


def arena_contains(arena: ArenaState, address: int, size: int = 1) -> bool:
    """Tells whether ``[address, address + size)`` lies inside the arena."""
    return arena.contains(address, size)


def arena_alloc(domain: DomainDescriptor, size: int, align: int = 8) -> int:
    """
    Bump-allocates `size` bytes from the domain arena.

    Parameters
    ----------
    domain: rewind.models.DomainDescriptor
    size: int
        Positive number of bytes.
    align: int
        Power of two the returned address is a multiple of.

    Returns
    -------
    address: int

    Raises
    ------
    rewind.errors.ArenaExhausted: if the remaining capacity cannot hold the request.
    """
    assert size > 0, f"allocation size must be positive, got {size}"
    assert align > 0 and align & (align - 1) == 0, f"alignment must be a power of two, got {align}"

    arena = domain.arena
    address = _align_up(arena.base + arena.watermark, align)
    end = address + size - arena.base
    if end > arena.capacity:
        raise ArenaExhausted(f"Domain {domain.id}: {size} bytes aligned to {align} do not fit, "
                             f"{arena.capacity - arena.watermark} of {arena.capacity} left")

    arena.watermark = end
    arena.dirty_end = max(arena.dirty_end, end)
    return address


def arena_reset(domain: DomainDescriptor, space=None) -> None:
    """
    Discards every allocation made since the baseline.

    With zero-fill configured, the written part of the arena is cleared through `space`.

    Parameters
    ----------
    domain: rewind.models.DomainDescriptor
    space: rewind.memory.AddressSpace, optional
        Needed for zero-fill.
    """
    arena = domain.arena
    arena.watermark = arena.baseline
    if domain.config.zero_fill and space is not None and arena.dirty_end > arena.baseline:
        space.zero(arena.base + arena.baseline, arena.dirty_end - arena.baseline)
        arena.dirty_end = arena.baseline


def note_write(arena: ArenaState, address: int, size: int) -> None:
    """Extends the dirty range after a store of `size` bytes at `address` inside the arena."""
    if arena.contains(address, size):
        arena.dirty_end = max(arena.dirty_end, address + size - arena.base)


def remaining(arena: ArenaState, align: Optional[int] = None) -> int:
    start = arena.watermark if align is None else _align_up(arena.base + arena.watermark, align) - arena.base
    return max(arena.capacity - start, 0)
