from dataclasses import dataclass


@dataclass
class ArenaState:
    """
    Bump-allocation state of a domain heap.

    Attributes
    ----------
    base: int
        First address of the arena region.
    capacity: int
        Size of the arena in bytes.
    watermark: int
        Offset of the next free byte.
    baseline: int
        Watermark recorded when the domain was last activated; discard returns to it.
    dirty_end: int
        Highest offset written since the last zero-fill.
    """
    base: int
    capacity: int
    watermark: int = 0
    baseline: int = 0
    dirty_end: int = 0

    @property
    def end(self) -> int:
        return self.base + self.capacity

    def contains(self, address: int, size: int = 1) -> bool:
        return self.base <= address and address + size <= self.end
