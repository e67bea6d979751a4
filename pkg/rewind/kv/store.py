import threading
from contextlib import contextmanager
from typing import Dict, Optional


class RWLock:
    """Readers-writer lock: concurrent readers, exclusive writers, writers are not starved."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._waiting_writers = 0

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer or self._waiting_writers:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            self._waiting_writers += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._waiting_writers -= 1
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


class KvStore:
    """
    Key-value map held in trusted memory.

    Attributes
    ----------
    item_count: int
    byte_count: int
        Sum of the lengths of the stored values.
    """

    def __init__(self) -> None:
        self._items: Dict[str, bytes] = {}
        self._lock = RWLock()
        self.byte_count = 0

    @property
    def item_count(self) -> int:
        return len(self._items)

    def get(self, key: str) -> Optional[bytes]:
        with self._lock.read():
            return self._items.get(key)

    def set(self, key: str, value: bytes) -> None:
        with self._lock.write():
            previous = self._items.get(key)
            self.byte_count += len(value) - (len(previous) if previous is not None else 0)
            self._items[key] = value

    def delete(self, key: str) -> bool:
        with self._lock.write():
            previous = self._items.pop(key, None)
            if previous is None:
                return False
            self.byte_count -= len(previous)
            return True

    def items(self) -> Dict[str, bytes]:
        with self._lock.read():
            return dict(self._items)
