"""Bounded memo tables for data derived from loop nests."""

import threading
from collections import OrderedDict
from typing import Callable, Generic, Hashable, TypeVar

from app.config import MEMO_SIZE
from app.errors import ConfigurationError

K = TypeVar("K", bound=Hashable)
V = TypeVar("V")


class BoundedMemo(Generic[K, V]):
    """Thread-safe memo that evicts the least recently used entry beyond maxsize."""

    def __init__(self, maxsize: int = MEMO_SIZE):
        if maxsize < 1:
            raise ConfigurationError(detail=f"Memo size must be positive, got {maxsize}")
        self.maxsize = maxsize
        self._lock = threading.Lock()
        self._items: "OrderedDict[K, V]" = OrderedDict()

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, key: K) -> bool:
        with self._lock:
            return key in self._items

    def get_or_compute(self, key: K, compute: Callable[[], V]) -> V:
        """Memoized value for key; a concurrent first computation wins."""
        with self._lock:
            if key in self._items:
                self._items.move_to_end(key)
                return self._items[key]
        value = compute()
        with self._lock:
            value = self._items.setdefault(key, value)
            self._items.move_to_end(key)
            while len(self._items) > self.maxsize:
                self._items.popitem(last=False)
        return value
