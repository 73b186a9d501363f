"""Per-worker state storage and the global partition/order functions.

The table keeps state identity (the encoded bytes) apart from the mutable
metadata attached to each state. Hashing, equality and probing only ever look
at the identity bytes.
"""

from __future__ import annotations

from typing import Iterator

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

LT, EQ, GT = -1, 0, 1


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def owner(state: bytes, workers: int) -> int:
    """Worker index responsible for ``state``; identical on every worker."""
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    if workers == 1:
        return 0
    return fnv1a_64(state) % workers


def map_order(a: bytes | None, b: bytes | None) -> int:
    """Total order on map values: ``None`` (bottom) below every state, states by bytes."""
    if a is None:
        return EQ if b is None else LT
    if b is None:
        return GT
    if len(a) != len(b):
        raise ValueError(f"cannot order states of widths {len(a)} and {len(b)}")
    return (a > b) - (a < b)


def map_max(a: bytes | None, b: bytes | None) -> bytes | None:
    return a if map_order(a, b) >= 0 else b


class TableFull(MemoryError):
    """Raised when the table would have to grow past its capacity limit."""


class Entry:
    """A stored state plus its MAP metadata.

    ``map_value`` is the largest accepting predecessor seen in iteration
    ``iteration_tag`` (``None`` for bottom).
    """

    __slots__ = ("key", "map_value", "iteration_tag", "excluded", "dominated")

    def __init__(self, key: bytes) -> None:
        self.key = key
        self.map_value: bytes | None = None
        self.iteration_tag = 0
        self.excluded = False
        self.dominated = False

    def visited_in(self, iteration: int) -> bool:
        return self.iteration_tag == iteration

    def __repr__(self) -> str:
        mv = None if self.map_value is None else self.map_value.hex()
        return (
            f"Entry({self.key.hex()}, map={mv}, tag={self.iteration_tag}, "
            f"excluded={self.excluded}, dominated={self.dominated})"
        )


class StateTable:
    """Open addressing with linear probing over a power-of-two slot array."""

    MAX_LOAD = 0.75

    def __init__(self, width: int, capacity: int = 64, max_capacity: int = 1 << 26) -> None:
        if capacity & (capacity - 1) or capacity < 2:
            raise ValueError("capacity must be a power of two >= 2")
        self.width = width
        self.max_capacity = max_capacity
        self._slots: list[Entry | None] = [None] * capacity
        self._count = 0

    def __len__(self) -> int:
        return self._count

    @property
    def capacity(self) -> int:
        return len(self._slots)

    def _probe(self, key: bytes) -> int:
        slots = self._slots
        mask = len(slots) - 1
        i = fnv1a_64(key) & mask
        while True:
            e = slots[i]
            if e is None or e.key == key:
                return i
            i = (i + 1) & mask

    def intern(self, key: bytes) -> tuple[Entry, bool]:
        """Return ``(entry, was_absent)``; new entries start with default metadata."""
        if len(key) != self.width:
            raise ValueError(f"key has {len(key)} bytes, table width is {self.width}")
        i = self._probe(key)
        e = self._slots[i]
        if e is not None:
            return e, False
        if (self._count + 1) > self.MAX_LOAD * len(self._slots):
            self._grow()
            i = self._probe(key)
        e = Entry(key)
        self._slots[i] = e
        self._count += 1
        return e, True

    def get(self, key: bytes) -> Entry | None:
        return self._slots[self._probe(key)]

    def __contains__(self, key: bytes) -> bool:
        return self.get(key) is not None

    def _grow(self) -> None:
        new_cap = len(self._slots) * 2
        if new_cap > self.max_capacity:
            raise TableFull(f"state table limit of {self.max_capacity} slots reached")
        old = self._slots
        self._slots = [None] * new_cap
        mask = new_cap - 1
        for e in old:
            if e is None:
                continue
            i = fnv1a_64(e.key) & mask
            while self._slots[i] is not None:
                i = (i + 1) & mask
            self._slots[i] = e

    def __iter__(self) -> Iterator[Entry]:
        return (e for e in self._slots if e is not None)

    def keys(self) -> list[bytes]:
        return [e.key for e in self]

    def clear(self) -> None:
        self._slots = [None] * len(self._slots)
        self._count = 0
