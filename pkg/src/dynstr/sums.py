"""Flat sequences of bounded counters with prefix-sum queries.

This is the small aggregate kept at every tree node in the rest of the
package: a short list of nonnegative integers supporting prefix sums,
prefix search, point updates, and entry insertion/removal.  Operations
are linear scans; at node fan-outs (tens of entries) that is faster
than any clever encoding, and correctness is the contract, not O(1).
"""

from __future__ import annotations

from typing import Iterable, Optional

MAX_CAPACITY = 1 << 16


class PartialSums:
    """Resizable list of counters in [0, 2**bits) with prefix sums.

    ``bits`` may be None for internal aggregate use where sums of wide
    fields can exceed 64 bits; the public contract is 1..64.
    """

    __slots__ = ("entries", "bits", "capacity")

    def __init__(self, values: Iterable[int] = (), bits: Optional[int] = 64,
                 capacity: int = MAX_CAPACITY):
        if bits is not None and not 1 <= bits <= 64:
            raise ValueError("entry width must be in 1..64")
        if not 1 <= capacity <= MAX_CAPACITY:
            raise ValueError("capacity must be in 1..65536")
        self.bits = bits
        self.capacity = capacity
        vals = list(values)
        if len(vals) > capacity:
            raise ValueError("too many entries for the stated capacity")
        for v in vals:
            self._check_value(v)
        self.entries = vals

    def _check_value(self, v: int) -> None:
        if v < 0:
            raise ValueError("entries must be nonnegative")
        if self.bits is not None and v >= (1 << self.bits):
            raise ValueError("entry does not fit the stated width")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def sum(self, i: int) -> int:
        """Sum of the first ``i`` entries, 0 <= i <= len."""
        if not 0 <= i <= len(self.entries):
            raise ValueError("prefix length out of range")
        return sum(self.entries[:i])

    def total(self) -> int:
        return sum(self.entries)

    def search(self, x: int) -> Optional[int]:
        """Smallest 1-based i with sum(i) >= x, or None. Requires x >= 1."""
        if x <= 0:
            raise ValueError("search target must be positive")
        acc = 0
        for i, v in enumerate(self.entries):
            acc += v
            if acc >= x:
                return i + 1
        return None

    def update(self, i: int, delta: int) -> None:
        """Add ``delta`` to entry ``i`` (1-based); result must stay in range."""
        if not 1 <= i <= len(self.entries):
            raise ValueError("entry index out of range")
        nv = self.entries[i - 1] + delta
        self._check_value(nv)
        self.entries[i - 1] = nv

    def insert_entry(self, slot: int, value: int = 0) -> None:
        """Insert ``value`` before 0-based ``slot`` (0 inserts at the front)."""
        if not 0 <= slot <= len(self.entries):
            raise ValueError("slot out of range")
        if len(self.entries) >= self.capacity:
            raise ValueError("capacity exceeded")
        self._check_value(value)
        self.entries.insert(slot, value)

    def delete_entry(self, slot: int) -> int:
        """Remove and return the entry at 0-based ``slot``."""
        if not 0 <= slot < len(self.entries):
            raise ValueError("slot out of range")
        return self.entries.pop(slot)

    def rebuild(self, values: Iterable[int]) -> None:
        """Replace the whole contents in one shot."""
        vals = list(values)
        if len(vals) > self.capacity:
            raise ValueError("too many entries for the stated capacity")
        for v in vals:
            self._check_value(v)
        self.entries = vals
