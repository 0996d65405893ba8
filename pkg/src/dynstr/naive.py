"""Brute-force reference implementations.

These are the arbiters for every randomized test and for the CLI's
verify mode, so they ship with the library rather than living in the
test tree.  They are written for obviousness, not speed.
"""

from __future__ import annotations

from array import array
from typing import Optional, Sequence

import numpy as np


class NaiveString:
    """Growable array of codes with linear-scan rank/select."""

    def __init__(self, sigma: int):
        if not 2 <= sigma <= 1 << 32:
            raise ValueError("alphabet size out of range")
        self.sigma = sigma
        self._codes = array("L")

    @property
    def n(self) -> int:
        return len(self._codes)

    def __len__(self) -> int:
        return len(self._codes)

    def _check_code(self, alpha: int) -> None:
        if not 0 <= alpha < self.sigma:
            raise ValueError("character code out of range")

    def access(self, i: int) -> int:
        if not 1 <= i <= len(self._codes):
            raise ValueError("position out of range")
        return self._codes[i - 1]

    def rank(self, alpha: int, i: int) -> int:
        self._check_code(alpha)
        if not 0 <= i <= len(self._codes):
            raise ValueError("position out of range")
        return self._codes[:i].count(alpha)

    def select(self, alpha: int, j: int) -> Optional[int]:
        self._check_code(alpha)
        if j <= 0:
            raise ValueError("occurrence rank must be positive")
        pos = -1
        for _ in range(j):
            try:
                pos = self._codes.index(alpha, pos + 1)
            except ValueError:
                return None
        return pos + 1

    def insert(self, alpha: int, i: int) -> None:
        self._check_code(alpha)
        if not 1 <= i <= len(self._codes) + 1:
            raise ValueError("position out of range")
        self._codes.insert(i - 1, alpha)

    def delete(self, i: int) -> int:
        if not 1 <= i <= len(self._codes):
            raise ValueError("position out of range")
        return self._codes.pop(i - 1)

    def to_list(self) -> list[int]:
        return list(self._codes)


class NaiveParallelSums:
    """d plain parallel sequences in a numpy buffer.

    Row-major (n, d) layout so that a position insert is one contiguous
    block move, which keeps the big randomized replays affordable.
    """

    def __init__(self, d: int, k: int):
        if not 1 <= d <= 64 or not 1 <= k <= 64:
            raise ValueError("bad dimensions")
        self.d = d
        self.k = k
        self._buf = np.zeros((16, d), dtype=np.uint64)
        self.n = 0

    def _col(self, j: int, i: int) -> np.ndarray:
        return self._buf[:i, j - 1]

    def _check_pos(self, i: int, hi: int) -> None:
        if not 1 <= i <= hi:
            raise ValueError("position out of range")

    def sum(self, j: int, i: int) -> int:
        if not 1 <= j <= self.d:
            raise ValueError("sequence index out of range")
        if not 0 <= i <= self.n:
            raise ValueError("position out of range")
        col = self._col(j, i)
        if self.k > 32:
            return int(col.astype(object).sum()) if i else 0
        return int(col.sum(dtype=np.uint64))

    def search(self, j: int, x: int) -> Optional[int]:
        if not 1 <= j <= self.d:
            raise ValueError("sequence index out of range")
        if x <= 0:
            raise ValueError("search target must be positive")
        col = self._col(j, self.n)
        if self.k > 32:
            cum = np.cumsum(col.astype(object)) if self.n else np.zeros(0, object)
        else:
            cum = col.cumsum(dtype=np.uint64)
        idx = int(np.searchsorted(cum, x, side="left")) if self.n else 0
        if idx >= self.n:
            return None
        return idx + 1

    def update(self, j: int, i: int, delta: int) -> None:
        if not 1 <= j <= self.d:
            raise ValueError("sequence index out of range")
        self._check_pos(i, self.n)
        nv = int(self._buf[i - 1, j - 1]) + delta
        if not 0 <= nv < (1 << self.k):
            raise ValueError("updated entry out of range")
        self._buf[i - 1, j - 1] = nv

    def insert0(self, i: int) -> None:
        self._check_pos(i, self.n + 1)
        if self.n == len(self._buf):
            grown = np.zeros((2 * len(self._buf), self.d), dtype=np.uint64)
            grown[: self.n] = self._buf[: self.n]
            self._buf = grown
        if i <= self.n:
            self._buf[i : self.n + 1] = self._buf[i - 1 : self.n].copy()
        self._buf[i - 1] = 0
        self.n += 1

    def delete0(self, i: int) -> None:
        self._check_pos(i, self.n)
        if self._buf[i - 1].any():
            raise ValueError("cannot delete a position holding nonzero entries")
        self._buf[i - 1 : self.n - 1] = self._buf[i : self.n].copy()
        self.n -= 1

    def to_matrix(self) -> np.ndarray:
        return self._buf[: self.n].copy()


def collection_bwt(docs: Sequence[Sequence[int]]) -> list[int]:
    """BWT symbols of a document collection; 0 marks terminators.

    Every document contributes one suffix per position plus its empty
    suffix.  Suffixes are compared as plain sequences with terminators
    below all characters; equal character runs are tied by document
    rank, which is exactly what Python's tuple comparison of
    (suffix, rank) keys does.
    """
    entries = []
    for rank, doc in enumerate(docs):
        if len(doc) == 0:
            raise ValueError("documents must be nonempty")
        seq = bytes(doc) if all(0 < c < 256 for c in doc) else tuple(doc)
        for p in range(len(doc) + 1):
            prev = doc[p - 1] if p > 0 else 0
            entries.append((seq[p:], rank, prev))
    entries.sort(key=lambda e: (e[0], e[1]))
    return [e[2] for e in entries]


def count_occurrences(docs: Sequence[Sequence[int]], pattern: Sequence[int]) -> int:
    """Total occurrences of ``pattern`` across ``docs`` (overlaps count)."""
    if len(pattern) == 0:
        raise ValueError("pattern must be nonempty")
    total = 0
    pat = bytes(pattern) if all(0 <= c < 256 for c in pattern) else None
    for doc in docs:
        if pat is not None and isinstance(doc, (bytes, bytearray)):
            start = doc.find(pat)
            while start != -1:
                total += 1
                start = doc.find(pat, start + 1)
        else:
            m = len(pattern)
            want = list(pattern)
            for i in range(len(doc) - m + 1):
                if list(doc[i : i + m]) == want:
                    total += 1
    return total
