"""Incremental rebuilding for dynamic strings.

``Rebuilder`` keeps a string queryable while replacing it with a freshly
built twin in the background.  After enough updates accumulate in an
epoch, the next update opens a migration: a fresh structure takes over
the prefix, the old one keeps the suffix, and every subsequent update
also moves a few characters across the boundary.  Because each update
shrinks the old suffix by at least three characters, a migration always
finishes within a third of the old length, and queries stay exact the
whole time by stitching the two halves at the boundary.

The wrapped structure only needs the usual dynamic string interface
(n, access, rank, select, insert, delete), so anything matching
``PackedString`` works.
"""

from __future__ import annotations

from typing import Callable, Iterable, Optional

DEFAULT_MIN_LENGTH = 64


class Rebuilder:
    """Wrap a factory of dynamic strings with epoch-based migration."""

    __slots__ = ("factory", "active", "fresh", "epoch_base",
                 "updates_in_epoch", "migration_updates", "migration_start",
                 "min_length", "epoch_log")

    def __init__(self, factory: Callable[[], object],
                 initial: Optional[Iterable[int]] = None,
                 *, prebuilt: Optional[object] = None,
                 min_length: int = DEFAULT_MIN_LENGTH):
        self.factory = factory
        self.active = prebuilt if prebuilt is not None else factory()
        if initial is not None:
            for code in initial:
                self.active.insert(code, self.active.n + 1)
        self.fresh = None
        self.epoch_base = self.active.n
        self.updates_in_epoch = 0
        self.migration_updates = 0
        self.migration_start = 0
        self.min_length = min_length
        self.epoch_log: list[dict] = []

    # ------------------------------------------------------------------

    @property
    def migrating(self) -> bool:
        return self.fresh is not None

    @property
    def n(self) -> int:
        if self.fresh is not None:
            return self.fresh.n + self.active.n
        return self.active.n

    def __len__(self) -> int:
        return self.n

    @property
    def sigma(self) -> int:
        return self.active.sigma

    # ------------------------------------------------------------------
    # queries

    def access(self, i: int) -> int:
        if self.fresh is None:
            return self.active.access(i)
        bp = self.fresh.n
        return self.fresh.access(i) if i <= bp else self.active.access(i - bp)

    def rank(self, alpha: int, i: int) -> int:
        if self.fresh is None:
            return self.active.rank(alpha, i)
        if not 0 <= i <= self.n:
            raise ValueError("position out of range")
        bp = self.fresh.n
        out = self.fresh.rank(alpha, min(i, bp))
        if i > bp:
            out += self.active.rank(alpha, i - bp)
        return out

    def select(self, alpha: int, c: int) -> Optional[int]:
        if self.fresh is None:
            return self.active.select(alpha, c)
        bp = self.fresh.n
        in_fresh = self.fresh.rank(alpha, bp)
        if c <= in_fresh:
            return self.fresh.select(alpha, c)
        hit = self.active.select(alpha, c - in_fresh)
        return None if hit is None else bp + hit

    # ------------------------------------------------------------------
    # updates

    def _transfer(self, amount: int) -> None:
        amount = min(amount, self.active.n)
        for _ in range(amount):
            code = self.active.delete(1)
            self.fresh.insert(code, self.fresh.n + 1)
        if self.active.n == 0:
            self.epoch_log.append({"start_length": self.migration_start,
                                   "updates": self.migration_updates,
                                   "final_length": self.fresh.n})
            self.active = self.fresh
            self.fresh = None
            self.epoch_base = self.active.n
            self.updates_in_epoch = 0

    def _maybe_open_migration(self, transfer: int) -> None:
        self.updates_in_epoch += 1
        if (self.updates_in_epoch * 2 > self.epoch_base
                and self.active.n >= self.min_length):
            self.migration_start = self.active.n
            self.migration_updates = 1
            self.fresh = self.factory()
            self._transfer(transfer)

    def insert(self, alpha: int, i: int) -> None:
        if self.fresh is None:
            self.active.insert(alpha, i)
            self._maybe_open_migration(4)
            return
        bp = self.fresh.n
        if i <= bp + 1:
            self.fresh.insert(alpha, i)
            amount = 3
        else:
            self.active.insert(alpha, i - bp)
            amount = 4
        self.migration_updates += 1
        self._transfer(amount)

    def delete(self, i: int) -> int:
        if self.fresh is None:
            out = self.active.delete(i)
            self._maybe_open_migration(3)
            return out
        bp = self.fresh.n
        if i <= bp:
            out = self.fresh.delete(i)
        else:
            out = self.active.delete(i - bp)
        self.migration_updates += 1
        self._transfer(3)
        return out

    # ------------------------------------------------------------------
    # passthrough diagnostics

    def to_codes(self):
        import numpy as np

        if self.fresh is None:
            return self.active.to_codes()
        return np.concatenate([self.fresh.to_codes(), self.active.to_codes()])

    def validate(self) -> list[str]:
        problems = [f"suffix: {p}" for p in self.active.validate()]
        if self.fresh is not None:
            problems.extend(f"prefix: {p}" for p in self.fresh.validate())
        return problems

    def space_report(self) -> dict:
        rep = self.active.space_report()
        if self.fresh is not None:
            other = self.fresh.space_report()
            rep = {k: rep[k] + other[k] for k in rep}
        return rep
