"""Dynamic packed string over a small alphabet with rank and select.

``PackedString`` stores a sequence of codes drawn from an alphabet of at
most 64 symbols.  Leaves pack codes at a fixed field width into one big
integer; internal nodes track per-child leaf counts and character
counts.  A side structure (``ParallelSums`` with one position per leaf
and one sequence per symbol) holds per-leaf symbol counts, so rank and
select touch one leaf plus two tree descents.

Inserts amortize their rebalancing: most land directly in a leaf with
room, a full leaf sheds its first character to its left neighbor, and a
leaf with no usable neighbor splits off a one-character leaf in front of
itself while the remainder is frozen against further direct inserts.
Each grown leaf also advances a climbing cursor that pre-splits one of
its ancestors whenever that ancestor's degree crosses twice the design
minimum, so node degrees stay inside a constant window without any
global rebuild.  Deletes are deliberately lazy: they only shrink leaf
payloads, never the tree shape.

External positions are 1-based; codes run 0..sigma-1.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from . import bits as B
from .space import measure_bits
from .sums import PartialSums
from .sumtree import ParallelSums

DEFAULT_LEAF_BITS = 1 << 14
DEFAULT_MIN_DEGREE = 8
COUNT_WIDTH = 16


class _StrLeaf:
    __slots__ = ("bits", "n", "full", "climb", "quota", "prev", "next", "parent")

    def __init__(self, payload: int = 0, n: int = 0):
        self.bits = payload
        self.n = n
        self.full = False
        self.climb = 1
        self.quota = 1
        self.prev: Optional[_StrLeaf] = None
        self.next: Optional[_StrLeaf] = None
        self.parent: Optional[_StrNode] = None


class _StrNode:
    __slots__ = ("children", "nleaves", "nchars", "parent")

    def __init__(self, children: list, nleaves: list[int], nchars: list[int]):
        self.children = children
        self.nleaves = PartialSums(nleaves, bits=None)
        self.nchars = PartialSums(nchars, bits=None)
        self.parent: Optional[_StrNode] = None
        for ch in children:
            ch.parent = self


def _child_index(parent: _StrNode, child) -> int:
    for c, ch in enumerate(parent.children):
        if ch is child:
            return c
    raise AssertionError("child not found under its parent")


class PackedString:
    """Mutable code sequence with access/rank/select over sigma <= 64."""

    __slots__ = ("sigma", "width", "L", "b", "m_full", "counts", "root",
                 "head", "leaf_count", "h", "n")

    def __init__(self, sigma: int, *, L: int = DEFAULT_LEAF_BITS,
                 b: int = DEFAULT_MIN_DEGREE):
        if not 2 <= sigma <= 64:
            raise ValueError("alphabet size must be in 2..64")
        if b < 2:
            raise ValueError("minimum degree must be at least 2")
        self.sigma = sigma
        self.width = max(1, (sigma - 1).bit_length())
        self.L = L
        self.b = b
        self.m_full = (2 * L) // self.width
        if self.m_full < 4:
            raise ValueError("leaf size target too small for this alphabet")
        self.counts = ParallelSums(sigma, COUNT_WIDTH)
        self.counts.insert(1)
        leaf = _StrLeaf()
        self.root = leaf
        self.head = leaf
        self.leaf_count = 1
        self.h = 0
        self.n = 0

    def __len__(self) -> int:
        return self.n

    # ------------------------------------------------------------------
    # descent helpers

    def _check_code(self, alpha: int) -> None:
        if not 0 <= alpha < self.sigma:
            raise ValueError("code out of range for this alphabet")

    def _locate(self, i: int) -> tuple[_StrLeaf, int, int]:
        """Leaf holding position i, its local 1-based offset, leaf ordinal."""
        node = self.root
        ord_ = 0
        while isinstance(node, _StrNode):
            cum = 0
            chars = node.nchars.entries
            leaves = node.nleaves.entries
            nxt = None
            for c, e in enumerate(chars):
                if i <= cum + e:
                    i -= cum
                    nxt = node.children[c]
                    break
                cum += e
                ord_ += leaves[c]
            if nxt is None:
                c = len(chars) - 1
                i -= cum - chars[c]
                ord_ -= leaves[c]
                nxt = node.children[c]
            node = nxt
        return node, i, ord_

    def _path_add_chars(self, leaf, delta: int) -> None:
        child = leaf
        node = leaf.parent
        while node is not None:
            node.nchars.entries[_child_index(node, child)] += delta
            child = node
            node = node.parent

    def _path_add_leaves(self, start: Optional[_StrNode]) -> None:
        child = start
        node = start.parent if start is not None else None
        while node is not None:
            node.nleaves.entries[_child_index(node, child)] += 1
            child = node
            node = node.parent

    # ------------------------------------------------------------------
    # queries

    def access(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise ValueError("position out of range")
        leaf, p, _ = self._locate(i)
        return B.read_field(leaf.bits, self.width, p - 1)

    def rank(self, alpha: int, i: int) -> int:
        """Occurrences of alpha among the first i characters (i may be 0)."""
        self._check_code(alpha)
        if not 0 <= i <= self.n:
            raise ValueError("position out of range")
        if i == 0:
            return 0
        leaf, p, ord_ = self._locate(i)
        before = self.counts.sum(alpha + 1, ord_)
        return before + B.count_code(leaf.bits, self.width, leaf.n, alpha, upto=p)

    def select(self, alpha: int, c: int) -> Optional[int]:
        """Position of the c-th occurrence of alpha, or None if c exceeds it."""
        self._check_code(alpha)
        if c <= 0:
            raise ValueError("occurrence rank must be positive")
        if c > self.counts.total(alpha + 1):
            return None
        j_ord = self.counts.search(alpha + 1, c)
        rem = c - self.counts.sum(alpha + 1, j_ord - 1)
        node = self.root
        t = j_ord
        offset = 0
        while isinstance(node, _StrNode):
            leaves = node.nleaves.entries
            chars = node.nchars.entries
            for c2, lc in enumerate(leaves):
                if t <= lc:
                    node = node.children[c2]
                    break
                t -= lc
                offset += chars[c2]
        p0 = B.select_code(node.bits, self.width, node.n, alpha, rem)
        if p0 is None:
            raise AssertionError("leaf counts disagreed with the count index")
        return offset + p0 + 1

    # ------------------------------------------------------------------
    # cursor maintenance

    def _quota_for(self, leaf: _StrLeaf) -> int:
        if self.h == 0 or leaf.climb >= self.h:
            return max(1, self.m_full - leaf.n)
        remaining = self.h - leaf.climb + 1
        return max(1, -(-(self.m_full - leaf.n) // remaining))

    def _reset_cursor(self, leaf: _StrLeaf) -> None:
        leaf.climb = 1
        leaf.quota = self._quota_for(leaf)

    def _credit(self, leaf: _StrLeaf) -> None:
        if self.h == 0:
            return
        level = min(leaf.climb, self.h)
        v = leaf.parent
        for _ in range(level - 1):
            v = v.parent
        if len(v.children) >= 2 * self.b:
            self._split_internal(v)
        leaf.quota -= 1
        if leaf.quota <= 0:
            if leaf.climb < self.h:
                leaf.climb += 1
            leaf.quota = self._quota_for(leaf)

    # ------------------------------------------------------------------
    # structural updates

    def _split_internal(self, v: _StrNode) -> None:
        half = (len(v.children) + 1) // 2
        right = _StrNode(v.children[half:], v.nleaves.entries[half:],
                         v.nchars.entries[half:])
        v.children = v.children[:half]
        v.nleaves.entries = v.nleaves.entries[:half]
        v.nchars.entries = v.nchars.entries[:half]
        ll, rl = sum(v.nleaves.entries), sum(right.nleaves.entries)
        lc, rc = sum(v.nchars.entries), sum(right.nchars.entries)
        parent = v.parent
        if parent is None:
            self.root = _StrNode([v, right], [ll, rl], [lc, rc])
            self.h += 1
        else:
            ci = _child_index(parent, v)
            right.parent = parent
            parent.children.insert(ci + 1, right)
            parent.nleaves.entries[ci:ci + 1] = [ll, rl]
            parent.nchars.entries[ci:ci + 1] = [lc, rc]

    def _overflow_valve(self, node: Optional[_StrNode]) -> None:
        while node is not None and len(node.children) > 4 * self.b:
            parent = node.parent
            self._split_internal(node)
            node = parent

    def _split_leaf(self, leaf: _StrLeaf, ordinal: int,
                    pending: Optional[int] = None, p: int = 0) -> None:
        """Detach the first character of leaf into a fresh leaf before it.

        The remainder keeps the original leaf object and is frozen (marked
        full), so later inserts address the fresh one-character leaf.  The
        per-leaf count index gains a position at the fresh leaf; when the
        split was triggered by a character spliced in without a count
        update (``pending``), that character's count lands wherever the
        character itself ended up.
        """
        w = self.width
        j1 = ordinal + 1
        first = B.read_field(leaf.bits, w, 0)
        leaf.bits >>= w
        leaf.n -= 1
        leaf.full = True
        left = _StrLeaf(first, 1)
        parent = leaf.parent
        if parent is None:
            self.root = _StrNode([left, leaf], [1, 1], [1, leaf.n])
            self.h = 1
        else:
            ci = _child_index(parent, leaf)
            left.parent = parent
            parent.children.insert(ci, left)
            parent.nleaves.entries.insert(ci, 1)
            parent.nchars.entries.insert(ci, 1)
            parent.nchars.entries[ci + 1] -= 1
            self._path_add_leaves(parent)
        self.leaf_count += 1
        left.prev = leaf.prev
        if leaf.prev is not None:
            leaf.prev.next = left
        else:
            self.head = left
        left.next = leaf
        leaf.prev = left
        self.counts.insert(j1)
        self.counts.update(first + 1, j1, +1)
        if pending is None:
            self.counts.update(first + 1, j1 + 1, -1)
        elif p > 1:
            self.counts.update(first + 1, j1 + 1, -1)
            self.counts.update(pending + 1, j1 + 1, +1)
        self._reset_cursor(left)
        self._reset_cursor(leaf)
        self._overflow_valve(leaf.parent)

    def insert(self, alpha: int, i: int) -> None:
        """Insert code alpha so that it becomes position i (1 <= i <= n+1)."""
        self._check_code(alpha)
        if not 1 <= i <= self.n + 1:
            raise ValueError("position out of range")
        w = self.width
        for _ in range(3):
            leaf, p, ord_ = self._locate(i)
            if not leaf.full and leaf.n < self.m_full:
                leaf.bits = B.insert_bits(leaf.bits, (p - 1) * w, w, alpha)
                leaf.n += 1
                self._path_add_chars(leaf, +1)
                self.counts.update(alpha + 1, ord_ + 1, +1)
                self.n += 1
                self._credit(leaf)
                return
            if leaf.full and leaf.prev is not None and not leaf.prev.full:
                prev = leaf.prev
                if prev.n >= self.m_full:
                    self._split_leaf(prev, ord_ - 1, pending=None)
                    continue
                if p == 1:
                    prev.bits |= alpha << (prev.n * w)
                    prev.n += 1
                    self.counts.update(alpha + 1, ord_, +1)
                else:
                    beta = B.read_field(leaf.bits, w, 0)
                    trimmed = leaf.bits >> w
                    leaf.bits = B.insert_bits(trimmed, (p - 2) * w, w, alpha)
                    prev.bits |= beta << (prev.n * w)
                    prev.n += 1
                    self.counts.update(beta + 1, ord_ + 1, -1)
                    self.counts.update(beta + 1, ord_, +1)
                    self.counts.update(alpha + 1, ord_ + 1, +1)
                self._path_add_chars(prev, +1)
                self.n += 1
                self._credit(prev)
                return
            leaf.bits = B.insert_bits(leaf.bits, (p - 1) * w, w, alpha)
            leaf.n += 1
            self._path_add_chars(leaf, +1)
            self.n += 1
            self._split_leaf(leaf, ord_, pending=alpha, p=p)
            return
        raise AssertionError("insert dispatch failed to settle")

    def delete(self, i: int) -> int:
        """Remove and return the code at position i."""
        if not 1 <= i <= self.n:
            raise ValueError("position out of range")
        w = self.width
        leaf, p, ord_ = self._locate(i)
        leaf.bits, alpha = B.delete_bits(leaf.bits, (p - 1) * w, w)
        leaf.n -= 1
        self._path_add_chars(leaf, -1)
        self.counts.update(alpha + 1, ord_ + 1, -1)
        self.n -= 1
        if leaf.n == 0 or leaf.full or leaf.n * w >= self.L:
            return alpha
        prev, nxt = leaf.prev, leaf.next
        if (prev is not None and not prev.full and prev.n > 0
                and prev.n * w < self.L):
            beta = B.read_field(prev.bits, w, prev.n - 1)
            prev.bits, _ = B.delete_bits(prev.bits, (prev.n - 1) * w, w)
            prev.n -= 1
            leaf.bits = B.insert_bits(leaf.bits, 0, w, beta)
            leaf.n += 1
            self.counts.update(beta + 1, ord_, -1)
            self.counts.update(beta + 1, ord_ + 1, +1)
            self._path_add_chars(prev, -1)
            self._path_add_chars(leaf, +1)
        elif (nxt is not None and not nxt.full and nxt.n > 0
                and nxt.n * w < self.L):
            beta = B.read_field(nxt.bits, w, 0)
            nxt.bits >>= w
            nxt.n -= 1
            leaf.bits |= beta << (leaf.n * w)
            leaf.n += 1
            self.counts.update(beta + 1, ord_ + 2, -1)
            self.counts.update(beta + 1, ord_ + 1, +1)
            self._path_add_chars(nxt, -1)
            self._path_add_chars(leaf, +1)
        return alpha

    # ------------------------------------------------------------------
    # bulk construction and extraction

    @classmethod
    def from_codes(cls, codes, sigma: int, **kwargs) -> "PackedString":
        """Build in one pass: alternating one-char and frozen full leaves."""
        out = cls(sigma, **kwargs)
        arr = np.asarray(codes, dtype=np.uint64)
        if arr.size and int(arr.max()) >= sigma:
            raise ValueError("code out of range for this alphabet")
        n = int(arr.size)
        if n == 0:
            return out
        w = out.width
        m = out.m_full
        leaves: list[_StrLeaf] = []
        at = 0
        while n - at >= m + 1:
            lead = _StrLeaf(int(arr[at]), 1)
            body = _StrLeaf(B.pack_fields(arr[at + 1:at + 1 + m], w), m)
            body.full = True
            leaves.append(lead)
            leaves.append(body)
            at += m + 1
        if at < n:
            leaves.append(_StrLeaf(B.pack_fields(arr[at:], w), n - at))
        for prev, nxt in zip(leaves, leaves[1:]):
            prev.next = nxt
            nxt.prev = prev
        out.head = leaves[0]
        out.leaf_count = len(leaves)
        out.n = n
        level: list = leaves
        levels_built = 0
        while len(level) > 1:
            groups = []
            if len(level) <= 4 * out.b:
                groups.append(level)
            else:
                size = 2 * out.b
                for g in range(0, len(level), size):
                    groups.append(level[g:g + size])
                if len(groups[-1]) < out.b:
                    tail = groups.pop()
                    groups[-1] = groups[-1] + tail
            nxt_level = []
            for grp in groups:
                if levels_built == 0:
                    nl = [1] * len(grp)
                    nc = [lf.n for lf in grp]
                else:
                    nl = [sum(ch.nleaves.entries) for ch in grp]
                    nc = [sum(ch.nchars.entries) for ch in grp]
                nxt_level.append(_StrNode(grp, nl, nc))
            level = nxt_level
            levels_built += 1
        out.root = level[0]
        out.h = levels_built
        for lf in leaves:
            out._reset_cursor(lf)
        per_leaf = np.stack([np.bincount(
            B.fields_to_array(lf.bits, w, lf.n).astype(np.int64),
            minlength=sigma) for lf in leaves])
        out.counts = ParallelSums.from_rows(per_leaf, d=sigma, k=COUNT_WIDTH)
        return out

    def to_codes(self) -> np.ndarray:
        """The whole sequence as a numpy array of codes."""
        if self.n == 0:
            return np.zeros(0, dtype=np.uint32)
        parts = []
        leaf = self.head
        while leaf is not None:
            if leaf.n:
                parts.append(B.fields_to_array(leaf.bits, self.width, leaf.n)
                             .astype(np.uint32))
            leaf = leaf.next
        return np.concatenate(parts)

    # ------------------------------------------------------------------
    # diagnostics

    def validate(self) -> list[str]:
        """Structural check; returns a list of violations (empty when clean)."""
        problems: list[str] = []
        w = self.width
        order: list[_StrLeaf] = []

        def walk(node, is_root):
            if isinstance(node, _StrLeaf):
                order.append(node)
                if node.n > self.m_full:
                    problems.append("leaf above the maximum size")
                if node.bits.bit_length() > node.n * w:
                    problems.append("leaf payload wider than its length")
                if not 1 <= node.climb <= max(1, self.h):
                    problems.append("cursor level out of range")
                if node.quota < 1:
                    problems.append("cursor quota must stay positive")
                return 1, node.n
            deg = len(node.children)
            lo = 2 if is_root else self.b
            if not lo <= deg <= 4 * self.b:
                problems.append(f"node degree {deg} outside [{lo}, {4 * self.b}]")
            if len(node.nleaves.entries) != deg or len(node.nchars.entries) != deg:
                problems.append("aggregate arity disagrees with child count")
            tl = tc = 0
            for c, ch in enumerate(node.children):
                if ch.parent is not node:
                    problems.append("broken parent pointer")
                l, k = walk(ch, False)
                if node.nleaves.entries[c] != l:
                    problems.append(f"leaf-count aggregate wrong at child {c}")
                if node.nchars.entries[c] != k:
                    problems.append(f"char-count aggregate wrong at child {c}")
                tl += l
                tc += k
            return tl, tc

        total_leaves, total_chars = walk(self.root, True)
        if total_chars != self.n:
            problems.append("stored length disagrees with the tree")
        if total_leaves != self.leaf_count:
            problems.append("stored leaf count disagrees with the tree")

        chain = []
        leaf = self.head
        while leaf is not None:
            chain.append(leaf)
            leaf = leaf.next
        if len(chain) != len(order) or any(a is not b for a, b in zip(chain, order)):
            problems.append("leaf chain disagrees with tree order")
        else:
            for a, b2 in zip(chain, chain[1:]):
                if b2.prev is not a:
                    problems.append("leaf chain back-links broken")
                    break
        for a, b2 in zip(order, order[1:]):
            if a.n and b2.n and not a.full and not b2.full:
                problems.append("two adjacent nonempty leaves both accept inserts")
                break

        if self.counts.n != self.leaf_count:
            problems.append("count index arity disagrees with leaf count")
        else:
            mat = self.counts.to_rows()
            for li, lf in enumerate(order):
                if lf.n:
                    got = np.bincount(
                        B.fields_to_array(lf.bits, w, lf.n).astype(np.int64),
                        minlength=self.sigma)
                else:
                    got = np.zeros(self.sigma, dtype=np.int64)
                if not np.array_equal(mat[li].astype(np.int64), got):
                    problems.append(f"count index wrong at leaf {li}")
                    break
        return problems

    def stats(self) -> dict:
        leaves = []
        leaf = self.head
        while leaf is not None:
            leaves.append(leaf)
            leaf = leaf.next
        full = sum(1 for lf in leaves if lf.full)
        empty = sum(1 for lf in leaves if lf.n == 0)
        cap = self.leaf_count * self.m_full
        return {"length": self.n, "leaves": self.leaf_count, "height": self.h,
                "full_leaves": full, "empty_leaves": empty,
                "fill": (self.n / cap) if cap else 0.0}

    def space_report(self) -> dict:
        payload = self.n * self.width
        total = measure_bits(self)
        return {"payload_bits": payload,
                "overhead_bits": max(0, total - payload),
                "total_bits": total}
