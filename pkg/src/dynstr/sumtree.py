"""Parallel searchable partial sums with aligned insert/delete.

``ParallelSums`` maintains d nonnegative integer sequences of equal
length in one B-tree.  Every leaf packs the same positions of all d
sequences into a single bit payload, laid out as the run of sequence 1,
then the run of sequence 2, and so on.  Internal nodes carry two kinds
of per-child aggregates: position counts, and one sum per sequence.

sum/search/update address one sequence; insert and delete add or remove
a position (holding zeros) across all sequences at once, which is what
lets a higher-level structure keep d per-chunk statistics aligned with
a single chunk list.

External indexing is 1-based; sequence numbers run 1..d.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from . import bits as B
from .space import measure_bits
from .sums import PartialSums

DEFAULT_LEAF_BITS = 1 << 14
DEFAULT_BLOCK_BITS = 1 << 10
DEFAULT_MIN_DEGREE = 8


class _SumLeaf:
    __slots__ = ("bits", "n", "parent")

    def __init__(self, payload: int = 0, n: int = 0):
        self.bits = payload
        self.n = n
        self.parent: Optional[_SumNode] = None


class _SumNode:
    __slots__ = ("children", "npos", "sums", "parent")

    def __init__(self, children: list, npos: list[int], sums: list[list[int]]):
        self.children = children
        self.npos = PartialSums(npos, bits=None)
        self.sums = [PartialSums(s, bits=None) for s in sums]
        self.parent: Optional[_SumNode] = None
        for ch in children:
            ch.parent = self


class ParallelSums:
    """d parallel sequences of k-bit nonnegative integers, one B-tree."""

    __slots__ = ("d", "k", "L", "block_bits", "b_min", "b_max", "root", "n")

    def __init__(self, d: int, k: int, *, L: int = DEFAULT_LEAF_BITS,
                 block_bits: int = DEFAULT_BLOCK_BITS,
                 b_min: int = DEFAULT_MIN_DEGREE, b_max: Optional[int] = None):
        if not 1 <= d <= 64:
            raise ValueError("sequence count must be in 1..64")
        if not 1 <= k <= 64:
            raise ValueError("entry width must be in 1..64")
        if b_max is None:
            b_max = 2 * b_min
        if b_max != 2 * b_min or b_min < 2:
            raise ValueError("degree bounds must satisfy b_max == 2*b_min >= 4")
        if d * k > L // 2:
            raise ValueError("leaf size target too small for d*k entries")
        self.d = d
        self.k = k
        self.L = L
        self.block_bits = block_bits
        self.b_min = b_min
        self.b_max = b_max
        self.root = _SumLeaf()
        self.n = 0

    # ------------------------------------------------------------------
    # leaf payload helpers

    def _run(self, leaf: _SumLeaf, j0: int) -> int:
        """Payload slice holding sequence j0 (0-based) of this leaf."""
        off = j0 * leaf.n * self.k
        return (leaf.bits >> off) & ((1 << (leaf.n * self.k)) - 1)

    def _leaf_entry(self, leaf: _SumLeaf, j0: int, p0: int) -> int:
        return B.read_field(leaf.bits, self.k, j0 * leaf.n + p0)

    def _leaf_totals(self, leaf: _SumLeaf) -> list[int]:
        return [B.sum_fields(self._run(leaf, j0), self.k, leaf.n)
                for j0 in range(self.d)]

    # ------------------------------------------------------------------
    # queries

    def _check_seq(self, j: int) -> None:
        if not 1 <= j <= self.d:
            raise ValueError("sequence index out of range")

    def sum(self, j: int, i: int) -> int:
        """Sum of the first i entries of sequence j (i may be 0)."""
        self._check_seq(j)
        if not 0 <= i <= self.n:
            raise ValueError("position out of range")
        if i == 0:
            return 0
        node = self.root
        acc = 0
        while isinstance(node, _SumNode):
            cum = 0
            seq = node.sums[j - 1].entries
            for c, e in enumerate(node.npos.entries):
                if i <= cum + e:
                    i -= cum
                    node = node.children[c]
                    break
                cum += e
                acc += seq[c]
            else:
                raise AssertionError("position descent fell off the tree")
        return acc + B.sum_fields(self._run(node, j - 1), self.k, node.n, upto=i)

    def total(self, j: int) -> int:
        self._check_seq(j)
        node = self.root
        if isinstance(node, _SumNode):
            return sum(node.sums[j - 1].entries)
        return B.sum_fields(self._run(node, j - 1), self.k, node.n)

    def search(self, j: int, x: int) -> Optional[int]:
        """Smallest 1-based i with sum(j, i) >= x, or None. Requires x >= 1."""
        self._check_seq(j)
        if x <= 0:
            raise ValueError("search target must be positive")
        if x > self.total(j):
            return None
        node = self.root
        pos = 0
        while isinstance(node, _SumNode):
            seq = node.sums[j - 1].entries
            for c, e in enumerate(seq):
                if x <= e:
                    node = node.children[c]
                    break
                x -= e
                pos += node.npos.entries[c]
            else:
                raise AssertionError("sum descent fell off the tree")
        hit = B.prefix_search_fields(self._run(node, j - 1), self.k, node.n, x)
        if hit is None:
            raise AssertionError("leaf total disagreed with node aggregates")
        return pos + hit[0] + 1

    # ------------------------------------------------------------------
    # point update

    def update(self, j: int, i: int, delta: int) -> None:
        """Add delta to sequence j at position i; result must stay in [0, 2**k)."""
        self._check_seq(j)
        if not 1 <= i <= self.n:
            raise ValueError("position out of range")
        node = self.root
        path: list[tuple[_SumNode, int]] = []
        while isinstance(node, _SumNode):
            cum = 0
            for c, e in enumerate(node.npos.entries):
                if i <= cum + e:
                    path.append((node, c))
                    i -= cum
                    node = node.children[c]
                    break
                cum += e
        idx = (j - 1) * node.n + (i - 1)
        cur = B.read_field(node.bits, self.k, idx)
        nv = cur + delta
        if not 0 <= nv < (1 << self.k):
            raise ValueError("updated entry out of range")
        node.bits = B.write_field(node.bits, self.k, idx, nv)
        for vnode, c in path:
            vnode.sums[j - 1].entries[c] += delta

    # ------------------------------------------------------------------
    # structural updates

    def insert(self, i: int) -> None:
        """Insert a zero at position i of every sequence (1 <= i <= n+1)."""
        if not 1 <= i <= self.n + 1:
            raise ValueError("position out of range")
        node = self.root
        path: list[tuple[_SumNode, int]] = []
        while isinstance(node, _SumNode):
            cum = 0
            for c, e in enumerate(node.npos.entries):
                if i <= cum + e:
                    path.append((node, c))
                    i -= cum
                    node = node.children[c]
                    break
                cum += e
            else:
                c = len(node.npos.entries) - 1
                path.append((node, c))
                i -= cum - node.npos.entries[c]
                node = node.children[c]
        p0 = i - 1
        k = self.k
        old_n = node.n
        payload = node.bits
        for j0 in range(self.d - 1, -1, -1):
            payload = B.insert_bits(payload, (j0 * old_n + p0) * k, k, 0)
        node.bits = payload
        node.n += 1
        self.n += 1
        for vnode, c in path:
            vnode.npos.entries[c] += 1
        if node.n * self.d * k > 2 * self.L:
            self._split_leaf(node)

    def delete(self, i: int) -> None:
        """Remove position i from every sequence; all entries there must be 0."""
        if not 1 <= i <= self.n:
            raise ValueError("position out of range")
        node = self.root
        path: list[tuple[_SumNode, int]] = []
        while isinstance(node, _SumNode):
            cum = 0
            for c, e in enumerate(node.npos.entries):
                if i <= cum + e:
                    path.append((node, c))
                    i -= cum
                    node = node.children[c]
                    break
                cum += e
        p0 = i - 1
        k = self.k
        old_n = node.n
        for j0 in range(self.d):
            if self._leaf_entry(node, j0, p0):
                raise ValueError("cannot delete a position holding nonzero entries")
        payload = node.bits
        for j0 in range(self.d - 1, -1, -1):
            payload, _ = B.delete_bits(payload, (j0 * old_n + p0) * k, k)
        node.bits = payload
        node.n -= 1
        self.n -= 1
        for vnode, c in path:
            vnode.npos.entries[c] -= 1
        if node.parent is not None and node.n * self.d * k < self.L // 2:
            self._fix_leaf_underflow(node)

    # ------------------------------------------------------------------
    # rebalancing

    def _child_index(self, parent: _SumNode, child) -> int:
        for c, ch in enumerate(parent.children):
            if ch is child:
                return c
        raise AssertionError("child not found under its parent")

    def _split_leaf(self, leaf: _SumLeaf) -> None:
        k = self.k
        m = leaf.n
        lh = (m + 1) // 2
        rh = m - lh
        left_bits = 0
        right_bits = 0
        left_sums = []
        for j0 in range(self.d):
            run = self._run(leaf, j0)
            lpart = run & ((1 << (lh * k)) - 1)
            rpart = run >> (lh * k)
            left_bits |= lpart << (j0 * lh * k)
            right_bits |= rpart << (j0 * rh * k)
            left_sums.append(B.sum_fields(lpart, k, lh))
        parent = leaf.parent
        if parent is None:
            totals = self._leaf_totals(leaf)
        else:
            ci = self._child_index(parent, leaf)
            totals = [node_sums.entries[ci] for node_sums in parent.sums]
        right_sums = [t - l for t, l in zip(totals, left_sums)]
        new_left = _SumLeaf(left_bits, lh)
        leaf.bits = right_bits
        leaf.n = rh
        if parent is None:
            self.root = _SumNode([new_left, leaf], [lh, rh],
                                 [[l, r] for l, r in zip(left_sums, right_sums)])
        else:
            new_left.parent = parent
            parent.children.insert(ci, new_left)
            parent.npos.entries[ci:ci + 1] = [lh, rh]
            for j0 in range(self.d):
                parent.sums[j0].entries[ci:ci + 1] = [left_sums[j0], right_sums[j0]]
            self._fix_node_overflow(parent)

    def _fix_node_overflow(self, node: _SumNode) -> None:
        while node is not None and len(node.children) > self.b_max:
            half = (len(node.children) + 1) // 2
            right = _SumNode(node.children[half:], node.npos.entries[half:],
                             [s.entries[half:] for s in node.sums])
            node.children = node.children[:half]
            node.npos.entries = node.npos.entries[:half]
            for s in node.sums:
                s.entries = s.entries[:half]
            parent = node.parent
            lp = sum(node.npos.entries)
            rp = sum(right.npos.entries)
            lsums = [sum(s.entries) for s in node.sums]
            rsums = [sum(s.entries) for s in right.sums]
            if parent is None:
                self.root = _SumNode([node, right], [lp, rp],
                                     [[l, r] for l, r in zip(lsums, rsums)])
                return
            ci = self._child_index(parent, node)
            right.parent = parent
            parent.children.insert(ci + 1, right)
            parent.npos.entries[ci:ci + 1] = [lp, rp]
            for j0 in range(self.d):
                parent.sums[j0].entries[ci:ci + 1] = [lsums[j0], rsums[j0]]
            node = parent

    def _merge_run_payloads(self, left: _SumLeaf, right: _SumLeaf) -> int:
        k = self.k
        total = left.n + right.n
        merged = 0
        for j0 in range(self.d):
            run = self._run(left, j0) | (self._run(right, j0) << (left.n * k))
            merged |= run << (j0 * total * k)
        return merged

    def _fix_leaf_underflow(self, leaf: _SumLeaf) -> None:
        parent = leaf.parent
        ci = self._child_index(parent, leaf)
        si = ci + 1 if ci + 1 < len(parent.children) else ci - 1
        li, ri = (ci, si) if si > ci else (si, ci)
        left, right = parent.children[li], parent.children[ri]
        total_n = left.n + right.n
        merged = self._merge_run_payloads(left, right)
        k = self.k
        if total_n * self.d * k <= 2 * self.L:
            left.bits = merged
            left.n = total_n
            parent.children.pop(ri)
            parent.npos.entries[li] += parent.npos.entries.pop(ri)
            for s in parent.sums:
                s.entries[li] += s.entries.pop(ri)
            self._fix_node_underflow(parent)
        else:
            lh = (total_n + 1) // 2
            rh = total_n - lh
            lb = 0
            rb = 0
            lsums = []
            for j0 in range(self.d):
                run = (merged >> (j0 * total_n * k)) & ((1 << (total_n * k)) - 1)
                lpart = run & ((1 << (lh * k)) - 1)
                lb |= lpart << (j0 * lh * k)
                rb |= (run >> (lh * k)) << (j0 * rh * k)
                lsums.append(B.sum_fields(lpart, k, lh))
            combined = [parent.sums[j0].entries[li] + parent.sums[j0].entries[ri]
                        for j0 in range(self.d)]
            left.bits, left.n = lb, lh
            right.bits, right.n = rb, rh
            parent.npos.entries[li] = lh
            parent.npos.entries[ri] = rh
            for j0 in range(self.d):
                parent.sums[j0].entries[li] = lsums[j0]
                parent.sums[j0].entries[ri] = combined[j0] - lsums[j0]

    def _fix_node_underflow(self, node: _SumNode) -> None:
        while node.parent is not None and len(node.children) < self.b_min:
            parent = node.parent
            ci = self._child_index(parent, node)
            si = ci + 1 if ci + 1 < len(parent.children) else ci - 1
            sib = parent.children[si]
            if len(sib.children) > self.b_min:
                if si > ci:
                    moved = sib.children.pop(0)
                    mp = sib.npos.entries.pop(0)
                    ms = [s.entries.pop(0) for s in sib.sums]
                    node.children.append(moved)
                    node.npos.entries.append(mp)
                    for s, v in zip(node.sums, ms):
                        s.entries.append(v)
                else:
                    moved = sib.children.pop()
                    mp = sib.npos.entries.pop()
                    ms = [s.entries.pop() for s in sib.sums]
                    node.children.insert(0, moved)
                    node.npos.entries.insert(0, mp)
                    for s, v in zip(node.sums, ms):
                        s.entries.insert(0, v)
                moved.parent = node
                parent.npos.entries[ci] += mp
                parent.npos.entries[si] -= mp
                for j0 in range(self.d):
                    parent.sums[j0].entries[ci] += ms[j0]
                    parent.sums[j0].entries[si] -= ms[j0]
                return
            li, ri = (ci, si) if si > ci else (si, ci)
            lnode, rnode = parent.children[li], parent.children[ri]
            for ch in rnode.children:
                ch.parent = lnode
            lnode.children.extend(rnode.children)
            lnode.npos.entries.extend(rnode.npos.entries)
            for s, rs in zip(lnode.sums, rnode.sums):
                s.entries.extend(rs.entries)
            parent.children.pop(ri)
            parent.npos.entries[li] += parent.npos.entries.pop(ri)
            for s in parent.sums:
                s.entries[li] += s.entries.pop(ri)
            node = parent
        if isinstance(self.root, _SumNode) and len(self.root.children) == 1:
            self.root = self.root.children[0]
            self.root.parent = None

    # ------------------------------------------------------------------
    # bulk construction and extraction

    @classmethod
    def from_rows(cls, rows, d: Optional[int] = None, k: int = 16, **kwargs
                  ) -> "ParallelSums":
        """Build from an (n, d) matrix of values, filling leaves to ~L bits."""
        mat = np.asarray(rows, dtype=np.uint64)
        if mat.ndim == 1:
            mat = mat.reshape(-1, 1)
        if d is None:
            d = mat.shape[1] if mat.size else 1
        out = cls(d, k, **kwargs)
        n = len(mat)
        if n == 0:
            return out
        ppl = max(1, out.L // (d * k))
        sizes = [min(ppl, n - at) for at in range(0, n, ppl)]
        if len(sizes) > 1 and sizes[-1] * d * k < out.L // 2:
            # The tail chunk would violate the leaf minimum; fold it into
            # its neighbour exactly as the deletion path would.
            combined = sizes[-2] + sizes[-1]
            if combined * d * k <= 2 * out.L:
                sizes[-2:] = [combined]
            else:
                lh = (combined + 1) // 2
                sizes[-2:] = [lh, combined - lh]
        leaves = []
        at = 0
        for cn in sizes:
            chunk = mat[at:at + cn]
            at += cn
            payload = 0
            for j0 in range(d):
                payload |= B.pack_fields(chunk[:, j0], k) << (j0 * cn * k)
            leaves.append(_SumLeaf(payload, cn))
        out.n = n
        if len(leaves) == 1:
            out.root = leaves[0]
            return out
        level: list = leaves

        def handle_aggregates(h):
            if isinstance(h, _SumLeaf):
                return h.n, out._leaf_totals(h)
            return sum(h.npos.entries), [sum(s.entries) for s in h.sums]

        while len(level) > 1:
            target = (out.b_min + out.b_max) // 2
            count = len(level)
            if count <= out.b_max:
                groups = [level]
            else:
                ng = -(-count // target)
                base, rem = divmod(count, ng)
                groups = []
                at = 0
                for g in range(ng):
                    size = base + (1 if g < rem else 0)
                    groups.append(level[at:at + size])
                    at += size
            nxt = []
            for grp in groups:
                aggs = [handle_aggregates(h) for h in grp]
                node = _SumNode(grp, [a[0] for a in aggs],
                                [[a[1][j0] for a in aggs] for j0 in range(d)])
                nxt.append(node)
            level = nxt
        out.root = level[0]
        out.root.parent = None
        return out

    def to_rows(self) -> np.ndarray:
        """Extract the full (n, d) value matrix."""
        cols = [[] for _ in range(self.d)]

        def walk(node):
            if isinstance(node, _SumNode):
                for ch in node.children:
                    walk(ch)
            else:
                for j0 in range(self.d):
                    cols[j0].append(
                        B.fields_to_array(self._run(node, j0), self.k, node.n))

        walk(self.root)
        if self.n == 0:
            return np.zeros((0, self.d), dtype=np.uint64)
        stacked = [np.concatenate(c).astype(np.uint64) for c in cols]
        return np.stack(stacked, axis=1)

    # ------------------------------------------------------------------
    # diagnostics

    def validate(self) -> list[str]:
        """Structural check; returns a list of violations (empty when clean)."""
        problems: list[str] = []
        leaf_seen = []

        def walk(node, is_root):
            if isinstance(node, _SumLeaf):
                leaf_seen.append(node)
                size = node.n * self.d * self.k
                if node.bits.bit_length() > size:
                    problems.append("leaf payload wider than its position count")
                if size > 2 * self.L:
                    problems.append("leaf above the maximum size")
                if not is_root and size < self.L // 2:
                    problems.append("leaf below the minimum size")
                return node.n, self._leaf_totals(node)
            deg = len(node.children)
            lo = 2 if is_root else self.b_min
            if not lo <= deg <= self.b_max:
                problems.append(f"node degree {deg} outside [{lo}, {self.b_max}]")
            if len(node.npos.entries) != deg or any(
                    len(s.entries) != deg for s in node.sums):
                problems.append("aggregate arity disagrees with child count")
            tot_p = 0
            tot_s = [0] * self.d
            for c, ch in enumerate(node.children):
                if ch.parent is not node:
                    problems.append("broken parent pointer")
                p, s = walk(ch, False)
                if node.npos.entries[c] != p:
                    problems.append(f"position aggregate wrong at child {c}")
                for j0 in range(self.d):
                    if node.sums[j0].entries[c] != s[j0]:
                        problems.append(
                            f"sum aggregate wrong at child {c}, sequence {j0 + 1}")
                tot_p += p
                for j0 in range(self.d):
                    tot_s[j0] += s[j0]
            return tot_p, tot_s

        total_p, _ = walk(self.root, True)
        if total_p != self.n:
            problems.append("stored length disagrees with the tree")
        return problems

    def space_report(self) -> dict:
        payload = self.n * self.d * self.k
        total = measure_bits(self)
        return {"payload_bits": payload,
                "overhead_bits": max(0, total - payload),
                "total_bits": total}
