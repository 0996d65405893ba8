"""Dynamic wavelet tree over large alphabets.

``WaveletString`` supports access/rank/select/insert/delete for codes up
to 2**32 by decomposing each code into base-q digits (most significant
first) and storing one ``PackedString`` of digits per tree node.  With
the default q=16 a byte alphabet needs two levels and a 32-bit alphabet
eight.  When the whole alphabet fits in one node (sigma <= q) the tree
degenerates to a single string with zero decomposition overhead, which
is also how ``BitVector`` gets its bits.

Children are created lazily on first use and never removed.  Setting
``enable_rebuild`` wraps every node string in a ``Rebuilder`` so that
long-lived instances shed the slack left behind by deletes.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .packed_string import PackedString
from .rebuilding import Rebuilder

DEFAULT_BRANCHING = 16


class _WNode:
    __slots__ = ("string", "children")

    def __init__(self, string):
        self.string = string
        self.children: dict[int, _WNode] = {}


class WaveletString:
    """Mutable code sequence with rank/select over sigma up to 2**32."""

    __slots__ = ("sigma", "q", "qbits", "levels", "enable_rebuild",
                 "string_kwargs", "root")

    def __init__(self, sigma: int, *, q: int = DEFAULT_BRANCHING,
                 enable_rebuild: bool = False, **string_kwargs):
        if not 2 <= sigma <= 1 << 32:
            raise ValueError("alphabet size must be in 2..2**32")
        if q < 2 or q > 64 or q & (q - 1):
            raise ValueError("branching factor must be a power of two in 2..64")
        self.sigma = sigma
        self.q = q
        self.qbits = q.bit_length() - 1
        levels = 1
        cap = q
        while cap < sigma:
            cap *= q
            levels += 1
        self.levels = levels
        self.enable_rebuild = enable_rebuild
        self.string_kwargs = string_kwargs
        self.root = _WNode(self._make_string(self._node_sigma()))

    def _node_sigma(self) -> int:
        return self.sigma if self.levels == 1 else self.q

    def _make_string(self, alpha_size: int):
        kwargs = self.string_kwargs
        if self.enable_rebuild:
            return Rebuilder(lambda: PackedString(alpha_size, **kwargs))
        return PackedString(alpha_size, **kwargs)

    def _digit(self, code: int, depth: int) -> int:
        return (code >> ((self.levels - 1 - depth) * self.qbits)) & (self.q - 1)

    def _check_code(self, alpha: int) -> None:
        if not 0 <= alpha < self.sigma:
            raise ValueError("code out of range for this alphabet")

    @property
    def n(self) -> int:
        return self.root.string.n

    def __len__(self) -> int:
        return self.n

    # ------------------------------------------------------------------
    # queries

    def access(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise ValueError("position out of range")
        if self.levels == 1:
            return self.root.string.access(i)
        node = self.root
        code = 0
        for depth in range(self.levels):
            d = node.string.access(i)
            code = (code << self.qbits) | d
            if depth == self.levels - 1:
                break
            i = node.string.rank(d, i)
            node = node.children[d]
        return code

    def rank(self, alpha: int, i: int) -> int:
        self._check_code(alpha)
        if not 0 <= i <= self.n:
            raise ValueError("position out of range")
        if i == 0:
            return 0
        if self.levels == 1:
            return self.root.string.rank(alpha, i)
        node = self.root
        for depth in range(self.levels):
            d = self._digit(alpha, depth)
            i = node.string.rank(d, i)
            if i == 0:
                return 0
            if depth == self.levels - 1:
                break
            node = node.children.get(d)
            if node is None:
                return 0
        return i

    def select(self, alpha: int, c: int) -> Optional[int]:
        self._check_code(alpha)
        if c <= 0:
            raise ValueError("occurrence rank must be positive")
        if self.levels == 1:
            return self.root.string.select(alpha, c)
        path = []
        node = self.root
        for depth in range(self.levels):
            d = self._digit(alpha, depth)
            path.append((node, d))
            if depth == self.levels - 1:
                break
            node = node.children.get(d)
            if node is None:
                return None
        p: Optional[int] = c
        for node, d in reversed(path):
            p = node.string.select(d, p)
            if p is None:
                return None
        return p

    # ------------------------------------------------------------------
    # updates

    def insert(self, alpha: int, i: int) -> None:
        self._check_code(alpha)
        if not 1 <= i <= self.n + 1:
            raise ValueError("position out of range")
        if self.levels == 1:
            self.root.string.insert(alpha, i)
            return
        node = self.root
        for depth in range(self.levels):
            d = self._digit(alpha, depth)
            node.string.insert(d, i)
            if depth == self.levels - 1:
                break
            i = node.string.rank(d, i)
            child = node.children.get(d)
            if child is None:
                child = _WNode(self._make_string(self.q))
                node.children[d] = child
            node = child

    def delete(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise ValueError("position out of range")
        if self.levels == 1:
            return self.root.string.delete(i)
        node = self.root
        code = 0
        for depth in range(self.levels):
            d = node.string.access(i)
            code = (code << self.qbits) | d
            ci = node.string.rank(d, i)
            node.string.delete(i)
            if depth == self.levels - 1:
                break
            i = ci
            node = node.children[d]
        return code

    # ------------------------------------------------------------------
    # bulk construction and extraction

    @classmethod
    def from_codes(cls, codes, sigma: int, *, q: int = DEFAULT_BRANCHING,
                   enable_rebuild: bool = False, **string_kwargs
                   ) -> "WaveletString":
        out = cls(sigma, q=q, enable_rebuild=enable_rebuild, **string_kwargs)
        arr = np.asarray(codes, dtype=np.uint64)
        if arr.size and int(arr.max()) >= sigma:
            raise ValueError("code out of range for this alphabet")
        if arr.size == 0:
            return out

        def bulk(node_sigma, digits):
            ps = PackedString.from_codes(digits, node_sigma, **string_kwargs)
            if enable_rebuild:
                return Rebuilder(lambda: PackedString(node_sigma, **string_kwargs),
                                 prebuilt=ps)
            return ps

        if out.levels == 1:
            out.root = _WNode(bulk(sigma, arr))
            return out

        def build(sub: np.ndarray, depth: int) -> _WNode:
            shift = (out.levels - 1 - depth) * out.qbits
            digits = (sub >> np.uint64(shift)) & np.uint64(out.q - 1)
            node = _WNode(bulk(out.q, digits))
            if depth < out.levels - 1:
                for d in range(out.q):
                    child_codes = sub[digits == d]
                    if child_codes.size:
                        node.children[d] = build(child_codes, depth + 1)
            return node

        out.root = build(arr, 0)
        return out

    def to_codes(self) -> np.ndarray:
        """The whole sequence as a numpy array of codes (uint64)."""
        if self.levels == 1:
            return self.root.string.to_codes().astype(np.uint64)

        def gather(node: _WNode, depth: int) -> np.ndarray:
            digits = node.string.to_codes().astype(np.uint64)
            shift = (self.levels - 1 - depth) * self.qbits
            out = digits << np.uint64(shift)
            if depth < self.levels - 1:
                for d, child in node.children.items():
                    if child.string.n:
                        mask = digits == d
                        out[mask] |= gather(child, depth + 1)
            return out

        return gather(self.root, 0)

    # ------------------------------------------------------------------
    # diagnostics

    def validate(self) -> list[str]:
        problems: list[str] = []

        def walk(node: _WNode, depth: int, label: str) -> None:
            for p in node.string.validate():
                problems.append(f"node {label}: {p}")
            if depth == self.levels - 1:
                if node.children:
                    problems.append(f"node {label}: children below the last level")
                return
            nn = node.string.n
            for d in range(self.q):
                have = node.string.rank(d, nn) if nn else 0
                child = node.children.get(d)
                child_n = child.string.n if child is not None else 0
                if have != child_n:
                    problems.append(
                        f"node {label}: digit {d} count {have} but child holds "
                        f"{child_n}")
                if child is not None:
                    walk(child, depth + 1, f"{label}.{d}")

        walk(self.root, 0, "root")
        return problems

    def space_report(self) -> dict:
        per_level = [{"level": lv, "nodes": 0, "payload_bits": 0,
                      "overhead_bits": 0, "total_bits": 0}
                     for lv in range(self.levels)]

        def walk(node: _WNode, depth: int) -> None:
            rep = node.string.space_report()
            row = per_level[depth]
            row["nodes"] += 1
            for key in ("payload_bits", "overhead_bits", "total_bits"):
                row[key] += rep[key]
            for child in node.children.values():
                walk(child, depth + 1)

        walk(self.root, 0)
        return {"levels": per_level,
                "payload_bits": sum(r["payload_bits"] for r in per_level),
                "overhead_bits": sum(r["overhead_bits"] for r in per_level),
                "total_bits": sum(r["total_bits"] for r in per_level)}


class BitVector:
    """Dynamic bit sequence; a two-symbol ``WaveletString`` underneath."""

    __slots__ = ("tree",)

    def __init__(self, **kwargs):
        self.tree = WaveletString(2, **kwargs)

    @classmethod
    def from_bits(cls, bits, **kwargs) -> "BitVector":
        out = cls.__new__(cls)
        out.tree = WaveletString.from_codes(np.asarray(bits, dtype=np.uint64),
                                            2, **kwargs)
        return out

    @property
    def n(self) -> int:
        return self.tree.n

    def __len__(self) -> int:
        return self.tree.n

    def access(self, i: int) -> int:
        return self.tree.access(i)

    def rank(self, bit: int, i: int) -> int:
        return self.tree.rank(bit, i)

    def select(self, bit: int, j: int) -> Optional[int]:
        return self.tree.select(bit, j)

    def insert(self, bit: int, i: int) -> None:
        self.tree.insert(bit, i)

    def delete(self, i: int) -> int:
        return self.tree.delete(i)

    def to_bits(self) -> np.ndarray:
        return self.tree.to_codes()

    to_codes = to_bits

    def validate(self) -> list[str]:
        return self.tree.validate()

    def space_report(self) -> dict:
        return self.tree.space_report()
