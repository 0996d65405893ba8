"""Bit-packed buffers and broadword field kernels.

Fields are packed LSB-first throughout this package: bit ``o`` of a
buffer contributes ``2**o`` to the backing integer, and field ``f`` of
width ``w`` occupies bits ``[f*w, (f+1)*w)``.  All kernels accept plain
Python ints of any length, so a whole leaf payload is processed with a
handful of big-integer operations instead of per-field loops.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

WORD = 64

_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
_EXPAND2 = np.array(
    [[(i >> s) & 3 for s in (0, 2, 4, 6)] for i in range(256)], dtype=np.uint8
)
_EXPAND4 = np.array(
    [[(i >> s) & 15 for s in (0, 4)] for i in range(256)], dtype=np.uint8
)

_DTYPES = {8: "<u1", 16: "<u2", 32: "<u4", 64: "<u8"}

_mask_cache: dict[tuple[int, int], tuple[int, int, int]] = {}
_fold_cache: dict[tuple[int, int], int] = {}


def _broadword_masks(width: int, nfields: int) -> tuple[int, int, int]:
    """Return (lo, hi, full) masks covering at least ``nfields`` fields.

    ``lo`` sets bit 0 of every field, ``hi`` the top bit, ``full`` every
    bit.  Masks cover the next power of two of ``nfields`` so the cache
    stays small; callers mask their own prefix.
    """
    padded = 1 << max(0, nfields - 1).bit_length()
    key = (width, padded)
    hit = _mask_cache.get(key)
    if hit is not None:
        return hit
    lo = 1
    span = 1
    while span < padded:
        lo |= lo << (span * width)
        span *= 2
    hi = lo << (width - 1)
    full = (1 << (padded * width)) - 1
    _mask_cache[key] = (lo, hi, full)
    return lo, hi, full


def _zero_field_bits(v: int, width: int, nfields: int, code: int) -> int:
    """Top-of-field indicator bits for fields of ``v`` equal to ``code``.

    ``v`` must already be masked down to ``nfields`` fields.  The
    subtraction never borrows across fields because the top bit of every
    field is forced on first, so the computation is exact for ints of
    any length.
    """
    lo, hi, full = _broadword_masks(width, nfields)
    y = v ^ (lo * code) if code else v
    t = (y | hi) - lo
    z = hi & ((y | t) ^ full)
    return z & ((1 << (width * nfields)) - 1)


def count_code(v: int, width: int, nfields: int, code: int,
               upto: Optional[int] = None) -> int:
    """Count fields equal to ``code`` among the first ``upto`` fields."""
    n = nfields if upto is None else min(upto, nfields)
    if n <= 0:
        return 0
    region = v & ((1 << (width * n)) - 1)
    if width == 1:
        ones = region.bit_count()
        return ones if code else n - ones
    if region == 0:
        return n if code == 0 else 0
    return _zero_field_bits(region, width, n, code).bit_count()


def nth_set_bit(v: int, j: int) -> Optional[int]:
    """Bit index of the j-th set bit of ``v`` (j >= 1), or None."""
    if j <= 0:
        raise ValueError("rank of a set bit must be positive")
    if v == 0:
        return None
    if v.bit_length() <= WORD:
        seen = 0
        x = v
        while x:
            low = x & -x
            seen += 1
            if seen == j:
                return low.bit_length() - 1
            x ^= low
        return None
    raw = v.to_bytes((v.bit_length() + 7) // 8, "little")
    counts = _POP8[np.frombuffer(raw, dtype=np.uint8)]
    cum = counts.cumsum(dtype=np.int64)
    if j > int(cum[-1]):
        return None
    bi = int(np.searchsorted(cum, j, side="left"))
    need = j - (int(cum[bi - 1]) if bi else 0)
    byte = raw[bi]
    for k in range(8):
        if (byte >> k) & 1:
            need -= 1
            if need == 0:
                return bi * 8 + k
    raise AssertionError("unreachable")


def select_code(v: int, width: int, nfields: int, code: int, j: int) -> Optional[int]:
    """0-based index of the j-th field equal to ``code`` (j >= 1), or None."""
    if j <= 0:
        raise ValueError("occurrence rank must be positive")
    if nfields <= 0:
        return None
    region = v & ((1 << (width * nfields)) - 1)
    if width == 1:
        m = (1 << nfields) - 1
        z = region if code else region ^ m
    else:
        z = _zero_field_bits(region, width, nfields, code)
    pos = nth_set_bit(z, j)
    return None if pos is None else pos // width


def _fold_mask(w: int, span_bits: int) -> int:
    """Mask with the low ``w`` bits set in every ``2w`` window."""
    need = max(span_bits, 2 * w)
    cover = 1 << (need - 1).bit_length()
    key = (w, cover)
    hit = _fold_cache.get(key)
    if hit is not None:
        return hit
    m = (1 << w) - 1
    covered = 2 * w
    while covered < cover:
        m |= m << covered
        covered *= 2
    _fold_cache[key] = m
    return m


def sum_fields(v: int, width: int, nfields: int, upto: Optional[int] = None) -> int:
    """Sum of the first ``upto`` fields (all of them by default)."""
    n = nfields if upto is None else min(upto, nfields)
    if n <= 0:
        return 0
    region = v & ((1 << (width * n)) - 1)
    if region == 0:
        return 0
    if width == 1:
        return region.bit_count()
    if width in _DTYPES:
        raw = region.to_bytes(n * (width // 8), "little")
        arr = np.frombuffer(raw, dtype=_DTYPES[width])
        if width == 64:
            return int(arr.astype(object).sum())
        return int(arr.sum(dtype=np.uint64))
    # pairwise fold: add adjacent fields, doubling the field width per round
    w = width
    x = region
    fields = n
    while fields > 1:
        mask = _fold_mask(w, x.bit_length())
        x = (x & mask) + ((x >> w) & mask)
        w *= 2
        fields = (fields + 1) // 2
    return x


def prefix_search_fields(v: int, width: int, nfields: int,
                         target: int) -> Optional[tuple[int, int]]:
    """First 0-based field index where the running field sum reaches ``target``.

    Returns ``(index, sum_before_index)``, or None when the total over
    all ``nfields`` fields falls short.  ``target`` must be >= 1.
    """
    if target <= 0:
        raise ValueError("search target must be positive")
    if nfields <= 0:
        return None
    region = v & ((1 << (width * nfields)) - 1)
    if width == 1:
        pos = nth_set_bit(region, target)
        return None if pos is None else (pos, target - 1)
    if width in _DTYPES and width < 64:
        raw = region.to_bytes(nfields * (width // 8), "little")
        arr = np.frombuffer(raw, dtype=_DTYPES[width])
        cum = arr.cumsum(dtype=np.uint64)
        idx = int(np.searchsorted(cum, target, side="left"))
        if idx >= nfields:
            return None
        before = int(cum[idx - 1]) if idx else 0
        return (idx, before)
    fmask = (1 << width) - 1
    total = 0
    x = region
    for idx in range(nfields):
        fv = x & fmask
        if total + fv >= target:
            return (idx, total)
        total += fv
        x >>= width
    return None


def read_field(v: int, width: int, idx: int) -> int:
    return (v >> (idx * width)) & ((1 << width) - 1)


def write_field(v: int, width: int, idx: int, value: int) -> int:
    off = idx * width
    cur = (v >> off) & ((1 << width) - 1)
    return v ^ ((cur ^ value) << off)


def insert_bits(v: int, offset: int, width: int, value: int) -> int:
    """Splice ``width`` bits holding ``value`` in at ``offset``."""
    low = v & ((1 << offset) - 1)
    return low | (value << offset) | ((v >> offset) << (offset + width))


def delete_bits(v: int, offset: int, width: int) -> tuple[int, int]:
    """Remove ``width`` bits at ``offset``; returns (new_value, removed)."""
    low = v & ((1 << offset) - 1)
    removed = (v >> offset) & ((1 << width) - 1)
    return (low | ((v >> (offset + width)) << offset), removed)


def word_count_code(word: int, width: int, code: int, upto: int) -> int:
    """Count packed fields of ``word`` equal to ``code`` among fields [0, upto)."""
    return count_code(word, width, upto, code)


def word_select_code(word: int, width: int, nfields: int, code: int,
                     j: int) -> Optional[int]:
    """1-based field number of the j-th field equal to ``code``, or None."""
    idx = select_code(word, width, nfields, code, j)
    return None if idx is None else idx + 1


def fields_to_array(v: int, width: int, nfields: int) -> np.ndarray:
    """Unpack ``nfields`` fields into a numpy array (dtype varies by width)."""
    if nfields <= 0:
        return np.zeros(0, dtype=np.uint64)
    span = width * nfields
    region = v & ((1 << span) - 1)
    raw = region.to_bytes((span + 7) // 8, "little")
    if width == 1:
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8),
                             bitorder="little")[:nfields]
    if width == 2:
        return _EXPAND2[np.frombuffer(raw, dtype=np.uint8)].reshape(-1)[:nfields]
    if width == 4:
        return _EXPAND4[np.frombuffer(raw, dtype=np.uint8)].reshape(-1)[:nfields]
    if width in _DTYPES:
        step = width // 8
        if len(raw) % step:
            raw += b"\x00" * (step - len(raw) % step)
        return np.frombuffer(raw, dtype=_DTYPES[width])[:nfields]
    fmask = (1 << width) - 1
    out = np.empty(nfields, dtype=np.uint64)
    x = region
    for i in range(nfields):
        out[i] = x & fmask
        x >>= width
    return out


def pack_fields(values, width: int) -> int:
    """Pack an integer array into an LSB-first field sequence."""
    values = np.asarray(values, dtype=np.uint64)
    n = len(values)
    if n == 0:
        return 0
    if width == 1:
        raw = np.packbits(values.astype(np.uint8), bitorder="little").tobytes()
        return int.from_bytes(raw, "little")
    if width in (2, 4):
        per = 8 // width
        a = values.astype(np.uint8)
        if n % per:
            a = np.concatenate([a, np.zeros(per - n % per, dtype=np.uint8)])
        b = a[0::per].copy()
        for k in range(1, per):
            b |= a[k::per] << (k * width)
        return int.from_bytes(b.tobytes(), "little")
    if width in _DTYPES:
        return int.from_bytes(values.astype(_DTYPES[width]).tobytes(), "little")
    v = 0
    off = 0
    for x in values:
        v |= int(x) << off
        off += width
    return v


class BitBuffer:
    """Growable LSB-first bit buffer backed by a single Python int."""

    __slots__ = ("_v", "_nbits")

    def __init__(self, value: int = 0, nbits: int = 0):
        if value < 0:
            raise ValueError("buffer value must be nonnegative")
        if value.bit_length() > nbits:
            raise ValueError("value does not fit in the stated bit count")
        self._v = value
        self._nbits = nbits

    def __len__(self) -> int:
        return self._nbits

    @property
    def value(self) -> int:
        return self._v

    def read_bits(self, offset: int, width: int) -> int:
        if offset < 0 or width < 0 or offset + width > self._nbits:
            raise ValueError("read outside buffer bounds")
        return (self._v >> offset) & ((1 << width) - 1)

    def write_bits(self, offset: int, width: int, value: int) -> None:
        if offset < 0 or width < 0 or offset + width > self._nbits:
            raise ValueError("write outside buffer bounds")
        if not 0 <= value < (1 << width):
            raise ValueError("value does not fit the field width")
        cur = (self._v >> offset) & ((1 << width) - 1)
        self._v ^= (cur ^ value) << offset

    def shift_insert(self, offset: int, width: int, value: int) -> None:
        if offset < 0 or offset > self._nbits:
            raise ValueError("insert outside buffer bounds")
        if not 0 <= value < (1 << width):
            raise ValueError("value does not fit the field width")
        self._v = insert_bits(self._v, offset, width, value)
        self._nbits += width

    def shift_delete(self, offset: int, width: int) -> int:
        if offset < 0 or width < 0 or offset + width > self._nbits:
            raise ValueError("delete outside buffer bounds")
        self._v, removed = delete_bits(self._v, offset, width)
        self._nbits -= width
        return removed
