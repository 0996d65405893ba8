"""Dynamic text collection with counting queries over a BWT.

``TextCollection`` keeps a set of documents in a single Burrows-Wheeler
transformed string held in a ``WaveletString``, plus a symbol-frequency
table.  Documents are sequences of codes 1..sigma; code 0 is the
per-document terminator and cannot appear in a document.  Adding a
document threads its characters into the transform back to front with
repeated rank queries, so no suffix sorting ever happens; removing one
walks the same chain in reverse.  Pattern counting is plain backward
search.

Documents are addressed by the integer handle returned on insertion.
The rank of a handle (its 1-based position in insertion order among the
still-present documents) identifies its terminator row inside the
transform.

``dump_index``/``load_index`` serialize a collection whose codes fit in
bytes, for example one built from UTF-8 text.
"""

from __future__ import annotations

import io
import os
import struct
from typing import BinaryIO, Iterable, Sequence, Union

import numpy as np

from .space import measure_bits
from .sums import PartialSums
from .wavelet import WaveletString

MAGIC = b"SUCIDX1"
DEFAULT_SIGMA = 255


class TextCollection:
    """Growable document store answering substring-count queries."""

    __slots__ = ("sigma", "bwt", "counts", "_docs", "_next_handle")

    def __init__(self, sigma: int = DEFAULT_SIGMA, **wavelet_kwargs):
        if not 1 <= sigma <= 65535:
            raise ValueError("alphabet size must be in 1..65535")
        self.sigma = sigma
        self.bwt = WaveletString(sigma + 1, **wavelet_kwargs)
        self.counts = PartialSums([0] * (sigma + 1), bits=64)
        self._docs: list[int] = []
        self._next_handle = 1

    # ------------------------------------------------------------------
    # bookkeeping

    def _smaller(self, c: int) -> int:
        """Occurrences of codes strictly below c in the whole transform."""
        return self.counts.sum(c)

    def _rank_of(self, handle: int) -> int:
        try:
            return self._docs.index(handle) + 1
        except ValueError:
            raise ValueError(f"unknown document handle {handle}") from None

    @property
    def document_count(self) -> int:
        return len(self._docs)

    def document_handles(self) -> list[int]:
        return list(self._docs)

    def _check_doc(self, codes: Sequence[int]) -> None:
        if len(codes) == 0:
            raise ValueError("documents must not be empty")
        for c in codes:
            if not 1 <= c <= self.sigma:
                raise ValueError("document code out of range")

    # ------------------------------------------------------------------
    # updates

    def insert_document(self, codes: Sequence[int]) -> int:
        """Add a document; returns a stable handle for later removal."""
        codes = list(codes)
        self._check_doc(codes)
        p = len(self._docs) + 1
        c = codes[-1]
        self.bwt.insert(c, p)
        self.counts.update(c + 1, +1)
        for t in range(len(codes) - 2, -1, -1):
            prior = codes[t + 1]
            p = self._smaller(prior) + 1 + self.bwt.rank(prior, p)
            self.bwt.insert(codes[t], p)
            self.counts.update(codes[t] + 1, +1)
        prior = codes[0]
        p = self._smaller(prior) + 1 + self.bwt.rank(prior, p)
        self.bwt.insert(0, p)
        self.counts.update(1, +1)
        handle = self._next_handle
        self._next_handle += 1
        self._docs.append(handle)
        return handle

    def delete_document(self, handle: int) -> None:
        """Remove the document behind a handle from the transform."""
        g = self._rank_of(handle)
        r = g
        while True:
            c = self.bwt.access(r)
            if c == 0:
                self.bwt.delete(r)
                self.counts.update(1, -1)
                break
            # Row of the suffix beginning with this character, in the
            # indexing that holds once the current row is gone.  Every
            # row already removed on this walk sits either below that
            # target in first-column order or above it entirely, and the
            # two effects cancel down to a constant shift of one (the
            # target always lies past the terminator block).
            nxt = self._smaller(c) + self.bwt.rank(c, r) - 1
            self.bwt.delete(r)
            self.counts.update(c + 1, -1)
            r = nxt
        self._docs.remove(handle)

    # ------------------------------------------------------------------
    # queries

    def count(self, pattern: Sequence[int]) -> int:
        """Number of occurrences of pattern across all documents."""
        pattern = list(pattern)
        if len(pattern) == 0:
            raise ValueError("pattern must not be empty")
        sp, ep = 1, self.bwt.n
        for c in reversed(pattern):
            if not 1 <= c <= self.sigma:
                return 0
            base = self._smaller(c)
            sp = base + self.bwt.rank(c, sp - 1) + 1
            ep = base + self.bwt.rank(c, ep)
            if sp > ep:
                return 0
        return ep - sp + 1

    def extract_document(self, handle: int) -> list[int]:
        """Recover the full code sequence of a stored document."""
        r = self._rank_of(handle)
        out: list[int] = []
        while True:
            c = self.bwt.access(r)
            if c == 0:
                break
            out.append(c)
            r = self._smaller(c) + self.bwt.rank(c, r)
        out.reverse()
        return out

    def bwt_codes(self) -> np.ndarray:
        """The current transform contents (terminators are code 0)."""
        return self.bwt.to_codes()

    # ------------------------------------------------------------------
    # diagnostics

    def validate(self) -> list[str]:
        problems = [f"transform: {p}" for p in self.bwt.validate()]
        codes = self.bwt.to_codes().astype(np.int64)
        freq = np.bincount(codes, minlength=self.sigma + 1) if codes.size \
            else np.zeros(self.sigma + 1, dtype=np.int64)
        stored = np.fromiter(self.counts, count=self.sigma + 1, dtype=np.int64)
        if not np.array_equal(freq, stored):
            problems.append("symbol frequency table disagrees with transform")
        if stored[0] != len(self._docs):
            problems.append("terminator count disagrees with document registry")
        if len(set(self._docs)) != len(self._docs):
            problems.append("duplicate document handles")
        return problems

    def space_report(self) -> dict:
        rep = self.bwt.space_report()
        extra = measure_bits(self.counts) + measure_bits(self._docs)
        return {"payload_bits": rep["payload_bits"],
                "overhead_bits": rep["overhead_bits"] + extra,
                "total_bits": rep["total_bits"] + extra}


# ----------------------------------------------------------------------
# byte-oriented serialization

PathOrFile = Union[str, os.PathLike, BinaryIO]


def _doc_bytes(codes: Iterable[int]) -> bytes:
    try:
        return bytes(codes)
    except ValueError:
        raise ValueError("document codes above 255 cannot be serialized") from None


def dump_index(collection: TextCollection, dest: PathOrFile) -> None:
    """Write a collection to the SUCIDX1 byte format."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "wb") as fp:
            dump_index(collection, fp)
        return
    handles = collection.document_handles()
    dest.write(MAGIC)
    dest.write(struct.pack("<I", len(handles)))
    for handle in handles:
        payload = _doc_bytes(collection.extract_document(handle))
        dest.write(struct.pack("<Q", len(payload)))
        dest.write(payload)


def load_index(src: PathOrFile, sigma: int = DEFAULT_SIGMA,
               **kwargs) -> TextCollection:
    """Read a SUCIDX1 file back into a live collection."""
    if isinstance(src, (str, os.PathLike)):
        with open(src, "rb") as fp:
            return load_index(fp, sigma, **kwargs)
    head = src.read(len(MAGIC))
    if head != MAGIC:
        raise ValueError("not a SUCIDX1 index file")
    raw = src.read(4)
    if len(raw) < 4:
        raise ValueError("truncated index file: missing document count")
    (ndocs,) = struct.unpack("<I", raw)
    out = TextCollection(sigma, **kwargs)
    for d in range(ndocs):
        raw = src.read(8)
        if len(raw) < 8:
            raise ValueError(f"truncated index file: missing length of "
                             f"document {d + 1}")
        (length,) = struct.unpack("<Q", raw)
        payload = src.read(length)
        if len(payload) < length:
            raise ValueError(f"truncated index file: document {d + 1} cut short")
        out.insert_document(payload)
    return out
