"""Dynamic succinct sequences: rank/select strings, partial sums, and a
self-indexing text collection, all supporting insertions and deletions.

Layering, bottom to top:

- :mod:`dynstr.bits` holds broadword kernels over packed big-int payloads.
- :mod:`dynstr.sums` is one bounded partial-sums array (node aggregates).
- :mod:`dynstr.sumtree` keeps d aligned sequences in one tree (``ParallelSums``).
- :mod:`dynstr.packed_string` stores small-alphabet strings (``PackedString``).
- :mod:`dynstr.rebuilding` migrates strings incrementally (``Rebuilder``).
- :mod:`dynstr.wavelet` scales to big alphabets (``WaveletString``, ``BitVector``).
- :mod:`dynstr.textindex` indexes documents in a dynamic BWT (``TextCollection``).
- :mod:`dynstr.naive` has the brute-force references used by tests and --verify.
- :mod:`dynstr.bench` and :mod:`dynstr.cli` record benchmarks and drive the CLI.
"""

from .bench import BenchRecord, VerificationError, run_bench
from .naive import (NaiveParallelSums, NaiveString, collection_bwt,
                    count_occurrences)
from .packed_string import PackedString
from .rebuilding import Rebuilder
from .space import measure_bits
from .sums import PartialSums
from .sumtree import ParallelSums
from .textindex import TextCollection, dump_index, load_index
from .wavelet import BitVector, WaveletString

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "BitVector",
    "NaiveParallelSums",
    "NaiveString",
    "PackedString",
    "ParallelSums",
    "PartialSums",
    "Rebuilder",
    "TextCollection",
    "VerificationError",
    "WaveletString",
    "collection_bwt",
    "count_occurrences",
    "dump_index",
    "load_index",
    "measure_bits",
    "run_bench",
    "__version__",
]
