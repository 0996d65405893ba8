"""Benchmark harness behind the ``dynstr bench`` command.

Builds one structure per requested size, times each operation kind in a
batch, and emits one record per (structure, op, n) cell.  All randomness
is derived from one seed, so runs are reproducible; ``verify`` replays
every batch against a brute-force reference and raises on the first
disagreement instead of producing records silently built on wrong
answers.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass
from time import perf_counter
from typing import Optional

import numpy as np

from .naive import NaiveParallelSums
from .sumtree import ParallelSums
from .wavelet import BitVector, WaveletString

DEFAULT_SEED = 1729
STRUCTURES = ("bitvec", "string", "cspsi")
CSPSI_ENTRY_WIDTH = 32


class VerificationError(Exception):
    """A benchmark op disagreed with the brute-force reference."""


@dataclass
class BenchRecord:
    structure: str
    op: str
    n: int
    sigma: int
    ops_per_sec: float
    payload_bits: int
    overhead_bits: int
    validator: str

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def _rng_for(seed: int, structure: str, n: int) -> np.random.Generator:
    digest = hashlib.blake2s(f"{seed}:{structure}:{n}".encode(),
                             digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


def _timed(fn, count: int) -> float:
    t0 = perf_counter()
    fn()
    dt = max(perf_counter() - t0, 1e-9)
    return count / dt


def _validator_status(obj) -> str:
    problems = obj.validate()
    return "ok" if not problems else f"violations:{len(problems)}"


# ----------------------------------------------------------------------
# string-like structures (bitvec, string)


def _bench_string(structure: str, n: int, sigma: int, ops: int,
                  rng: np.random.Generator, verify: bool,
                  inject_fault: bool) -> list[BenchRecord]:
    if structure == "bitvec":
        sigma = 2
    codes = rng.integers(0, sigma, size=n, dtype=np.uint64)

    t0 = perf_counter()
    if structure == "bitvec":
        subject = BitVector.from_bits(codes)
    else:
        subject = WaveletString.from_codes(codes, sigma)
    build_rate = n / max(perf_counter() - t0, 1e-9)

    space = subject.space_report()
    reference: Optional[list] = None
    if verify:
        reference = [int(c) for c in codes]
        if inject_fault:
            if reference:
                reference[0] ^= 1
            else:
                raise VerificationError("injected fault on an empty subject")
        got = subject.to_codes()
        if len(got) != len(reference) or not np.array_equal(
                got, np.asarray(reference, dtype=np.uint64)):
            raise VerificationError(
                f"{structure} build at n={n} does not reproduce its input")

    records = [BenchRecord(structure, "build", n, sigma, build_rate,
                           space["payload_bits"], space["overhead_bits"],
                           _validator_status(subject))]
    rates: dict[str, float] = {}

    qn = subject.n
    acc_pos = [int(v) for v in rng.integers(1, qn + 1, size=ops)]
    rates["access"] = _timed(lambda: [subject.access(i) for i in acc_pos], ops)
    if verify:
        ref_np = np.asarray(reference, dtype=np.uint64)
        for i in acc_pos:
            if subject.access(i) != int(ref_np[i - 1]):
                raise VerificationError(f"access({i}) mismatch at n={n}")

    rank_pos = [int(v) for v in rng.integers(0, qn + 1, size=ops)]
    rank_sym = [int(v) for v in rng.integers(0, sigma, size=ops)]
    rates["rank"] = _timed(
        lambda: [subject.rank(a, i) for a, i in zip(rank_sym, rank_pos)], ops)
    if verify:
        for a, i in zip(rank_sym, rank_pos):
            want = int(np.count_nonzero(ref_np[:i] == a))
            if subject.rank(a, i) != want:
                raise VerificationError(f"rank({a}, {i}) mismatch at n={n}")

    sel_sym = [int(v) for v in rng.integers(0, sigma, size=ops)]
    sel_j = [int(v) for v in rng.integers(1, max(2, qn // max(1, sigma)), size=ops)]
    rates["select"] = _timed(
        lambda: [subject.select(a, j) for a, j in zip(sel_sym, sel_j)], ops)
    if verify:
        for a, j in zip(sel_sym, sel_j):
            hits = np.flatnonzero(ref_np == a)
            want = int(hits[j - 1]) + 1 if j <= len(hits) else None
            if subject.select(a, j) != want:
                raise VerificationError(f"select({a}, {j}) mismatch at n={n}")

    ins_sym = [int(v) for v in rng.integers(0, sigma, size=ops)]
    ins_pos = []
    ln = subject.n
    for v in rng.integers(0, 1 << 30, size=ops):
        ln += 1
        ins_pos.append(int(v) % ln + 1)

    def run_inserts():
        for a, i in zip(ins_sym, ins_pos):
            subject.insert(a, i)

    rates["insert"] = _timed(run_inserts, ops)
    if verify:
        for a, i in zip(ins_sym, ins_pos):
            reference.insert(i - 1, a)
        got = subject.to_codes()
        if not np.array_equal(got, np.asarray(reference, dtype=np.uint64)):
            raise VerificationError(f"insert batch diverged at n={n}")

    del_count = min(ops, subject.n)
    del_pos = []
    ln = subject.n
    for v in rng.integers(0, 1 << 30, size=del_count):
        del_pos.append(int(v) % ln + 1)
        ln -= 1

    def run_deletes():
        for i in del_pos:
            subject.delete(i)

    rates["delete"] = _timed(run_deletes, del_count)
    if verify:
        for i in del_pos:
            reference.pop(i - 1)
        got = subject.to_codes()
        if not np.array_equal(got, np.asarray(reference, dtype=np.uint64)):
            raise VerificationError(f"delete batch diverged at n={n}")

    status = _validator_status(subject)
    for op in ("access", "rank", "select", "insert", "delete"):
        records.append(BenchRecord(structure, op, n, sigma, rates[op],
                                   space["payload_bits"],
                                   space["overhead_bits"], status))
    return records


# ----------------------------------------------------------------------
# parallel partial sums


def _bench_cspsi(n: int, d: int, ops: int, rng: np.random.Generator,
                 verify: bool, inject_fault: bool) -> list[BenchRecord]:
    k = CSPSI_ENTRY_WIDTH
    mat = rng.integers(0, 1 << 16, size=(n, d), dtype=np.uint64)

    t0 = perf_counter()
    subject = ParallelSums.from_rows(mat, d=d, k=k)
    build_rate = n / max(perf_counter() - t0, 1e-9)

    space = subject.space_report()
    reference: Optional[NaiveParallelSums] = None
    if verify:
        reference = NaiveParallelSums(d, k)
        for row in mat:
            reference.insert0(reference.n + 1)
            for j0, v in enumerate(row):
                reference.update(j0 + 1, reference.n, int(v))
        if inject_fault:
            reference.update(1, 1, 1 if reference.sum(1, 1) == 0 else -1)
        if not np.array_equal(subject.to_rows(), reference.to_matrix()):
            raise VerificationError(f"cspsi build at n={n} does not "
                                    f"reproduce its input")

    records = [BenchRecord("cspsi", "build", n, d, build_rate,
                           space["payload_bits"], space["overhead_bits"],
                           _validator_status(subject))]
    rates: dict[str, float] = {}

    seqs = [int(v) for v in rng.integers(1, d + 1, size=ops)]
    pos = [int(v) for v in rng.integers(0, n + 1, size=ops)]
    rates["sum"] = _timed(lambda: [subject.sum(j, i)
                                   for j, i in zip(seqs, pos)], ops)
    if verify:
        for j, i in zip(seqs, pos):
            if subject.sum(j, i) != reference.sum(j, i):
                raise VerificationError(f"sum({j}, {i}) mismatch at n={n}")

    targets = []
    for j, v in zip(seqs, rng.random(size=ops)):
        top = subject.total(j)
        targets.append((j, max(1, int(v * (top + 1)))))
    rates["search"] = _timed(lambda: [subject.search(j, x)
                                      for j, x in targets], ops)
    if verify:
        for j, x in targets:
            if subject.search(j, x) != reference.search(j, x):
                raise VerificationError(f"search({j}, {x}) mismatch at n={n}")

    upd = [(int(j), int(i), int(dv) - 8) for j, i, dv in zip(
        rng.integers(1, d + 1, size=ops), rng.integers(1, n + 1, size=ops),
        rng.integers(0, 17, size=ops))]
    live = subject.to_rows().astype(object)
    resolved = []
    for j, i, dv in upd:
        cur = int(live[i - 1, j - 1])
        step = dv if 0 <= cur + dv < (1 << k) else -dv
        live[i - 1, j - 1] = cur + step
        resolved.append((j, i, step))

    def run_updates():
        for j, i, step in resolved:
            subject.update(j, i, step)

    rates["update"] = _timed(run_updates, ops)
    if verify:
        for j, i, step in resolved:
            reference.update(j, i, step)
        if not np.array_equal(subject.to_rows(), reference.to_matrix()):
            raise VerificationError(f"update batch diverged at n={n}")

    ins_pos = []
    ln = subject.n
    for v in rng.integers(0, 1 << 30, size=ops):
        ln += 1
        ins_pos.append(int(v) % ln + 1)

    def run_inserts():
        for i in ins_pos:
            subject.insert(i)

    rates["insert"] = _timed(run_inserts, ops)
    if verify:
        for i in ins_pos:
            reference.insert0(i)
        if not np.array_equal(subject.to_rows(), reference.to_matrix()):
            raise VerificationError(f"insert batch diverged at n={n}")

    def run_deletes():
        for i in reversed(ins_pos):
            subject.delete(i)

    rates["delete"] = _timed(run_deletes, ops)
    if verify:
        for i in reversed(ins_pos):
            reference.delete0(i)
        if not np.array_equal(subject.to_rows(), reference.to_matrix()):
            raise VerificationError(f"delete batch diverged at n={n}")

    status = _validator_status(subject)
    for op in ("sum", "search", "update", "insert", "delete"):
        records.append(BenchRecord("cspsi", op, n, d, rates[op],
                                   space["payload_bits"],
                                   space["overhead_bits"], status))
    return records


# ----------------------------------------------------------------------
# entry points


def run_bench(structure: str, sizes: list[int], *, sigma: int = 256,
              ops: int = 2000, seed: int = DEFAULT_SEED,
              verify: bool = False, inject_fault: bool = False
              ) -> list[BenchRecord]:
    if structure not in STRUCTURES:
        raise ValueError(f"unknown structure {structure!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("sizes must be positive")
    if ops < 1:
        raise ValueError("op count must be positive")
    records: list[BenchRecord] = []
    for n in sizes:
        rng = _rng_for(seed, structure, n)
        if structure == "cspsi":
            d = max(1, min(sigma, 64))
            records.extend(_bench_cspsi(n, d, ops, rng, verify, inject_fault))
        else:
            records.extend(_bench_string(structure, n, sigma, ops, rng,
                                         verify, inject_fault))
    return records


def render_figures(records: list[BenchRecord], outdir: str) -> list[str]:
    """Write throughput and space PNGs for a record set; returns paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(outdir, exist_ok=True)
    written = []

    series: dict[tuple[str, str], list[tuple[int, float]]] = {}
    for rec in records:
        series.setdefault((rec.structure, rec.op), []).append(
            (rec.n, rec.ops_per_sec))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (structure, op), pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o", label=f"{structure}/{op}")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("ops / second")
    ax.set_title("throughput by size")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(outdir, "throughput.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    builds = [r for r in records if r.op == "build"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    labels = [f"{r.structure}\nn={r.n}" for r in builds]
    xs = range(len(builds))
    payload = [r.payload_bits for r in builds]
    overhead = [r.overhead_bits for r in builds]
    ax.bar(xs, payload, label="payload bits")
    ax.bar(xs, overhead, bottom=payload, label="overhead bits")
    ax.set_xticks(list(xs), labels, fontsize=8)
    ax.set_ylabel("bits")
    ax.set_title("space by size")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(outdir, "space.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
