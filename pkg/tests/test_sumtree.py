"""Tree-backed parallel partial sums against the flat reference model."""

import random

import numpy as np
import pytest

from dynstr.naive import NaiveParallelSums
from dynstr.sumtree import ParallelSums


def test_known_two_sequence_example():
    ps = ParallelSums.from_rows([[1, 0], [2, 5], [3, 0]], d=2, k=16)
    assert ps.n == 3
    assert ps.sum(1, 2) == 3
    assert ps.sum(2, 3) == 5
    assert ps.search(2, 5) == 2
    assert ps.search(1, 4) == 3
    assert ps.search(1, 7) is None
    with pytest.raises(ValueError):
        ps.search(1, 0)
    ps.update(1, 2, 4)
    assert ps.sum(1, 3) == 10
    ps.insert(2)
    assert ps.to_rows().tolist() == [[1, 0], [0, 0], [6, 5], [3, 0]]
    assert ps.validate() == []


def test_payload_accounting():
    ps = ParallelSums(d=2, k=8)
    for _ in range(1000):
        ps.insert(1)
    report = ps.space_report()
    assert report["payload_bits"] == 16000
    # all-zero rows measure below the nominal payload, so overhead clamps at 0
    assert report["overhead_bits"] == max(
        0, report["total_bits"] - report["payload_bits"])


def test_delete_requires_zero_row():
    ps = ParallelSums.from_rows([[1], [0], [2]], d=1, k=8)
    with pytest.raises(ValueError):
        ps.delete(1)
    ps.delete(2)
    assert ps.to_rows().tolist() == [[1], [2]]
    with pytest.raises(ValueError):
        ps.delete(3)


def test_update_range_checks():
    ps = ParallelSums.from_rows([[3, 1]], d=2, k=4)
    with pytest.raises(ValueError):
        ps.update(1, 1, 13)  # 3 + 13 = 16 does not fit 4 bits
    with pytest.raises(ValueError):
        ps.update(1, 1, -4)
    with pytest.raises(ValueError):
        ps.update(3, 1, 1)  # no such sequence
    with pytest.raises(ValueError):
        ps.update(1, 2, 1)  # no such position
    ps.update(1, 1, 12)
    assert ps.total(1) == 15


def test_constructor_validation():
    with pytest.raises(ValueError):
        ParallelSums(d=0, k=8)
    with pytest.raises(ValueError):
        ParallelSums(d=65, k=8)
    with pytest.raises(ValueError):
        ParallelSums(d=1, k=0)
    with pytest.raises(ValueError):
        ParallelSums(d=1, k=65)
    with pytest.raises(ValueError):
        ParallelSums(d=64, k=64, L=4096)  # d*k exceeds L/2
    with pytest.raises(ValueError):
        ParallelSums(d=1, k=8, b_min=8, b_max=20)


def test_from_rows_to_rows_roundtrip():
    rng = np.random.default_rng(31)
    for d, k in ((1, 1), (4, 7), (8, 16)):
        rows = rng.integers(0, 1 << min(k, 30), size=(257, d), dtype=np.uint64)
        ps = ParallelSums.from_rows(rows, d=d, k=k, L=512, block_bits=128)
        assert ps.validate() == []
        assert np.array_equal(ps.to_rows(), rows)
        assert ps.total(d) == int(rows[:, d - 1].sum())


@pytest.mark.parametrize("d,k,L", [(1, 1, 512), (2, 8, 512), (3, 5, 512),
                                   (8, 32, 512), (32, 16, 2048)])
def test_randomized_against_reference(d, k, L):
    rng = random.Random(1000 * d + k)
    ps = ParallelSums(d=d, k=k, L=L, block_bits=128, b_min=2)
    ref = NaiveParallelSums(d, k)
    cap = 1 << k
    for step in range(2500):
        r = rng.random()
        if r < 0.35 or ref.n == 0:
            i = rng.randrange(1, ref.n + 2)
            ps.insert(i)
            ref.insert0(i)
        elif r < 0.55:
            mat = ref.to_matrix()
            zeros = [i + 1 for i in range(ref.n) if not mat[i].any()]
            if zeros:
                i = rng.choice(zeros)
                ps.delete(i)
                ref.delete0(i)
        else:
            j = rng.randrange(1, d + 1)
            i = rng.randrange(1, ref.n + 1)
            cur = int(ref.to_matrix()[i - 1][j - 1])
            delta = rng.randrange(-cur, min(cap - cur, 1 << min(k, 12)))
            ps.update(j, i, delta)
            ref.update(j, i, delta)
        assert ps.n == ref.n
        j = rng.randrange(1, d + 1)
        i = rng.randrange(ref.n + 1)
        assert ps.sum(j, i) == ref.sum(j, i)
        total = ref.sum(j, ref.n)
        if total:
            x = rng.randrange(1, total + 1)
            assert ps.search(j, x) == ref.search(j, x)
            assert ps.search(j, total + 1) is None
        if step % 500 == 499:
            assert ps.validate() == []
            assert np.array_equal(ps.to_rows(), ref.to_matrix())
    assert ps.validate() == []
    assert np.array_equal(ps.to_rows(), ref.to_matrix())


def test_validator_reports_corruption():
    ps = ParallelSums.from_rows([[i] for i in range(200)], d=1, k=16,
                                L=512, block_bits=128, b_min=2)
    assert ps.validate() == []
    ps.n += 1  # stored length no longer matches the tree
    assert ps.validate() != []
