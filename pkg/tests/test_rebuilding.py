"""Incremental rebuild wrapper: query stitching and epoch accounting."""

import math
import random

import numpy as np

from dynstr.naive import NaiveString
from dynstr.packed_string import PackedString
from dynstr.rebuilding import Rebuilder


def make(min_length=32):
    return Rebuilder(lambda: PackedString(4, L=512, b=2),
                     min_length=min_length)


def test_short_strings_never_migrate():
    rb = Rebuilder(lambda: PackedString(4, L=512, b=2), min_length=1000)
    rng = random.Random(50)
    for i in range(200):
        rb.insert(rng.randrange(4), rng.randrange(1, rb.n + 2))
    assert not rb.migrating
    assert rb.epoch_log == []
    assert rb.n == 200


def test_replay_with_epochs():
    rng = random.Random(51)
    rb = make()
    ref = NaiveString(4)
    for step in range(6000):
        r = rng.random()
        if r < 0.35 or ref.n == 0:
            a = rng.randrange(4)
            i = rng.randrange(1, ref.n + 2)
            rb.insert(a, i)
            ref.insert(a, i)
        elif r < 0.50:
            i = rng.randrange(1, ref.n + 1)
            assert rb.delete(i) == ref.delete(i)
        else:
            i = rng.randrange(1, ref.n + 1)
            assert rb.access(i) == ref.access(i)
            a = rng.randrange(4)
            p = rng.randrange(ref.n + 1)
            assert rb.rank(a, p) == ref.rank(a, p)
            j = rng.randrange(1, ref.n + 1)
            assert rb.select(a, j) == ref.select(a, j)
        assert rb.n == ref.n
        if rb.migrating:
            assert rb.fresh.n + rb.active.n == ref.n
        if step % 499 == 0:
            assert rb.validate() == []
            assert list(rb.to_codes()) == ref.to_list()
    assert list(rb.to_codes()) == ref.to_list()
    assert len(rb.epoch_log) >= 3
    for entry in rb.epoch_log:
        n0 = entry["start_length"]
        assert entry["updates"] <= math.ceil(n0 / 3)
        assert 2 * n0 / 3 <= entry["final_length"] <= 4 * n0 / 3


def test_queries_during_migration():
    # Grow, then force a migration and query across the seam every step.
    rng = random.Random(52)
    rb = make(min_length=64)
    ref = []
    for i in range(300):
        a = rng.randrange(4)
        rb.insert(a, i + 1)
        ref.append(a)
    while not rb.migrating:
        a = rng.randrange(4)
        i = rng.randrange(1, len(ref) + 2)
        rb.insert(a, i)
        ref.insert(i - 1, a)
    seen_mid = False
    while rb.migrating:
        seen_mid = True
        got = list(rb.to_codes())
        assert got == ref
        for _ in range(5):
            i = rng.randrange(1, len(ref) + 1)
            assert rb.access(i) == ref[i - 1]
        a = rng.randrange(4)
        p = rng.randrange(len(ref) + 1)
        assert rb.rank(a, p) == ref[:p].count(a)
        j = rng.randrange(1, 20)
        hits = [ix + 1 for ix, x in enumerate(ref) if x == a]
        want = hits[j - 1] if j <= len(hits) else None
        assert rb.select(a, j) == want
        i = rng.randrange(1, len(ref) + 1)
        a = rng.randrange(4)
        rb.insert(a, i)
        ref.insert(i - 1, a)
    assert seen_mid
    assert rb.validate() == []


def test_prebuilt_wrapping():
    rng = np.random.default_rng(53)
    codes = rng.integers(0, 4, size=5000)
    ps = PackedString.from_codes(codes, sigma=4)
    rb = Rebuilder(lambda: PackedString(4), prebuilt=ps)
    assert rb.n == 5000
    assert rb.sigma == 4
    assert np.array_equal(np.asarray(rb.to_codes(), dtype=np.uint64),
                          codes.astype(np.uint64))
    assert rb.access(17) == int(codes[16])
    assert rb.validate() == []


def test_epoch_log_shape():
    rb = make(min_length=16)
    rng = random.Random(54)
    n = 0
    for _ in range(2000):
        if n and rng.random() < 0.3:
            rb.delete(rng.randrange(1, n + 1))
            n -= 1
        else:
            rb.insert(rng.randrange(4), rng.randrange(1, n + 2))
            n += 1
    assert rb.epoch_log, "expected at least one completed epoch"
    for entry in rb.epoch_log:
        assert set(entry) == {"start_length", "updates", "final_length"}
        assert entry["updates"] >= 1
