#!/usr/bin/env python3
import pytest
import numpy as np
from collections import Counter

from sketchbit.sketch.core.hashing import PerfectHashFamily, draw_family
from sketchbit.sketch.core.count_min import (
    CountMinSketch,
    HashedRow,
    SketchException,
    SketchFormatException,
    cmm_estimate,
    cms_estimate,
    hashed_row,
    update,
)


"""
Tests for sketch.core.count_min module
"""


class TestUpdate:
    """Test ingestion"""

    @pytest.fixture
    def sketch(self):
        """Create a small sketch"""
        return CountMinSketch.from_seed(3, 16, seed=5)

    def test_single_update(self, sketch):
        """Test one update adds one to every row"""
        update(sketch, 99)
        assert sketch.m == 1
        assert sketch.counts.sum(axis=1).tolist() == [1, 1, 1]
        for row, bucket in enumerate(sketch.family.buckets(99)):
            assert sketch.counts[row, bucket] == 1

    def test_row_sums_equal_m(self, sketch):
        """Test every row sums to m"""
        for token_id in range(500):
            sketch.update(token_id % 37)
        assert np.all(sketch.counts.sum(axis=1) == 500)

    def test_update_many_matches_update(self):
        """Test batch ingestion equals repeated updates"""
        ids = [i % 13 for i in range(300)] + [7] * 40
        one = CountMinSketch.from_seed(2, 10, seed=1)
        for token_id in ids:
            one.update(token_id)
        many = CountMinSketch.from_seed(2, 10, seed=1)
        many.update_many(ids)
        assert np.array_equal(one.counts, many.counts)
        assert one.m == many.m

    def test_update_many_numpy_ids(self):
        """Test an int64 array ingests exactly like the same ids as a list"""
        ids = np.random.default_rng(4).integers(0, 5000, size=3000, dtype=np.int64)
        from_array = CountMinSketch.from_seed(2, 64, seed=9)
        from_array.update_many(ids)
        from_list = CountMinSketch.from_seed(2, 64, seed=9)
        from_list.update_many(ids.tolist())
        assert np.array_equal(from_array.counts, from_list.counts)
        for token_id in ids[:50]:
            assert from_array.hashed_row(token_id).values.tolist() == from_list.hashed_row(int(token_id)).values.tolist()

    def test_update_many_empty(self, sketch):
        """Test an empty batch is a no-op"""
        sketch.update_many([])
        assert sketch.m == 0

    def test_perfect_family(self):
        """Test a sketch can run on the perfect hash family"""
        sketch = CountMinSketch(PerfectHashFamily(n=2, j=8, seed=3))
        sketch.update_many(range(100))
        assert np.all(sketch.counts.sum(axis=1) == 100)


class TestQuery:
    """Test hashed rows and point estimates"""

    def test_hashed_row(self):
        """Test the hashed row reads one counter per row"""
        sketch = CountMinSketch.from_seed(2, 4, seed=0)
        sketch.update_many([1, 1, 2])
        row = hashed_row(sketch, 1)
        assert row.n == 2
        assert np.all(row.values >= 2)

    def test_cms_never_underestimates(self):
        """Test f_hat >= f for every token"""
        rng = np.random.default_rng(0)
        ids = rng.integers(0, 300, size=3000).tolist()
        truth = Counter(ids)
        sketch = CountMinSketch.from_seed(3, 20, seed=9)
        sketch.update_many(ids)
        for token_id, f in truth.items():
            assert cms_estimate(sketch.hashed_row(token_id)) >= f

    def test_cmm_clamped(self):
        """Test CMM lies in [0, CMS]"""
        row = HashedRow.of([5, 9])
        value = cmm_estimate(row, m=20, j=4)
        assert 0.0 <= value <= 5.0

    def test_cmm_formula(self):
        """Test CMM is the median of noise-corrected counters"""
        row = HashedRow.of([10, 12, 11])
        m, j = 40, 5
        expected = np.median([c - (m - c) / (j - 1) for c in (10, 12, 11)])
        assert cmm_estimate(row, m, j) == pytest.approx(min(expected, 10.0))

    def test_cmm_needs_two_buckets(self):
        """Test J = 1 is rejected"""
        with pytest.raises(SketchException):
            cmm_estimate(HashedRow.of([3]), m=3, j=1)

    def test_negative_row_rejected(self):
        """Test negative hashed counts are rejected"""
        with pytest.raises(SketchException):
            HashedRow.of([1, -1])


class TestMerge:
    """Test linearity"""

    def test_merge_adds_cells(self):
        """Test the sketch of a concatenation is the sum of sketches"""
        left = CountMinSketch.from_seed(2, 8, seed=4)
        right = CountMinSketch.from_seed(2, 8, seed=4)
        both = CountMinSketch.from_seed(2, 8, seed=4)
        left.update_many(range(50))
        right.update_many(range(25, 90))
        both.update_many(list(range(50)) + list(range(25, 90)))
        merged = left.merge(right)
        assert np.array_equal(merged.counts, both.counts)
        assert merged.m == both.m

    def test_merge_family_mismatch(self):
        """Test sketches from different families cannot merge"""
        with pytest.raises(SketchException):
            CountMinSketch.from_seed(2, 8, seed=1).merge(CountMinSketch.from_seed(2, 8, seed=2))


class TestSnapshot:
    """Test save and load"""

    def test_round_trip(self, tmp_path):
        """Test a snapshot reloads to the same sketch"""
        sketch = CountMinSketch.from_seed(3, 12, seed=77)
        sketch.update_many(range(200))
        path = tmp_path / "sketch.cms"
        sketch.save(path)
        loaded = CountMinSketch.load(path)
        assert loaded.family == sketch.family
        assert loaded.m == 200
        assert np.array_equal(loaded.counts, sketch.counts)

    def test_header(self, tmp_path):
        """Test the snapshot header is 'N J m seed'"""
        sketch = CountMinSketch.from_seed(2, 5, seed=8)
        sketch.update_many([1, 2, 3])
        path = tmp_path / "s.cms"
        sketch.save(path)
        assert path.read_text().splitlines()[0] == "2 5 3 8"

    def test_bad_row_reports_line(self, tmp_path):
        """Test a malformed count row names its line"""
        path = tmp_path / "bad.cms"
        path.write_text("2 3 2 0\n1 1 0\n1 x 1\n")
        with pytest.raises(SketchFormatException, match=":3:"):
            CountMinSketch.load(path)

    def test_row_sum_mismatch(self, tmp_path):
        """Test rows must sum to m"""
        path = tmp_path / "bad.cms"
        path.write_text("1 3 5 0\n1 1 1\n")
        with pytest.raises(SketchFormatException, match=":2:"):
            CountMinSketch.load(path)

    def test_missing_file(self, tmp_path):
        """Test an unreadable snapshot raises a format error"""
        with pytest.raises(SketchFormatException):
            CountMinSketch.load(tmp_path / "missing.cms")

    def test_perfect_family_not_saved(self, tmp_path):
        """Test perfect-hash sketches cannot be saved"""
        sketch = CountMinSketch(PerfectHashFamily(n=1, j=2, seed=0))
        with pytest.raises(SketchException):
            sketch.save(tmp_path / "p.cms")


class TestErrorGuarantee:
    """Test the classic (epsilon, delta) guarantee"""

    @pytest.mark.slow
    def test_guarantee_holds(self):
        """Test Pr[f_hat <= f + 0.05 m] >= 0.95 with J = 55, N = 3"""
        m, streams = 10_000, 200
        within = 0
        for seed in range(streams):
            rng = np.random.default_rng(seed)
            ids = rng.integers(0, 2000, size=m)
            f = int(np.sum(ids == 0))
            sketch = CountMinSketch(draw_family(3, 55, seed=seed))
            sketch.update_many(ids.tolist())
            estimate = cms_estimate(sketch.hashed_row(0))
            assert estimate >= f
            within += estimate <= f + 0.05 * m
        rate = within / streams
        assert rate >= 0.95 - 3 * np.sqrt(0.95 * 0.05 / streams)
