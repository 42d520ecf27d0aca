#!/usr/bin/env python3
import pytest
import numpy as np

from sketchbit.sketch.core.hashing import (
    MERSENNE_61,
    FNV64_OFFSET,
    HashFamily,
    HashFamilyFormatException,
    HashSpec,
    HashingException,
    PerfectHashFamily,
    draw_family,
    hash_token,
    tokenize,
    tokenize_text,
)


"""
Tests for sketch.core.hashing module
"""


class TestTokenize:
    """Test 64-bit token digests"""

    def test_empty_token_is_offset_basis(self):
        """Test the digest of no bytes is the FNV offset basis"""
        assert tokenize(b"") == FNV64_OFFSET

    def test_known_vector(self):
        """Test the FNV-1a 64 digest of 'a'"""
        assert tokenize(b"a") == 0xAF63DC4C8601EC8C

    def test_text_matches_utf8_bytes(self):
        """Test text tokens hash their UTF-8 encoding"""
        assert tokenize_text("straße") == tokenize("straße".encode("utf-8"))

    def test_digest_fits_64_bits(self):
        """Test digests stay below 2^64"""
        for word in ["alpha", "beta", "γάμμα", "x" * 1000]:
            assert 0 <= tokenize_text(word) < 2**64


class TestHashSpec:
    """Test a single row hash"""

    def test_bucket_range(self):
        """Test buckets lie in [0, J)"""
        spec = HashSpec(a=12345, b=678, j_buckets=7)
        for token_id in range(200):
            assert 0 <= spec(token_id) < 7

    def test_formula(self):
        """Test h(x) = ((a x + b) mod p) mod J"""
        spec = HashSpec(a=3, b=5, j_buckets=10)
        assert hash_token(spec, 4) == ((3 * 4 + 5) % MERSENNE_61) % 10

    def test_invalid_multiplier(self):
        """Test a = 0 is rejected"""
        with pytest.raises(HashingException):
            HashSpec(a=0, b=1, j_buckets=4)

    def test_invalid_buckets(self):
        """Test J = 0 is rejected"""
        with pytest.raises(HashingException):
            HashSpec(a=1, b=1, j_buckets=0)


class TestHashFamily:
    """Test seeded hash families"""

    def test_deterministic_in_seed(self):
        """Test the same seed draws the same family"""
        assert draw_family(3, 50, seed=11) == draw_family(3, 50, seed=11)

    def test_different_seeds_differ(self):
        """Test different seeds draw different parameters"""
        assert draw_family(3, 50, seed=11).specs != draw_family(3, 50, seed=12).specs

    def test_buckets_one_per_row(self):
        """Test buckets() returns one bucket per row"""
        family = draw_family(4, 9, seed=0)
        buckets = family.buckets(tokenize_text("token"))
        assert len(buckets) == 4
        assert all(0 <= b < 9 for b in buckets)

    def test_numpy_ids_hash_like_python_ints(self):
        """Test numpy integer ids land in the same buckets as Python ints"""
        family = draw_family(2, 320, seed=0)
        for token_id in [5, 12345, 2**40 + 17, tokenize_text("token") >> 1]:
            assert family.buckets(np.int64(token_id)) == family.buckets(token_id)
        assert family.buckets(np.uint64(tokenize_text("token"))) == family.buckets(tokenize_text("token"))

    def test_text_round_trip(self):
        """Test to_text/from_text reproduce the family"""
        family = draw_family(5, 320, seed=2024)
        assert HashFamily.from_text(family.to_text()) == family

    def test_text_header(self):
        """Test the record header is 'N J p seed'"""
        family = draw_family(2, 16, seed=3)
        assert family.to_text().splitlines()[0] == f"2 16 {MERSENNE_61} 3"

    def test_from_text_wrong_row_count(self):
        """Test a record with missing rows is rejected"""
        text = "\n".join(draw_family(3, 8, seed=1).to_text().splitlines()[:-1])
        with pytest.raises(HashFamilyFormatException):
            HashFamily.from_text(text)

    def test_from_text_garbage(self):
        """Test a non-numeric header is rejected"""
        with pytest.raises(HashFamilyFormatException):
            HashFamily.from_text("N J p seed\n1 2\n")

    def test_invalid_sizes(self):
        """Test N = 0 and negative seeds are rejected"""
        with pytest.raises(HashingException):
            draw_family(0, 8, seed=1)
        with pytest.raises(HashingException):
            draw_family(2, 8, seed=-1)

    def test_pairwise_collision_rate(self):
        """Test two fixed ids collide with probability close to 1/J across families"""
        j = 10
        x, y = tokenize_text("left"), tokenize_text("right")
        collisions = 0
        trials = 2000
        for seed in range(trials):
            spec = draw_family(1, j, seed=seed).specs[0]
            collisions += spec(x) == spec(y)
        rate = collisions / trials
        sigma = np.sqrt(0.1 * 0.9 / trials)
        assert rate < 1 / j + 4 * sigma


class TestPerfectHashFamily:
    """Test the idealized i.i.d. family"""

    def test_memoized(self):
        """Test a symbol keeps its buckets"""
        family = PerfectHashFamily(n=3, j=5, seed=7)
        assert family.buckets(42) == family.buckets(42)

    def test_query_order_irrelevant(self):
        """Test buckets depend on (seed, symbol) only"""
        first = PerfectHashFamily(n=2, j=11, seed=1)
        second = PerfectHashFamily(n=2, j=11, seed=1)
        a = [first.buckets(i) for i in range(20)]
        b = [second.buckets(i) for i in reversed(range(20))][::-1]
        assert a == b

    def test_uniform_buckets(self):
        """Test bucket frequencies are close to uniform"""
        family = PerfectHashFamily(n=1, j=4, seed=0)
        counts = np.bincount([family.buckets(i)[0] for i in range(4000)], minlength=4)
        assert np.all(np.abs(counts - 1000) < 4 * np.sqrt(4000 * 0.25 * 0.75))

    def test_invalid(self):
        """Test n = 0 is rejected"""
        with pytest.raises(HashingException):
            PerfectHashFamily(n=0, j=4, seed=0)
