#!/usr/bin/env python3
import pytest
import numpy as np

from sketchbit.sketch.core.count_min import HashedRow
from sketchbit.bnp.core.models import PypParams
from sketchbit.bnp.core.oracle import enumeration_oracle
from sketchbit.bnp.core.range_query import (
    JointPosterior2,
    RangeQueryException,
    dp_pair_marginal_log_pmf,
    dp_range2_multi,
    dp_range2_single,
    range2_estimate,
    range_sum_posterior,
)


"""
Tests for bnp.core.range_query module
"""


class TestPairPosterior:
    """Test the joint posterior of two query frequencies"""

    def test_hand_computed_values(self):
        """Test one token, two buckets, theta = 1, both counters at one"""
        joint = dp_range2_single(1.0, 2, 1, 1, 1).probs
        assert joint[1, 1] == pytest.approx(8.0 / 15.0)
        assert joint[0, 0] == pytest.approx(0.2)
        assert joint.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("m", [3, 5, 8])
    @pytest.mark.parametrize("j", [2, 3])
    @pytest.mark.parametrize("theta", [0.5, 1.0, 5.0])
    def test_matches_enumeration(self, m, j, theta):
        """Test every reachable pair of counts against exhaustive enumeration"""
        law = enumeration_oracle(m, j, PypParams(0.0, theta), s=2)
        for c1 in range(m + 1):
            for c2 in range(m + 1):
                if law.table[:, :, c1, c2].sum() <= 0:
                    continue
                expected = law.conditional_pair([(c1, c2)])
                actual = dp_range2_single(theta, j, m, c1, c2).probs
                assert np.allclose(actual, expected[: c1 + 1, : c2 + 1], atol=1e-10)
                assert expected[c1 + 1 :, :].sum() == pytest.approx(0.0, abs=1e-14)
                assert expected[:, c2 + 1 :].sum() == pytest.approx(0.0, abs=1e-14)

    def test_prior_pair_law(self):
        """Test the prior law of two new draws against enumeration"""
        theta, m = 1.5, 4
        law = enumeration_oracle(m, 1, PypParams(0.0, theta), s=2).frequency_law
        assert np.allclose(np.exp(dp_pair_marginal_log_pmf(m, theta)), law, atol=1e-12)

    def test_marginals(self):
        """Test each marginal is a proper posterior on its own support"""
        joint = dp_range2_single(2.0, 4, 20, 6, 9)
        first, second = joint.marginal(0), joint.marginal(1)
        assert first.support_max == 6 and second.support_max == 9
        assert first.probs.sum() == pytest.approx(1.0)
        assert second.probs.sum() == pytest.approx(1.0)

    def test_impossible_distinct_counts(self):
        """Test distinct-bucket counts summing past m are rejected"""
        with pytest.raises(RangeQueryException):
            dp_range2_single(1.0, 4, 5, 3, 4)

    def test_needs_two_buckets(self):
        """Test J = 1 is rejected"""
        with pytest.raises(RangeQueryException):
            dp_range2_single(1.0, 1, 5, 5, 5)

    def test_bad_axis(self):
        """Test marginal axes other than 0 and 1 are rejected"""
        with pytest.raises(RangeQueryException):
            dp_range2_single(1.0, 2, 3, 1, 1).marginal(2)


class TestRangeSum:
    """Test the posterior of f_v1 + f_v2"""

    def test_sum_support_and_mass(self):
        """Test the sum runs over 0..L1+L2 and is normalized"""
        joint = dp_range2_single(1.0, 3, 10, 2, 4)
        total = range_sum_posterior(joint)
        assert total.support_max == 6
        assert total.probs.sum() == pytest.approx(1.0)

    def test_sum_by_hand(self):
        """Test anti-diagonal sums on a small table"""
        joint = JointPosterior2.from_log_weights(np.log(np.array([[1.0, 2.0], [3.0, 4.0]])))
        assert np.allclose(range_sum_posterior(joint).probs, [0.1, 0.5, 0.4])

    def test_estimate_mean(self):
        """Test the mean of the sum is the sum of marginal means"""
        rows = (HashedRow.of([5, 7]), HashedRow.of([3, 6]))
        joint = dp_range2_multi(1.0, 8, 40, rows)
        expected = joint.marginal(0).mean() + joint.marginal(1).mean()
        assert range2_estimate(1.0, 8, 40, rows) == pytest.approx(expected)


class TestMultiHashRange:
    """Test 2-range posteriors from several hashes"""

    def test_one_hash_matches_single(self):
        """Test N = 1 reproduces the single-hash joint posterior"""
        multi = dp_range2_multi(2.0, 5, 30, ([4], [7]))
        assert np.allclose(multi.probs, dp_range2_single(2.0, 5, 30, 4, 7).probs)

    def test_support_is_min_per_query(self):
        """Test each axis stops at the smallest counter of its query"""
        joint = dp_range2_multi(1.0, 10, 50, ([9, 4], [6, 8]))
        assert joint.support == (4, 6)

    def test_corrected_product_normalized(self):
        """Test exact_correction still yields a proper posterior"""
        joint = dp_range2_multi(1.0, 10, 50, ([9, 4], [6, 8]), exact_correction=True)
        assert joint.probs.sum() == pytest.approx(1.0)

    def test_row_lengths_must_match(self):
        """Test hashed rows of different lengths are rejected"""
        with pytest.raises(RangeQueryException):
            dp_range2_multi(1.0, 4, 10, ([1, 2], [3]))
