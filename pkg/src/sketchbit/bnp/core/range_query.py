#!/usr/bin/env python3
"""
Joint posterior of the frequencies of two query tokens under a DP prior,
and the induced posterior of their sum (a 2-range query).
"""
import math
import logging
import numpy as np
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union
from scipy.special import gammaln, logsumexp

from sketchbit.errors import SketchBitUsageError
from sketchbit.sketch.core.count_min import HashedRow
from sketchbit.bnp.core.models import dp_marginal_log_pmf
from sketchbit.bnp.core.posterior_dp import PosteriorPmf, posterior_summary

logger = logging.getLogger("sketchbit.bnp.range_query")

AnyRow = Union[HashedRow, Sequence[int]]


class RangeQueryException(SketchBitUsageError):
    """Invalid 2-range query"""

    pass


@dataclass(frozen=True)
class JointPosterior2:
    """Normalized log-pmf over (l1, l2) in [0..L1] x [0..L2]"""

    log_probs: np.ndarray

    def __post_init__(self) -> None:
        if self.log_probs.ndim != 2 or self.log_probs.size == 0:
            raise RangeQueryException("Joint posterior needs a non-empty 2-D support")

    @classmethod
    def from_log_weights(cls, log_weights: np.ndarray) -> "JointPosterior2":
        log_weights = np.asarray(log_weights, dtype=float)
        total = logsumexp(log_weights)
        if not np.isfinite(total):
            raise RangeQueryException("Joint posterior weights vanish on the whole support")
        return cls(log_probs=log_weights - total)

    @property
    def support(self) -> Tuple[int, int]:
        rows, cols = self.log_probs.shape
        return rows - 1, cols - 1

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def marginal(self, axis: int) -> PosteriorPmf:
        """Posterior of l1 (axis=0) or l2 (axis=1)"""
        if axis not in (0, 1):
            raise RangeQueryException(f"axis must be 0 or 1, got {axis}")
        with np.errstate(divide="ignore"):
            log_marginal = np.log(self.probs.sum(axis=1 - axis))
        return PosteriorPmf(log_probs=log_marginal)


def _log_rising(base: float, n: Union[int, np.ndarray]) -> np.ndarray:
    """log (base)_(n) with (0)_(0) = 1 and (0)_(n) = 0 for n >= 1; -inf for n < 0"""
    n = np.atleast_1d(np.asarray(n, dtype=float))
    out = np.full(n.shape, -np.inf)
    out[n == 0] = 0.0
    if base > 0:
        live = n > 0
        out[live] = gammaln(base + n[live]) - gammaln(base)
    return out


def _log_inverse_factorial(n: Union[int, np.ndarray]) -> np.ndarray:
    """log 1/n!, with 1/n! = 0 for negative n"""
    n = np.atleast_1d(np.asarray(n, dtype=float))
    out = np.full(n.shape, -np.inf)
    live = n >= 0
    out[live] = -gammaln(n[live] + 1.0)
    return out


def _log_term(base: float, n: Union[int, np.ndarray]) -> np.ndarray:
    """log[(base)_(n) / n!]"""
    return _log_rising(base, n) + _log_inverse_factorial(n)


def _check_range_args(theta: float, j: int, m: int, c1: int, c2: int) -> None:
    if theta <= 0:
        raise RangeQueryException(f"theta must be positive, got {theta}")
    if j < 2:
        raise RangeQueryException(f"2-range queries need J >= 2, got J={j}")
    if min(c1, c2) < 0 or max(c1, c2) > m:
        raise RangeQueryException(f"Hashed counts ({c1}, {c2}) must lie in [0, m={m}]")
    if c1 != c2 and c1 + c2 > m:
        raise RangeQueryException(
            f"Hashed counts ({c1}, {c2}) in distinct buckets exceed m={m}: zero-probability configuration"
        )


def dp_range2_log_kernel(
    theta: float,
    j: int,
    m: int,
    c1: int,
    c2: int,
    l1_max: Optional[int] = None,
    l2_max: Optional[int] = None,
) -> np.ndarray:
    """
    log Pr[f1 = l1, f2 = l2 | C_1 = c1, C_2 = c2] on [0..L1] x [0..L2].

    Three numerator terms: both queries are the same token (c1 = c2, l1 = l2),
    two tokens sharing a bucket (c1 = c2), two tokens in distinct buckets.
    The denominator holds the shared and distinct bucket cases.
    """
    _check_range_args(theta, j, m, c1, c2)
    top1 = c1 if l1_max is None else min(c1, l1_max)
    top2 = c2 if l2_max is None else min(c2, l2_max)
    a = theta / j
    rest_one = theta - a
    rest_two = theta - 2.0 * a
    log_theta = math.log(theta)
    shared = c1 == c2
    c = c1
    both = np.array([c1, c2], dtype=float)
    outside_two = float(_log_term(rest_two, m - c1 - c2)[0])
    outside_one = float(_log_term(rest_one, m - c)[0])

    log_den = (
        math.log(j)
        + math.log(j - 1)
        + float(np.sum(_log_rising(a, both + 1) + _log_inverse_factorial(both)))
        + outside_two
    )
    if shared:
        log_den_shared = (
            math.log(j)
            + float(_log_rising(a, c + 2)[0])
            + float(_log_inverse_factorial(c)[0])
            + outside_one
        )
        log_den = float(np.logaddexp(log_den, log_den_shared))
    if not np.isfinite(log_den):
        raise RangeQueryException(f"Hashed counts ({c1}, {c2}) have zero probability at m={m}")

    l1 = np.arange(top1 + 1)[:, None]
    l2 = np.arange(top2 + 1)[None, :]
    log_num = np.broadcast_to(
        math.log1p(-1.0 / j)
        + 2.0 * log_theta
        + _log_term(a, c1 - l1)
        + _log_term(a, c2 - l2)
        + outside_two,
        (top1 + 1, top2 + 1),
    ).copy()
    if shared:
        two_tokens = 2.0 * log_theta - math.log(j) + _log_term(a, c - l1 - l2) + outside_one
        log_num = np.logaddexp(log_num, two_tokens)
        diagonal = np.arange(min(top1, top2) + 1)
        same_token = log_theta + np.log(diagonal + 1.0) + _log_term(a, c - diagonal) + outside_one
        log_num[diagonal, diagonal] = np.logaddexp(log_num[diagonal, diagonal], same_token)
    return log_num - log_den


def dp_range2_single(theta: float, j: int, m: int, c1: int, c2: int) -> JointPosterior2:
    """Pr[f1 = l1, f2 = l2 | C_1 = c1, C_2 = c2] for one hash"""
    return JointPosterior2.from_log_weights(dp_range2_log_kernel(theta, j, m, c1, c2))


def dp_pair_marginal_log_pmf(m: int, theta: float) -> np.ndarray:
    """
    Prior law of (f_{X_{m+1}}, f_{X_{m+2}}) under a DP(theta):
    p(l1, l2) = p_m(l1) [1{l1=l2} (l1+1) + (theta+m-l1) p_{m-l1}(l2)] / (theta+m+1)
    with p_n the marginal law of one new draw after n.
    """
    first = dp_marginal_log_pmf(m, theta)
    out = np.full((m + 1, m + 1), -np.inf)
    log_denom = math.log(theta + m + 1.0)
    for l1 in range(m + 1):
        rest = m - l1
        out[l1, : rest + 1] = first[l1] + math.log(theta + rest) - log_denom + dp_marginal_log_pmf(rest, theta)
        out[l1, l1] = np.logaddexp(out[l1, l1], first[l1] + math.log(l1 + 1.0) - log_denom)
    return out


def _pair_values(rows: Tuple[AnyRow, AnyRow]) -> Tuple[np.ndarray, np.ndarray]:
    if len(rows) != 2:
        raise RangeQueryException("A 2-range query needs exactly two hashed rows")
    first, second = (
        row.values if isinstance(row, HashedRow) else np.asarray(row, dtype=np.int64)
        for row in rows
    )
    if first.size == 0 or first.size != second.size:
        raise RangeQueryException(
            f"Hashed rows must be non-empty and of equal length, got {first.size} and {second.size}"
        )
    return first, second


def dp_range2_multi(
    theta: float,
    j: int,
    m: int,
    rows: Tuple[AnyRow, AnyRow],
    exact_correction: bool = False,
) -> JointPosterior2:
    """
    Product of the single-hash joint posteriors over the N hashes.

    exact_correction multiplies by Pr[f1 = l1, f2 = l2]^(1-N).
    """
    first, second = _pair_values(rows)
    top1, top2 = int(first.min()), int(second.min())
    log_w = np.zeros((top1 + 1, top2 + 1))
    for c1, c2 in zip(first, second):
        log_w = log_w + dp_range2_log_kernel(theta, j, m, int(c1), int(c2), top1, top2)
    if exact_correction and first.size > 1:
        prior = dp_pair_marginal_log_pmf(m, theta)[: top1 + 1, : top2 + 1]
        log_w = log_w + (1 - first.size) * prior
    logger.debug(f"2-range posterior over {top1 + 1}x{top2 + 1} support from {first.size} hashes")
    return JointPosterior2.from_log_weights(log_w)


def range_sum_posterior(joint: JointPosterior2) -> PosteriorPmf:
    """Law of l1 + l2 by summing anti-diagonals"""
    top1, top2 = joint.support
    flipped = np.fliplr(joint.probs)
    sums = np.array([flipped.diagonal(top2 - t).sum() for t in range(top1 + top2 + 1)])
    with np.errstate(divide="ignore"):
        return PosteriorPmf(log_probs=np.log(sums))


def range2_estimate(
    theta: float,
    j: int,
    m: int,
    rows: Tuple[AnyRow, AnyRow],
    kind: str = "mean",
) -> float:
    """Posterior summary of f_{v1} + f_{v2}"""
    return posterior_summary(range_sum_posterior(dp_range2_multi(theta, j, m, rows)), kind)
