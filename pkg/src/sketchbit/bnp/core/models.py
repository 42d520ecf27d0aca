#!/usr/bin/env python3
import math
import logging
import numpy as np
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union
from scipy.special import gammaln, logsumexp

from sketchbit.errors import SketchBitUsageError
from sketchbit.bnp.core.specialfn import log_binom, log_rising, log_rising_vec

logger = logging.getLogger("sketchbit.bnp.models")

_UNIFORM_BATCH = 1 << 16


class ModelException(SketchBitUsageError):
    """Invalid prior parameters or model inputs"""

    pass


@dataclass(frozen=True)
class PypParams:
    """Pitman-Yor prior (alpha, theta); alpha = 0 is the Dirichlet process"""

    alpha: float
    theta: float

    def __post_init__(self) -> None:
        if not 0 <= self.alpha < 1:
            raise ModelException(f"alpha must lie in [0, 1), got {self.alpha}")
        if not self.theta > -self.alpha:
            raise ModelException(
                f"theta must exceed -alpha={-self.alpha}, got {self.theta}"
            )
        if self.alpha == 0 and self.theta <= 0:
            raise ModelException(f"Dirichlet process needs theta > 0, got {self.theta}")

    @property
    def is_dp(self) -> bool:
        return self.alpha == 0


@dataclass(frozen=True)
class PartitionStats:
    """K_m distinct symbols and M_{r,m} symbols seen exactly r times"""

    k_m: int
    m_r: Dict[int, int]
    m: int

    def __post_init__(self) -> None:
        if sum(self.m_r.values()) != self.k_m:
            raise ModelException("Frequency counts do not add up to K_m")
        if sum(r * count for r, count in self.m_r.items()) != self.m:
            raise ModelException("Frequency counts do not add up to m")

    @classmethod
    def from_counts(cls, counts: Union[List[int], np.ndarray]) -> "PartitionStats":
        counts = [int(c) for c in counts if c > 0]
        return cls(k_m=len(counts), m_r=dict(Counter(counts)), m=sum(counts))


@dataclass
class PitmanYorStream:
    """
    Sequential predictive sampler for a PYP(alpha, theta) stream.

    Draw i+1 is a new symbol with probability (theta + K alpha) / (theta + i);
    otherwise symbol s is reused with probability (r_s - alpha) / (i - K alpha).
    Reuse picks a uniform past position (probability r_s / i) and keeps it
    with probability 1 - alpha / r_s, so each draw is O(1) on average.
    """

    params: PypParams
    seed: int
    tokens: List[int] = field(default_factory=list, repr=False)
    counts: List[int] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        self._rng = np.random.default_rng(self.seed)
        self._uniforms = np.empty(0)
        self._cursor = 0
        logger.debug(
            f"PitmanYorStream created: alpha={self.params.alpha}, theta={self.params.theta}, seed={self.seed}"
        )

    def _uniform(self) -> float:
        if self._cursor >= self._uniforms.size:
            self._uniforms = self._rng.random(_UNIFORM_BATCH)
            self._cursor = 0
        value = self._uniforms[self._cursor]
        self._cursor += 1
        return float(value)

    def draw(self, m: int) -> np.ndarray:
        """Extend the stream by m tokens and return their symbol ids"""
        if m < 0:
            raise ModelException(f"Number of draws must be >= 0, got {m}")
        alpha, theta = self.params.alpha, self.params.theta
        tokens, counts = self.tokens, self.counts
        start = len(tokens)
        for _ in range(m):
            i = len(tokens)
            k = len(counts)
            if i == 0 or self._uniform() * (theta + i) < theta + k * alpha:
                counts.append(1)
                tokens.append(k)
                continue
            while True:
                symbol = tokens[int(self._uniform() * i)]
                if alpha == 0 or self._uniform() * counts[symbol] >= alpha:
                    break
            counts[symbol] += 1
            tokens.append(symbol)
        return np.asarray(tokens[start:], dtype=np.int64)

    @property
    def stats(self) -> PartitionStats:
        return PartitionStats.from_counts(self.counts)


def sample_stream(params: PypParams, m: int, seed: int) -> Tuple[np.ndarray, PartitionStats]:
    """m predictive draws; fresh symbols get ids 0, 1, 2, ... in order of appearance"""
    if m < 1:
        raise ModelException(f"Stream length must be >= 1, got {m}")
    sampler = PitmanYorStream(params, seed)
    tokens = sampler.draw(m)
    return tokens, sampler.stats


def dp_marginal_log_pmf(m: int, theta: float) -> np.ndarray:
    if m < 0:
        raise ModelException(f"Sample size must be >= 0, got {m}")
    if theta <= 0:
        raise ModelException(f"theta must be positive, got {theta}")
    l = np.arange(m + 1)
    return (
        math.log(theta)
        - math.log(theta + m)
        + log_rising_vec(m - l + 1, l)
        - log_rising_vec(theta + m - l, l)
    )


def dp_marginal_pmf(m: int, theta: float) -> np.ndarray:
    """Pr[f_{X_{m+1}} = l], l = 0..m, under a DP(theta) prior"""
    return np.exp(dp_marginal_log_pmf(m, theta))


def pyp_marginal_log_pmf(m: int, params: PypParams) -> np.ndarray:
    if params.is_dp:
        return dp_marginal_log_pmf(m, params.theta)
    l = np.arange(m + 1)
    log_p = (
        log_binom(m, l)
        + log_rising_vec(params.theta + params.alpha, m - l)
        + log_rising_vec(1.0 - params.alpha, l)
        - log_rising(params.theta + 1.0, m)
    )
    return log_p - logsumexp(log_p)


def pyp_marginal_pmf(m: int, params: PypParams) -> np.ndarray:
    """Pr[f_{X_{m+1}} = l], l = 0..m, proportional to binom(m,l)(theta+alpha)_(m-l)(1-alpha)_(l)"""
    return np.exp(pyp_marginal_log_pmf(m, params))


def dm_log_likelihood(counts: np.ndarray, theta: float) -> float:
    """Dirichlet-multinomial log-likelihood of the N x J hashed counts"""
    if theta <= 0:
        raise ModelException(f"theta must be positive, got {theta}")
    matrix = np.asarray(counts, dtype=np.float64)
    if matrix.ndim != 2:
        raise ModelException("Counts must be an N x J matrix")
    sums = matrix.sum(axis=1)
    if np.any(sums != sums[0]):
        raise ModelException(f"Rows disagree on m: {sums.tolist()}")
    m = int(sums[0])
    if m == 0:
        return 0.0
    j = matrix.shape[1]
    per_row = (
        gammaln(m + 1)
        - log_rising(theta, m)
        + np.sum(log_rising_vec(theta / j, matrix) - gammaln(matrix + 1), axis=1)
    )
    return float(np.sum(per_row))
