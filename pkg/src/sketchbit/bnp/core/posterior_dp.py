#!/usr/bin/env python3
import math
import logging
import numpy as np
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from sketchbit.errors import SketchBitNumericError, SketchBitUsageError
from sketchbit.sketch.core.count_min import CountMinSketch, HashedRow
from sketchbit.bnp.core.models import dm_log_likelihood, dp_marginal_log_pmf
from sketchbit.bnp.core.specialfn import log_rising_vec

logger = logging.getLogger("sketchbit.bnp.posterior_dp")

THETA_BOUNDS = (1.0e-3, 1.0e5)
THETA_GRID_POINTS = 81
LOG_THETA_TOL = 1.0e-6
SUMMARY_KINDS = ("mean", "median", "mode")


class PosteriorException(SketchBitUsageError):
    """Invalid posterior request"""

    pass


class ThetaFitException(SketchBitNumericError):
    """Empirical Bayes fit of theta failed"""

    pass


@dataclass(frozen=True)
class PosteriorPmf:
    """Normalized log-pmf of a latent frequency over l = 0..L"""

    log_probs: np.ndarray

    def __post_init__(self) -> None:
        if self.log_probs.ndim != 1 or self.log_probs.size == 0:
            raise PosteriorException("Posterior needs a non-empty 1-D support")

    @classmethod
    def from_log_weights(cls, log_weights: np.ndarray) -> "PosteriorPmf":
        """Normalize unnormalized log weights"""
        log_weights = np.asarray(log_weights, dtype=float)
        total = logsumexp(log_weights)
        if not np.isfinite(total):
            raise PosteriorException("Posterior weights vanish on the whole support")
        return cls(log_probs=log_weights - total)

    @classmethod
    def point_mass(cls, at: int = 0) -> "PosteriorPmf":
        log_probs = np.full(at + 1, -np.inf)
        log_probs[at] = 0.0
        return cls(log_probs=log_probs)

    @property
    def support_max(self) -> int:
        return int(self.log_probs.size - 1)

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.log_probs.size), self.probs))

    def quantile(self, q: float) -> int:
        """Smallest l with CDF(l) >= q"""
        if not 0 <= q <= 1:
            raise PosteriorException(f"Quantile level must lie in [0, 1], got {q}")
        cdf = np.cumsum(self.probs)
        # rounding can leave the last entry a hair below 1
        index = int(np.searchsorted(cdf, q - 1e-12, side="left"))
        return min(index, self.support_max)

    def median(self) -> int:
        return self.quantile(0.5)

    def mode(self) -> int:
        # argmax returns the first maximum, i.e. the smallest l on ties
        return int(np.argmax(self.log_probs))

    def credible_interval(self, level: float = 0.95) -> Tuple[int, int]:
        """Equal-tailed interval from the pmf quantiles"""
        if not 0 < level < 1:
            raise PosteriorException(f"Credible level must lie in (0, 1), got {level}")
        tail = (1.0 - level) / 2.0
        return self.quantile(tail), self.quantile(1.0 - tail)


def posterior_summary(pmf: PosteriorPmf, kind: str) -> float:
    if kind == "mean":
        return pmf.mean()
    if kind == "median":
        return float(pmf.median())
    if kind == "mode":
        return float(pmf.mode())
    raise PosteriorException(f"Unknown summary {kind!r}; choose from {', '.join(SUMMARY_KINDS)}")


def _check_dp_args(theta: float, j: int) -> None:
    if theta <= 0:
        raise PosteriorException(f"theta must be positive, got {theta}")
    if j < 1:
        raise PosteriorException(f"Number of buckets must be >= 1, got {j}")


def dp_log_kernel(theta: float, j: int, c: int, l_max: Optional[int] = None) -> np.ndarray:
    """log Pr[f = l | C = c] for l = 0..min(c, l_max) under a DP(theta) prior"""
    _check_dp_args(theta, j)
    if c < 0:
        raise PosteriorException(f"Hashed count must be >= 0, got {c}")
    top = c if l_max is None else min(c, l_max)
    l = np.arange(top + 1)
    a = theta / j
    return (
        math.log(a)
        - math.log(a + c)
        + log_rising_vec(c - l + 1, l)
        - log_rising_vec(a + c - l, l)
    )


def dp_posterior_single(theta: float, j: int, c: int) -> PosteriorPmf:
    if c == 0:
        _check_dp_args(theta, j)
        return PosteriorPmf.point_mass(0)
    return PosteriorPmf.from_log_weights(dp_log_kernel(theta, j, c))


def _row_values(row: Union[HashedRow, Sequence[int]]) -> np.ndarray:
    values = row.values if isinstance(row, HashedRow) else np.asarray(row, dtype=np.int64)
    if values.size == 0:
        raise PosteriorException("Hashed row is empty")
    return values


def dp_posterior_multi(
    theta: float,
    j: int,
    row: Union[HashedRow, Sequence[int]],
    exact_correction: bool = False,
    m: Optional[int] = None,
) -> PosteriorPmf:
    """
    Product of single-hash posteriors over the N rows, support 0..min c_n.

    With exact_correction the product is multiplied by Pr[f = l]^(1-N),
    which needs the stream size m.
    """
    values = _row_values(row)
    _check_dp_args(theta, j)
    support = int(values.min())
    if support == 0:
        return PosteriorPmf.point_mass(0)

    log_w = np.zeros(support + 1)
    for c in values:
        log_w += dp_log_kernel(theta, j, int(c), l_max=support)
    if exact_correction and values.size > 1:
        if m is None or m < int(values.max()):
            raise PosteriorException("exact_correction needs m >= every hashed count")
        log_w += (1 - values.size) * dp_marginal_log_pmf(m, theta)[: support + 1]
    return PosteriorPmf.from_log_weights(log_w)


def fit_theta_empirical_bayes(
    sketch: Union[CountMinSketch, np.ndarray],
    bounds: Tuple[float, float] = THETA_BOUNDS,
) -> float:
    """Maximize the Dirichlet-multinomial likelihood of the sketch over log theta"""
    counts = sketch.counts if isinstance(sketch, CountMinSketch) else np.asarray(sketch)
    if counts.ndim != 2 or counts.sum(axis=1)[0] < 1:
        raise PosteriorException("Empirical Bayes needs a sketch with m >= 1")
    lo, hi = math.log(bounds[0]), math.log(bounds[1])
    if not lo < hi:
        raise PosteriorException(f"Empty theta range {bounds}")

    def negative(log_theta: float) -> float:
        return -dm_log_likelihood(counts, math.exp(log_theta))

    grid = np.linspace(lo, hi, THETA_GRID_POINTS)
    values = np.array([negative(x) for x in grid])
    if not np.all(np.isfinite(values)):
        logger.error("Dirichlet-multinomial likelihood is not finite on the theta grid")
        raise ThetaFitException("Non-finite likelihood while fitting theta")

    best = int(np.argmin(values))
    if best == 0 or best == grid.size - 1:
        theta_hat = bounds[0] if best == 0 else bounds[1]
        logger.info(f"Empirical Bayes theta at the search boundary: {theta_hat:.6g}")
        return theta_hat

    bracket = (grid[best - 1], grid[best], grid[best + 1])
    try:
        result = minimize_scalar(
            negative, bracket=bracket, method="golden", options={"xtol": LOG_THETA_TOL}
        )
        log_theta = float(result.x)
        if not np.isfinite(result.fun) or result.fun > values[best]:
            log_theta = float(grid[best])
    except ValueError as e:
        logger.warning(f"Golden-section search fell back to the grid: {e}")
        log_theta = float(grid[best])

    theta_hat = min(max(math.exp(log_theta), bounds[0]), bounds[1])
    logger.info(f"Empirical Bayes theta = {theta_hat:.6g}")
    return theta_hat
