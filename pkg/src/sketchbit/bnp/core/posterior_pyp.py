#!/usr/bin/env python3
"""
Posterior of a point query under a Pitman-Yor prior.

With P the mass the random measure puts on the query bucket, the single-hash
posterior is

    Pr[f = l | C = c] = C(c, l) (theta+alpha)_(m-l) (1-alpha)_(l)
                        / (J (theta+1)_(m))
                        * E_{theta+alpha}[P^(c-l) (1-P)^(m-c)]
                        / E_theta[P^(c+1) (1-P)^(m-c)].

Two evaluation paths for the bucket moments:

* exact: a positive double sum over the numbers of blocks inside and outside
  the bucket, built from scaled generalized factorial coefficients. An
  alternating variant sums K_n generating functions with signs and is kept
  for cross-checks at small m.
* integral: the law of log((1-P)/P) is tabulated from two independent
  positive stable variables (polynomially tilted by theta) and moments are
  integrated on a uniform grid.
"""
import math
import logging
import threading
import numpy as np
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union
from scipy.special import gammaln, logsumexp

from sketchbit.errors import SketchBitNumericError, SketchBitUsageError
from sketchbit.sketch.core.count_min import HashedRow
from sketchbit.bnp.core.models import PypParams, pyp_marginal_log_pmf
from sketchbit.bnp.core.posterior_dp import (
    PosteriorPmf,
    dp_log_kernel,
    dp_posterior_multi,
    dp_posterior_single,
    posterior_summary,
)
from sketchbit.bnp.core.quadrature import half_line_rule
from sketchbit.bnp.core.specialfn import (
    GfcTable,
    LogValue,
    _log_weight_prefix,
    km_pgf_log,
    log_binom,
    log_rising,
    log_rising_vec,
    logsumexp_signed,
    scaled_table,
)
from sketchbit.bnp.core.stable import level_boost, stable_logpdf_at_nodes, stable_table

logger = logging.getLogger("sketchbit.bnp.posterior_pyp")

EXACT_MAX_M = 60
ALTERNATING_MAX_M = 20
INTEGRAL_LEVEL = 9
DRIFT_TOLERANCE = 1.0e-6
MASS_TOLERANCE = 1.0e-8
MAX_REFINEMENTS = 3
GRID_TAIL_NATS = 40.0
GRID_MAX_HALF_WIDTH = 4000.0
GRID_MAX_POINTS = 20001
COARSE_POINTS = 2001
COARSE_KEEP_NATS = 700.0
_CELL_BUDGET = 1 << 21
_MOMENT_CHUNK = 64

PATHS = ("auto", "exact", "integral")


class PypPosteriorException(SketchBitUsageError):
    """Invalid PYP posterior request"""

    pass


class PypNumericException(SketchBitNumericError):
    """PYP posterior evaluation lost precision"""

    pass


@dataclass(frozen=True)
class BucketMassDensity:
    """
    log q(w) on a uniform grid, where w = log((1-P)/P) and P is the prior
    mass of one bucket under PYP(alpha, theta) with J buckets.
    """

    alpha: float
    theta: float
    j: int
    level: int
    w: np.ndarray
    log_q: np.ndarray
    log_delta: float

    @property
    def log_total(self) -> float:
        """log of the integral of q, zero up to discretization error"""
        return float(logsumexp(self.log_q) + self.log_delta)

    def log_moments(self, a: np.ndarray, b: int) -> np.ndarray:
        """log E[P^a (1-P)^b] for every a in the array"""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        log_one_plus = np.logaddexp(0.0, self.w)
        base = self.log_q + b * self.w
        out = np.empty(a.size)
        for start in range(0, a.size, _MOMENT_CHUNK):
            chunk = a[start : start + _MOMENT_CHUNK]
            values = base[None, :] - (chunk[:, None] + b) * log_one_plus[None, :]
            out[start : start + _MOMENT_CHUNK] = logsumexp(values, axis=1)
        return out + self.log_delta


def _log_q_on(
    w: np.ndarray,
    alpha: float,
    theta: float,
    j: int,
    level: int,
) -> np.ndarray:
    outer = level + level_boost(alpha)
    log_x, log_g = stable_logpdf_at_nodes(alpha, outer)
    log_wx = half_line_rule(outer).log_weights
    live = np.isfinite(log_g)
    log_x, log_g, log_wx = log_x[live], log_g[live], log_wx[live]
    table = stable_table(alpha)

    log_kappa = math.log(j - 1) / alpha
    log_const = gammaln(theta + 1.0) - gammaln(theta / alpha + 1.0) + (theta / alpha) * math.log(j)
    inner_base = log_g - theta * log_x + log_wx

    out = np.empty(w.size)
    chunk = max(1, _CELL_BUDGET // log_x.size)
    for start in range(0, w.size, chunk):
        w_chunk = w[start : start + chunk]
        log_h = log_x[None, :] + w_chunk[:, None] - log_kappa
        values = inner_base[None, :] + table(log_h) + log_h
        out[start : start + chunk] = logsumexp(values, axis=1)
    return out + log_const - theta * np.logaddexp(0.0, w)


@lru_cache(maxsize=64)
def bucket_mass_density(alpha: float, theta: float, j: int, level: int = INTEGRAL_LEVEL) -> BucketMassDensity:
    """
    Tabulate q on a window found by a coarse scan, then on a grid of step
    2^-(level-3). The tails of q decay like exp(-(alpha+theta)|w|) at worst.
    """
    if not 0 < alpha < 1:
        raise PypPosteriorException(f"Bucket-mass density needs 0 < alpha < 1, got {alpha}")
    if j < 2:
        raise PypPosteriorException("Integral path needs J >= 2")
    if not theta > -alpha:
        raise PypPosteriorException(f"theta must exceed -alpha, got {theta}")

    center = math.log(j - 1) / alpha
    half_width = min(GRID_TAIL_NATS / min(alpha, alpha + theta), GRID_MAX_HALF_WIDTH)
    coarse = np.linspace(center - half_width, center + half_width, COARSE_POINTS)
    coarse_q = _log_q_on(coarse, alpha, theta, j, level)
    if not np.any(np.isfinite(coarse_q)):
        raise PypNumericException(
            f"Bucket-mass density vanished everywhere (alpha={alpha}, theta={theta}, J={j})"
        )
    keep = np.flatnonzero(coarse_q >= np.max(coarse_q) - COARSE_KEEP_NATS)
    step = coarse[1] - coarse[0]
    lower = coarse[keep[0]] - step
    upper = coarse[keep[-1]] + step

    delta = 2.0 ** -(level - 3)
    points = min(int(math.ceil((upper - lower) / delta)) + 1, GRID_MAX_POINTS)
    w = np.linspace(lower, upper, points)
    log_q = _log_q_on(w, alpha, theta, j, level)
    for array in (w, log_q):
        array.setflags(write=False)
    density = BucketMassDensity(
        alpha=alpha,
        theta=theta,
        j=j,
        level=level,
        w=w,
        log_q=log_q,
        log_delta=math.log(w[1] - w[0]),
    )
    logger.debug(
        f"Bucket-mass density alpha={alpha}, theta={theta}, J={j}, level={level}: "
        f"{points} points on [{lower:.2f}, {upper:.2f}], mass drift {math.expm1(density.log_total):.2e}"
    )
    return density


@dataclass
class PypPosteriorContext:
    """
    Everything a CMS-PYP query needs besides the hashed counts.

    Single-hash log-kernels are cached per (c, path) and shared by the
    single and multi-hash posteriors; a cached kernel is extended when a
    longer support is requested.
    """

    params: PypParams
    j: int
    m: int
    level: int = INTEGRAL_LEVEL
    _kernels: Dict[Tuple[int, str], np.ndarray] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _refined: bool = field(default=False, repr=False)

    def __post_init__(self) -> None:
        if self.j < 1:
            raise PypPosteriorException(f"Number of buckets must be >= 1, got {self.j}")
        if self.m < 0:
            raise PypPosteriorException(f"Stream size must be >= 0, got {self.m}")
        logger.debug(
            f"PypPosteriorContext created: alpha={self.params.alpha}, "
            f"theta={self.params.theta}, J={self.j}, m={self.m}"
        )

    @property
    def gfc(self) -> GfcTable:
        """Scaled coefficient table covering every moment of the exact path"""
        return scaled_table(self.params.alpha, self.m + 1)

    def resolve_path(self, path: str = "auto") -> str:
        if path not in PATHS:
            raise PypPosteriorException(f"Unknown path {path!r}; choose from {', '.join(PATHS)}")
        if path == "auto":
            return "exact" if self.m <= EXACT_MAX_M else "integral"
        return path

    def density(self, theta: float) -> BucketMassDensity:
        return bucket_mass_density(self.params.alpha, theta, self.j, self.level)

    def _check_count(self, c: int) -> None:
        if not 0 <= c <= self.m:
            raise PypPosteriorException(f"Hashed count must lie in [0, m={self.m}], got {c}")

    def _log_moment_exact(self, a: int, b: int, theta: float) -> float:
        """log E_theta[P^a (1-P)^b] as a positive sum over block counts"""
        n = a + b
        if n == 0:
            return 0.0
        if self.j == 1:
            return 0.0 if b == 0 else -math.inf
        alpha = self.params.alpha
        log_scaled = self.gfc.log_scaled
        prefix = _log_weight_prefix(alpha, theta, n)
        k1 = np.arange(a + 1)
        k2 = np.arange(b + 1)
        log_t = -math.log(self.j)
        log_rest = math.log1p(-1.0 / self.j)
        terms = (
            log_scaled[a, : a + 1][:, None]
            + log_scaled[b, : b + 1][None, :]
            + prefix[k1[:, None] + k2[None, :]]
            + k1[:, None] * log_t
            + k2[None, :] * log_rest
        )
        return float(logsumexp(terms)) - log_rising(theta + 1.0, n - 1)

    def _log_moment_alternating(self, a: int, b: int, theta: float) -> float:
        """log E_theta[P^a (1-P)^b] = log sum_i binom(b,i) (-1)^(b-i) G_{K_(a+b-i)}(1/J)"""
        prior = PypParams(alpha=self.params.alpha, theta=theta)
        t = 1.0 / self.j
        gfc = self.gfc
        log_terms = np.array(
            [float(log_binom(b, i)) + km_pgf_log(t, a + b - i, prior, gfc) for i in range(b + 1)]
        )
        signs = np.array([-1 if (b - i) % 2 else 1 for i in range(b + 1)])
        total: LogValue = logsumexp_signed(log_terms, signs)
        if total.sign <= 0:
            raise PypNumericException(
                f"Alternating sum for E[P^{a}(1-P)^{b}] lost all precision"
            )
        return total.log()

    def _kernel(self, c: int, top: int, path: str, alternating: bool = False) -> np.ndarray:
        alpha, theta = self.params.alpha, self.params.theta
        m = self.m
        l = np.arange(top + 1)
        log_front = (
            -math.log(self.j)
            - log_rising(theta + 1.0, m)
            + log_binom(c, l)
            + log_rising_vec(theta + alpha, m - l)
            + log_rising_vec(1.0 - alpha, l)
        )
        if path == "integral":
            log_a = self.density(theta + alpha).log_moments(c - l, m - c)
            log_b = float(self.density(theta).log_moments(np.array([c + 1]), m - c)[0])
        else:
            moment = self._log_moment_alternating if alternating else self._log_moment_exact
            log_a = np.array([moment(c - int(i), m - c, theta + alpha) for i in l])
            log_b = moment(c + 1, m - c, theta)
        return log_front + log_a - log_b

    def log_kernel(self, c: int, l_max: Optional[int] = None, path: str = "auto") -> np.ndarray:
        """log Pr[f = l | C = c] for l = 0..min(c, l_max)"""
        self._check_count(c)
        resolved = self.resolve_path(path)
        top = c if l_max is None else min(c, l_max)
        if self.params.is_dp and path == "auto":
            return dp_log_kernel(self.params.theta, self.j, c, l_max=top)
        if resolved == "exact" and self.m > EXACT_MAX_M:
            raise PypPosteriorException(
                f"Exact path is limited to m <= {EXACT_MAX_M}; use the integral path for m={self.m}"
            )
        if resolved == "integral":
            if self.params.is_dp:
                raise PypPosteriorException("Integral path needs alpha > 0")
            if self.j < 2:
                raise PypPosteriorException("Integral path needs J >= 2")
            self._check_drift()

        key = (c, resolved)
        with self._lock:
            cached = self._kernels.get(key)
        if cached is not None and cached.size > top:
            return cached[: top + 1]
        kernel = self._kernel(c, top, resolved)
        kernel.setflags(write=False)
        with self._lock:
            current = self._kernels.get(key)
            if current is None or current.size < kernel.size:
                self._kernels[key] = kernel
        return kernel

    def mass_drift(self) -> float:
        """Largest |mass - 1| of the two bucket-mass densities at the current level"""
        thetas = (self.params.theta, self.params.theta + self.params.alpha)
        return max(abs(math.expm1(self.density(theta).log_total)) for theta in thetas)

    def _check_drift(self) -> None:
        """Raise the integral level until both bucket-mass densities hold unit mass"""
        if self._refined:
            return
        with self._lock:
            if self._refined:
                return
            start = self.level
            drift = self.mass_drift()
            while drift > MASS_TOLERANCE and self.level - start < MAX_REFINEMENTS:
                logger.warning(
                    f"Bucket-mass density drifted by {drift:.2e}; refining to level {self.level + 1}"
                )
                self.level += 1
                drift = self.mass_drift()
            if drift > MASS_TOLERANCE:
                logger.warning(f"Bucket-mass density still drifts by {drift:.2e} at level {self.level}")
            if self.level != start:
                self._kernels = {k: v for k, v in self._kernels.items() if k[1] != "integral"}
            self._refined = True

    def refine(self) -> None:
        """Move the integral path one quadrature level up and drop its cached kernels"""
        with self._lock:
            self.level += 1
            self._kernels = {k: v for k, v in self._kernels.items() if k[1] != "integral"}
            self._refined = True
        logger.warning(f"Integral path refined to level {self.level}")


def pyp_posterior_exact(ctx: PypPosteriorContext, c: int, alternating: bool = False) -> PosteriorPmf:
    """Single-hash posterior from finite sums; alpha = 0 goes to the DP formula"""
    if ctx.params.is_dp:
        return dp_posterior_single(ctx.params.theta, ctx.j, c)
    ctx._check_count(c)
    if ctx.m > EXACT_MAX_M:
        raise PypPosteriorException(
            f"Exact path is limited to m <= {EXACT_MAX_M}; use pyp_posterior_integral for m={ctx.m}"
        )
    if c == 0:
        return PosteriorPmf.point_mass(0)
    if alternating:
        if ctx.m > ALTERNATING_MAX_M:
            raise PypPosteriorException(
                f"Alternating sums are limited to m <= {ALTERNATING_MAX_M}, got m={ctx.m}"
            )
        return PosteriorPmf.from_log_weights(ctx._kernel(c, c, "exact", alternating=True))
    return PosteriorPmf.from_log_weights(ctx.log_kernel(c, path="exact"))


def pyp_posterior_integral(ctx: PypPosteriorContext, c: int) -> PosteriorPmf:
    """Single-hash posterior from the tabulated bucket-mass density"""
    if ctx.j < 2:
        raise PypPosteriorException("Integral path needs J >= 2")
    if ctx.params.is_dp:
        raise PypPosteriorException("Integral path needs alpha > 0; use the DP posterior")
    ctx._check_count(c)
    if c == 0:
        return PosteriorPmf.point_mass(0)
    kernel = ctx.log_kernel(c, path="integral")
    drift = abs(math.expm1(float(logsumexp(kernel))))
    if drift > DRIFT_TOLERANCE:
        logger.warning(f"Integral posterior at c={c} sums to 1{drift:+.2e}; refining once")
        ctx.refine()
        kernel = ctx.log_kernel(c, path="integral")
    return PosteriorPmf.from_log_weights(kernel)


def _row_values(row: Union[HashedRow, Sequence[int]]) -> np.ndarray:
    values = row.values if isinstance(row, HashedRow) else np.asarray(row, dtype=np.int64)
    if values.size == 0:
        raise PypPosteriorException("Hashed row is empty")
    return values


def pyp_posterior_multi(
    ctx: PypPosteriorContext,
    row: Union[HashedRow, Sequence[int]],
    path: str = "auto",
    exact_correction: bool = False,
) -> PosteriorPmf:
    """
    Product of single-hash posteriors, support 0..min c_n.

    exact_correction multiplies by Pr[f = l]^(1-N) under the PYP marginal.
    """
    values = _row_values(row)
    if ctx.params.is_dp:
        return dp_posterior_multi(
            ctx.params.theta, ctx.j, values, exact_correction=exact_correction, m=ctx.m
        )
    for c in values:
        ctx._check_count(int(c))
    support = int(values.min())
    if support == 0:
        return PosteriorPmf.point_mass(0)

    log_w = np.zeros(support + 1)
    for c in values:
        log_w = log_w + ctx.log_kernel(int(c), l_max=support, path=path)
    if exact_correction and values.size > 1:
        log_w = log_w + (1 - values.size) * pyp_marginal_log_pmf(ctx.m, ctx.params)[: support + 1]
    return PosteriorPmf.from_log_weights(log_w)


def pyp_estimate(
    ctx: PypPosteriorContext,
    row: Union[HashedRow, Sequence[int]],
    kind: str = "mean",
    path: str = "auto",
) -> float:
    """Posterior summary of the multi-hash posterior; the mean by default"""
    return posterior_summary(pyp_posterior_multi(ctx, row, path=path), kind)
