#!/usr/bin/env python3
"""
Density of the positive alpha-stable law with Laplace transform exp(-t^alpha).

Small and moderate x use the angular integral representation
    g(x) = alpha / ((1 - alpha) pi) x^(-1/(1-alpha))
           * int_0^pi A(u) exp(-x^(-alpha/(1-alpha)) A(u)) du,
    A(u) = (sin(alpha u)^alpha sin((1-alpha) u)^(1-alpha) / sin u)^(1/(1-alpha)),
evaluated with tanh-sinh nodes in log space. Once x^-alpha < 0.1 the
convergent power series in x^-alpha takes over.
"""
import math
import logging
import numpy as np
from functools import lru_cache
from typing import Optional, Union
from scipy.interpolate import CubicSpline
from scipy.special import gammaln, logsumexp

from sketchbit.errors import SketchBitUsageError
from sketchbit.bnp.core.quadrature import (
    DEFAULT_LEVEL,
    half_line_rule,
    map_rule,
    tanh_sinh_rule,
)

logger = logging.getLogger("sketchbit.bnp.stable")

SERIES_TERMS = 40
SERIES_SWITCH = 0.1
TABLE_STEP = 0.01
TABLE_STEP_BETA = 0.03
TABLE_MAX_POINTS = 40000
TAIL_LOG_FLOOR = 1.0e4
BOOST_REFERENCE = 0.25
MAX_LEVEL_BOOST = 4
_CELL_BUDGET = 1 << 21

Real = Union[float, np.ndarray]


class StableDensityException(SketchBitUsageError):
    """Stable density requested outside 0 < alpha < 1 or x > 0"""

    pass


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise StableDensityException(f"alpha must lie in (0, 1), got {alpha}")


def level_boost(alpha: float) -> int:
    """
    Extra quadrature levels for alpha near 1. The left edge of the density
    steepens like x^(-alpha/(1-alpha)), so the step must shrink with 1 - alpha.
    """
    _check_alpha(alpha)
    if 1.0 - alpha >= BOOST_REFERENCE:
        return 0
    return min(MAX_LEVEL_BOOST, math.ceil(math.log2(BOOST_REFERENCE / (1.0 - alpha))))


@lru_cache(maxsize=64)
def _angular_log_kernel(alpha: float, level: int) -> tuple[np.ndarray, np.ndarray]:
    """(log A(u_j), log weights) at the tanh-sinh nodes mapped onto (0, pi)"""
    mapped = map_rule(tanh_sinh_rule(level), 0.0, math.pi)
    u = mapped.points
    assert mapped.log_lower_gaps is not None and mapped.log_upper_gaps is not None
    nearest_end = np.where(
        u < math.pi / 2.0, np.exp(mapped.log_lower_gaps), np.exp(mapped.log_upper_gaps)
    )
    beta = alpha / (1.0 - alpha)
    log_sin_u = np.log(np.sin(nearest_end))
    log_a = (
        beta * np.log(np.sin(alpha * u))
        + np.log(np.sin((1.0 - alpha) * u))
        - log_sin_u / (1.0 - alpha)
    )
    log_a.setflags(write=False)
    return log_a, mapped.log_weights


def _zolotarev_logpdf(alpha: float, log_x: np.ndarray, level: int) -> np.ndarray:
    log_a, log_w = _angular_log_kernel(alpha, level)
    beta = alpha / (1.0 - alpha)
    prefactor = math.log(alpha / (1.0 - alpha)) - math.log(math.pi)
    out = np.empty_like(log_x)
    size = max(1, _CELL_BUDGET // log_a.size)
    for start in range(0, log_x.size, size):
        chunk = log_x[start : start + size]
        log_z = -beta * chunk
        with np.errstate(over="ignore"):
            exponent = np.exp(log_z[:, None] + log_a[None, :])
        terms = log_a[None, :] - exponent + log_w[None, :]
        with np.errstate(divide="ignore"):
            log_int = logsumexp(terms, axis=1)
        out[start : start + size] = prefactor - chunk / (1.0 - alpha) + log_int
    return out


def _series_logpdf(alpha: float, log_x: np.ndarray) -> np.ndarray:
    """(1/pi) sum_k (-1)^(k+1) Gamma(alpha k + 1)/k! sin(pi alpha k) x^(-alpha k - 1)"""
    k = np.arange(1, SERIES_TERMS + 1, dtype=float)
    sines = np.sin(math.pi * alpha * k)
    coeff = gammaln(alpha * k + 1) - gammaln(k + 1) + np.log(np.abs(sines))
    signs = np.where(k % 2 == 1, 1.0, -1.0) * np.sign(sines)
    terms = coeff[None, :] - (alpha * k[None, :] + 1.0) * log_x[:, None]
    values, value_signs = logsumexp(
        terms, axis=1, b=np.broadcast_to(signs, terms.shape), return_sign=True
    )
    return np.where(value_signs > 0, values - math.log(math.pi), -np.inf)


def stable_logpdf_from_log(alpha: float, log_x: Real, level: Optional[int] = None) -> np.ndarray:
    """log g_alpha(x) given log x; the angular level defaults to one suited to alpha"""
    _check_alpha(alpha)
    if level is None:
        level = DEFAULT_LEVEL + level_boost(alpha)
    log_x_arr = np.atleast_1d(np.asarray(log_x, dtype=float))
    out = np.empty_like(log_x_arr)
    use_series = -alpha * log_x_arr < math.log(SERIES_SWITCH)
    if np.any(use_series):
        out[use_series] = _series_logpdf(alpha, log_x_arr[use_series])
    if np.any(~use_series):
        out[~use_series] = _zolotarev_logpdf(alpha, log_x_arr[~use_series], level)
    return out


def stable_logpdf(alpha: float, x: Real, level: Optional[int] = None) -> Real:
    """log g_alpha(x) for x > 0"""
    _check_alpha(alpha)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0) or np.any(~np.isfinite(x_arr)):
        raise StableDensityException("Stable density needs finite x > 0")
    out = stable_logpdf_from_log(alpha, np.log(x_arr), level)
    if x_arr.ndim == 0:
        return float(out[0])
    return out.reshape(x_arr.shape)


@lru_cache(maxsize=64)
def stable_logpdf_at_nodes(alpha: float, level: int) -> tuple[np.ndarray, np.ndarray]:
    """(log x_j, log g_alpha(x_j)) at the half-line nodes; cached per (alpha, level)"""
    _check_alpha(alpha)
    mapped = half_line_rule(level)
    assert mapped.log_lower_gaps is not None
    log_x = mapped.log_lower_gaps
    log_g = stable_logpdf_from_log(alpha, log_x)
    log_g.setflags(write=False)
    logger.debug(f"Cached stable log-density at {log_x.size} nodes (alpha={alpha}, level={level})")
    return log_x, log_g


class StableLogDensityTable:
    """
    Cubic-spline table of log g_alpha over log x.

    Left of the table the density is below exp(-TAIL_LOG_FLOOR) and is
    reported as zero; right of it the series is evaluated exactly.
    """

    def __init__(self, alpha: float) -> None:
        _check_alpha(alpha)
        self.alpha = alpha
        beta = alpha / (1.0 - alpha)
        scale = (1.0 - alpha) * alpha**beta
        self.log_x_min = -math.log(TAIL_LOG_FLOOR / scale) / beta
        self.log_x_series = math.log(1.0 / SERIES_SWITCH) / alpha
        span = self.log_x_series - self.log_x_min
        step = max(min(TABLE_STEP, TABLE_STEP_BETA / beta), span / TABLE_MAX_POINTS)
        grid = np.linspace(self.log_x_min, self.log_x_series, int(math.ceil(span / step)) + 1)
        values = _zolotarev_logpdf(alpha, grid, DEFAULT_LEVEL + level_boost(alpha))
        self._spline = CubicSpline(grid, values)
        logger.debug(
            f"StableLogDensityTable alpha={alpha}: {grid.size} points on "
            f"[{self.log_x_min:.2f}, {self.log_x_series:.2f}]"
        )

    def __call__(self, log_x: np.ndarray) -> np.ndarray:
        log_x = np.asarray(log_x, dtype=float)
        out = np.full(log_x.shape, -np.inf)
        series = log_x >= self.log_x_series
        inside = (log_x >= self.log_x_min) & ~series
        if np.any(series):
            out[series] = _series_logpdf(self.alpha, log_x[series])
        if np.any(inside):
            out[inside] = self._spline(log_x[inside])
        return out


@lru_cache(maxsize=16)
def stable_table(alpha: float) -> StableLogDensityTable:
    return StableLogDensityTable(alpha)
