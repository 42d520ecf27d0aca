#!/usr/bin/env python3
"""
Log-space special functions for the DP/PYP posteriors.

Positive quantities (rising factorials, scaled generalized factorial
coefficients, K_m probabilities) are carried as plain float logarithms.
LogValue carries a sign next to the log-magnitude and is used wherever a sum
may alternate.
"""
import math
import logging
import numpy as np
from functools import lru_cache
from dataclasses import dataclass
from typing import Optional, Protocol, Union
from scipy.special import gammaln, logsumexp

from sketchbit.errors import SketchBitUsageError

logger = logging.getLogger("sketchbit.bnp.specialfn")

ArrayLike = Union[int, float, np.ndarray]
# natural log of a positive quantity; signed results use LogValue
LogFloat = float


class PypParamsLike(Protocol):
    """Anything exposing alpha and theta"""

    @property
    def alpha(self) -> float: ...

    @property
    def theta(self) -> float: ...


class SpecialFunctionException(SketchBitUsageError):
    """Argument outside the domain of a special function"""

    pass


@dataclass(frozen=True)
class LogValue:
    """Signed real number stored as (sign, log|value|)"""

    log_abs: float
    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise SpecialFunctionException(f"LogValue sign must be -1, 0 or 1, got {self.sign}")

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf, 0)

    @classmethod
    def one(cls) -> "LogValue":
        return cls(0.0, 1)

    @classmethod
    def from_log(cls, log_abs: float, sign: int = 1) -> "LogValue":
        if log_abs == -math.inf:
            return cls.zero()
        return cls(float(log_abs), sign)

    @classmethod
    def from_float(cls, value: float) -> "LogValue":
        if value == 0:
            return cls.zero()
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __neg__(self) -> "LogValue":
        return LogValue(self.log_abs, -self.sign)

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0 or other.sign == 0:
            return LogValue.zero()
        return LogValue(self.log_abs + other.log_abs, self.sign * other.sign)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("LogValue division by zero")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(self.log_abs - other.log_abs, self.sign * other.sign)

    def __add__(self, other: "LogValue") -> "LogValue":
        return logsumexp_signed(
            np.array([self.log_abs, other.log_abs]),
            np.array([self.sign, other.sign]),
        )

    def __sub__(self, other: "LogValue") -> "LogValue":
        return self + (-other)

    def log(self) -> float:
        """Natural log of a positive value"""
        if self.sign <= 0:
            raise SpecialFunctionException("log of a non-positive LogValue")
        return self.log_abs


def logsumexp_signed(log_abs: np.ndarray, signs: np.ndarray) -> LogValue:
    """Sum of sign_i * exp(log_abs_i) without leaving log space"""
    log_abs = np.asarray(log_abs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    live = (signs != 0) & np.isfinite(log_abs)
    if not np.any(live):
        return LogValue.zero()
    value, sign = logsumexp(log_abs[live], b=signs[live], return_sign=True)
    if sign == 0 or not np.isfinite(value):
        return LogValue.zero()
    return LogValue(float(value), int(sign))


def log_rising(a: float, n: int) -> LogFloat:
    """log (a)_(n) = log a(a+1)...(a+n-1) for a > 0"""
    if n < 0:
        raise SpecialFunctionException(f"Rising factorial length must be >= 0, got {n}")
    if not a > 0:
        raise SpecialFunctionException(f"Rising factorial base must be positive, got {a}")
    if n == 0:
        return 0.0
    if n <= 32:
        return float(np.sum(np.log(a + np.arange(n))))
    return float(gammaln(a + n) - gammaln(a))


def log_rising_vec(a: ArrayLike, n: ArrayLike) -> np.ndarray:
    """Elementwise log (a)_(n); exact zero where n == 0"""
    a_arr = np.asarray(a, dtype=float)
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0):
        raise SpecialFunctionException("Rising factorial length must be >= 0")
    if np.any((a_arr <= 0) & (n_arr > 0)):
        raise SpecialFunctionException("Rising factorial base must be positive")
    with np.errstate(invalid="ignore", divide="ignore"):
        out = gammaln(a_arr + n_arr) - gammaln(a_arr)
    return np.where(n_arr == 0, 0.0, out)


def log_rising_signed(a: float, n: int) -> LogValue:
    """(a)_(n) for any real base, as a LogValue"""
    if n < 0:
        raise SpecialFunctionException(f"Rising factorial length must be >= 0, got {n}")
    factors = a + np.arange(n, dtype=float)
    if np.any(factors == 0):
        return LogValue.zero()
    negatives = int(np.sum(factors < 0))
    return LogValue(float(np.sum(np.log(np.abs(factors)))), -1 if negatives % 2 else 1)


def log_binom(n: ArrayLike, k: ArrayLike) -> np.ndarray:
    n_arr = np.asarray(n, dtype=float)
    k_arr = np.asarray(k, dtype=float)
    return gammaln(n_arr + 1) - gammaln(k_arr + 1) - gammaln(n_arr - k_arr + 1)


@lru_cache(maxsize=64)
def _log_scaled_triangle(alpha: float, m_max: int) -> np.ndarray:
    """
    log S(m, k) with S(m, k) = C(m, k; alpha) / alpha^k.

    S(m+1, k) = (m - k*alpha) S(m, k) + S(m, k-1); all terms non-negative.
    With alpha = 0 the entries are the signless Stirling numbers of the first kind.
    """
    table = np.full((m_max + 1, m_max + 1), -np.inf)
    table[0, 0] = 0.0
    k = np.arange(m_max + 1, dtype=float)
    with np.errstate(divide="ignore"):
        for m in range(m_max):
            prev = table[m]
            stay = np.log(np.maximum(m - k * alpha, 0.0)) + prev
            shift = np.concatenate(([-np.inf], prev[:-1]))
            table[m + 1] = np.logaddexp(stay, shift)
            table[m + 1, m + 2 :] = -np.inf
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class GfcTable:
    """Generalized factorial coefficients C(m, k; alpha) for k <= m <= m_max"""

    alpha: float
    m_max: int
    log_scaled: np.ndarray

    @property
    def log_table(self) -> np.ndarray:
        k = np.arange(self.m_max + 1, dtype=float)
        if self.alpha == 0:
            return self.log_scaled
        return self.log_scaled + k[None, :] * math.log(self.alpha)

    def log_gfc(self, m: int, k: int) -> float:
        self._check(m, k)
        if self.alpha == 0:
            return float(self.log_scaled[m, k])
        return float(self.log_scaled[m, k] + k * math.log(self.alpha))

    def entry(self, m: int, k: int) -> LogValue:
        return LogValue.from_log(self.log_gfc(m, k))

    def _check(self, m: int, k: int) -> None:
        if not 0 <= k <= m <= self.m_max:
            raise SpecialFunctionException(
                f"GFC index (m={m}, k={k}) outside table with m_max={self.m_max}"
            )


def gfc_table(alpha: float, m_max: int) -> GfcTable:
    if not 0 < alpha < 1:
        raise SpecialFunctionException(f"alpha must lie in (0, 1), got {alpha}")
    if m_max < 1:
        raise SpecialFunctionException(f"m_max must be >= 1, got {m_max}")
    logger.debug(f"Building GFC table alpha={alpha}, m_max={m_max}")
    return GfcTable(alpha=alpha, m_max=m_max, log_scaled=_log_scaled_triangle(alpha, m_max))


def scaled_table(alpha: float, m_max: int) -> GfcTable:
    """Table for alpha in [0, 1); alpha = 0 holds signless Stirling numbers"""
    if not 0 <= alpha < 1:
        raise SpecialFunctionException(f"alpha must lie in [0, 1), got {alpha}")
    return GfcTable(alpha=alpha, m_max=m_max, log_scaled=_log_scaled_triangle(alpha, max(m_max, 1)))


def gfc_alternating(m: int, k: int, alpha: float) -> LogValue:
    """C(m, k; alpha) = (1/k!) sum_i (-1)^i binom(k, i) (-i*alpha)_(m)"""
    if not 0 <= k <= m:
        raise SpecialFunctionException(f"Need 0 <= k <= m, got m={m}, k={k}")
    total = LogValue.zero()
    for i in range(k + 1):
        term = log_rising_signed(-i * alpha, m)
        weight = LogValue(float(log_binom(k, i)), -1 if i % 2 else 1)
        total = total + weight * term
    return total / LogValue(float(gammaln(k + 1)), 1)


def stirling1_signless(m: int, k: int) -> LogFloat:
    """log |s(m, k)|"""
    if k < 0 or m < 0 or k > m:
        raise SpecialFunctionException(f"Need 0 <= k <= m, got m={m}, k={k}")
    return float(_log_scaled_triangle(0.0, max(m, 1))[m, k])


def _log_weight_prefix(alpha: float, theta: float, k_max: int) -> np.ndarray:
    """prefix[k] = sum_{i=1}^{k-1} log(theta + i*alpha), prefix[0] = prefix[1] = 0"""
    prefix = np.zeros(k_max + 1)
    if k_max >= 2:
        terms = np.log(theta + alpha * np.arange(1, k_max))
        prefix[2:] = np.cumsum(terms)
    return prefix


def km_log_pmf(m: int, alpha: float, theta: float, gfc: Optional[GfcTable] = None) -> np.ndarray:
    """log Pr[K_m = k] for k = 0..m"""
    if m < 0:
        raise SpecialFunctionException(f"Sample size must be >= 0, got {m}")
    if m == 0:
        return np.array([0.0])
    if gfc is None:
        gfc = scaled_table(alpha, m)
    elif gfc.m_max < m or gfc.alpha != alpha:
        raise SpecialFunctionException(
            f"GFC table (alpha={gfc.alpha}, m_max={gfc.m_max}) cannot serve m={m}, alpha={alpha}"
        )
    prefix = _log_weight_prefix(alpha, theta, m)
    out = prefix - log_rising(theta + 1, m - 1) + gfc.log_scaled[m, : m + 1]
    out[0] = -np.inf
    return out


def km_pmf(m: int, params: PypParamsLike, gfc: Optional[GfcTable] = None) -> np.ndarray:
    """Pr[K_m = k] for k = 1..m"""
    log_pmf = km_log_pmf(m, params.alpha, params.theta, gfc)
    return np.exp(log_pmf[1:])


def km_pgf_log(t: float, m: int, params: PypParamsLike, gfc: Optional[GfcTable] = None) -> LogFloat:
    """log E[t^K_m]"""
    if t <= 0:
        raise SpecialFunctionException(f"PGF argument must be positive, got {t}")
    if m == 0:
        return 0.0
    log_pmf = km_log_pmf(m, params.alpha, params.theta, gfc)
    k = np.arange(m + 1, dtype=float)
    return float(logsumexp(log_pmf[1:] + k[1:] * math.log(t)))
