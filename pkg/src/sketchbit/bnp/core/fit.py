#!/usr/bin/env python3
"""
Likelihood-free estimation of (alpha, theta).

The observed sketch is summarized by its flattened counts. Synthetic sketches
of m' tokens are drawn from PYP(alpha, theta), hashed through the same family
and rescaled by m/m'. The objective is the average 1-Wasserstein distance
over R replicates whose seeds stay fixed for every candidate, so that
objective differences reflect the parameters rather than sampling noise.
"""
import math
import logging
import numpy as np
from pathlib import Path
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union
from scipy.optimize import minimize
from scipy.stats import qmc, wasserstein_distance

from sketchbit.errors import SketchBitException, SketchBitIOError, SketchBitNumericError, SketchBitUsageError
from sketchbit.sketch.core.count_min import AnyFamily, CountMinSketch
from sketchbit.bnp.core.models import PypParams, dm_log_likelihood, sample_stream
from sketchbit.bnp.core.posterior_dp import THETA_GRID_POINTS, fit_theta_empirical_bayes

logger = logging.getLogger("sketchbit.bnp.fit")

DEFAULT_REPLICATES = 25
DEFAULT_BUDGET = 50
M_PRIME_CAP = 100_000
ALPHA_BOUNDS = (0.0, 0.95)
THETA_BOUNDS = (1.0e-2, 1.0e3)
MODELS = ("dp", "pyp")


class FitException(SketchBitUsageError):
    """Invalid fit configuration or inputs"""

    pass


class FitFailedException(SketchBitNumericError):
    """No finite objective value was found"""

    pass


class FitFormatException(SketchBitIOError):
    """Unreadable or malformed fit record"""

    pass


@dataclass(frozen=True)
class SummaryVector:
    """Unordered flattening of an N x J sketch, possibly rescaled"""

    values: np.ndarray
    m: int
    n: int

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or self.values.size == 0:
            raise FitException("Summary must be a non-empty vector")
        if self.values.size % self.n:
            raise FitException(f"Summary length {self.values.size} is not a multiple of N={self.n}")
        if np.any(self.values < 0):
            raise FitException("Summary entries must be non-negative")

    @classmethod
    def from_sketch(cls, sketch: CountMinSketch) -> "SummaryVector":
        return cls(values=sketch.counts.astype(float).ravel(), m=sketch.m, n=sketch.n)

    @property
    def j(self) -> int:
        return self.values.size // self.n


@dataclass(frozen=True)
class FitConfig:
    m_prime: int
    r_replicates: int = DEFAULT_REPLICATES
    seed: int = 0
    alpha_bounds: Tuple[float, float] = ALPHA_BOUNDS
    theta_bounds: Tuple[float, float] = THETA_BOUNDS
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        if self.m_prime < 1:
            raise FitException(f"m' must be >= 1, got {self.m_prime}")
        if self.r_replicates < 1:
            raise FitException(f"R must be >= 1, got {self.r_replicates}")
        if self.seed < 0:
            raise FitException(f"Seed must be non-negative, got {self.seed}")
        a_lo, a_hi = self.alpha_bounds
        if not 0 <= a_lo < a_hi < 1:
            raise FitException(f"alpha box must satisfy 0 <= lo < hi < 1, got {self.alpha_bounds}")
        t_lo, t_hi = self.theta_bounds
        if not 0 < t_lo < t_hi:
            raise FitException(f"theta box must satisfy 0 < lo < hi, got {self.theta_bounds}")
        if self.budget < 1:
            raise FitException(f"Budget must be >= 1, got {self.budget}")

    @classmethod
    def for_stream(cls, m: int, **overrides) -> "FitConfig":
        """Default m' = m/10 capped at 10^5"""
        overrides.setdefault("m_prime", max(1, min(m // 10, M_PRIME_CAP)))
        return cls(**overrides)

    @property
    def replicate_seeds(self) -> Tuple[int, ...]:
        state = np.random.SeedSequence(self.seed).generate_state(self.r_replicates, np.uint64)
        return tuple(int(s) for s in state)


@dataclass(frozen=True)
class FitResult:
    """Fitted prior; a DP fit stores alpha = 0 and its negative log-likelihood"""

    params: PypParams
    objective: float
    evaluations: int
    seed: int
    model: str = "pyp"
    trace: Tuple[Tuple[float, float, float], ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise FitException(f"Unknown model {self.model!r}")
        if self.model == "dp" and not self.params.is_dp:
            raise FitException("A DP fit must have alpha = 0")

    def to_text(self) -> str:
        return (
            f"# model={self.model}\n"
            f"{self.params.alpha:.17g} {self.params.theta:.17g} {self.objective:.17g} "
            f"{self.evaluations} {self.seed}\n"
        )

    @classmethod
    def from_text(cls, text: str) -> "FitResult":
        model = "pyp"
        record: Optional[str] = None
        record_line = 0
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                key, _, value = stripped.lstrip("#").strip().partition("=")
                if key.strip() == "model":
                    model = value.strip()
                continue
            if record is not None:
                raise FitFormatException(f"line {lineno}: unexpected second record")
            record = stripped
            record_line = lineno
        if record is None:
            raise FitFormatException("No 'alpha theta objective evaluations seed' record found")
        fields = record.split()
        if len(fields) != 5:
            raise FitFormatException(
                f"line {record_line}: expected 5 fields, found {len(fields)}"
            )
        try:
            alpha, theta, objective = (float(v) for v in fields[:3])
            evaluations, seed = int(fields[3]), int(fields[4])
        except ValueError:
            raise FitFormatException(f"line {record_line}: non-numeric field in {record!r}")
        if model not in MODELS:
            raise FitFormatException(f"Unknown model {model!r} in fit record")
        try:
            params = PypParams(alpha=alpha, theta=theta)
        except SketchBitUsageError as e:
            raise FitFormatException(f"line {record_line}: {e}")
        return cls(params=params, objective=objective, evaluations=evaluations, seed=seed, model=model)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")
        logger.info(f"Saved {self.model} fit to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FitResult":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            logger.error(f"Cannot read fit record {path}: {e}")
            raise FitFormatException(f"Cannot read fit record {path}: {e}")
        return cls.from_text(text)


def wasserstein1(x: SummaryVector, y: SummaryVector) -> float:
    """Order-1 Wasserstein distance between equal-size empirical measures"""
    if x.values.size != y.values.size:
        raise FitException(f"Summary lengths differ: {x.values.size} vs {y.values.size}")
    return float(wasserstein_distance(x.values, y.values))


def synthetic_summary(
    params: PypParams, family: AnyFamily, m_prime: int, m: int, seed: int
) -> SummaryVector:
    """Sketch of m' PYP draws through the family, every count scaled by m/m'"""
    if m_prime < 1:
        raise FitException(f"m' must be >= 1, got {m_prime}")
    tokens, _ = sample_stream(params, m_prime, seed)
    symbol_counts = np.bincount(tokens)
    buckets = np.array([family.buckets(symbol) for symbol in range(symbol_counts.size)], dtype=np.int64)
    counts = np.zeros((family.n, family.j))
    for row in range(family.n):
        np.add.at(counts[row], buckets[:, row], symbol_counts)
    scale = m / m_prime
    return SummaryVector(values=counts.ravel() * scale, m=m, n=family.n)


def fit_objective(
    params: PypParams, observed: SummaryVector, cfg: FitConfig, family: AnyFamily
) -> float:
    """Mean W1 distance to R synthetic summaries under common random numbers"""
    distances = [
        wasserstein1(observed, synthetic_summary(params, family, cfg.m_prime, observed.m, seed))
        for seed in cfg.replicate_seeds
    ]
    return float(np.mean(distances))


class _Objective:
    """Objective in (alpha, log theta) that records every evaluation"""

    def __init__(self, observed: SummaryVector, cfg: FitConfig, family: AnyFamily) -> None:
        self.observed = observed
        self.cfg = cfg
        self.family = family
        self.trace: List[Tuple[float, float, float]] = []

    def __call__(self, z: np.ndarray) -> float:
        if len(self.trace) >= self.cfg.budget:
            return 1.0e300
        alpha = float(np.clip(z[0], *self.cfg.alpha_bounds))
        log_lo, log_hi = (math.log(b) for b in self.cfg.theta_bounds)
        theta = math.exp(float(np.clip(z[1], log_lo, log_hi)))
        try:
            value = fit_objective(PypParams(alpha, theta), self.observed, self.cfg, self.family)
        except SketchBitException as e:
            logger.warning(f"Objective failed at alpha={alpha:.4f}, theta={theta:.4g}: {e}")
            value = math.inf
        self.trace.append((alpha, theta, value))
        logger.debug(f"objective(alpha={alpha:.4f}, theta={theta:.4g}) = {value:.6g}")
        return value if np.isfinite(value) else 1.0e300


def _initial_simplex(x0: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    simplex = [x0]
    for axis in range(x0.size):
        step = 0.1 * (upper[axis] - lower[axis])
        vertex = x0.copy()
        vertex[axis] = x0[axis] + step if x0[axis] + step <= upper[axis] else x0[axis] - step
        simplex.append(vertex)
    return np.array(simplex)


def fit_params(observed: SummaryVector, cfg: FitConfig, family: AnyFamily) -> FitResult:
    """
    Latin-hypercube design with half the budget over (alpha, log theta), then
    Nelder-Mead from the best design point with what is left.
    """
    if observed.n != family.n or observed.j != family.j:
        raise FitException(
            f"Summary shape N={observed.n}, J={observed.j} does not match family N={family.n}, J={family.j}"
        )
    lower = np.array([cfg.alpha_bounds[0], math.log(cfg.theta_bounds[0])])
    upper = np.array([cfg.alpha_bounds[1], math.log(cfg.theta_bounds[1])])
    objective = _Objective(observed, cfg, family)

    n_design = max(1, cfg.budget // 2)
    sampler = qmc.LatinHypercube(d=2, rng=np.random.default_rng(cfg.seed))
    design = qmc.scale(sampler.random(n_design), lower, upper)
    values = np.array([objective(z) for z in design])
    logger.info(f"Evaluated {n_design} design points; best objective {values.min():.6g}")

    remaining = cfg.budget - n_design
    if remaining > 0:
        x0 = design[int(np.argmin(values))]
        try:
            minimize(
                objective,
                x0,
                method="Nelder-Mead",
                bounds=list(zip(lower, upper)),
                options={
                    "maxfev": remaining,
                    "initial_simplex": _initial_simplex(x0, lower, upper),
                    "xatol": 1.0e-3,
                    "fatol": 1.0e-6,
                },
            )
        except Exception as e:
            logger.error(f"Nelder-Mead refinement failed: {e}")
            raise FitFailedException(f"Failed to refine the fit: {e}")

    finite = [entry for entry in objective.trace if np.isfinite(entry[2])]
    if not finite:
        raise FitFailedException("Every objective evaluation failed")
    alpha, theta, best = min(finite, key=lambda entry: entry[2])
    logger.info(
        f"PYP fit: alpha={alpha:.4f}, theta={theta:.4g}, objective={best:.6g} "
        f"after {len(objective.trace)} evaluations"
    )
    return FitResult(
        params=PypParams(alpha=alpha, theta=theta),
        objective=best,
        evaluations=len(objective.trace),
        seed=cfg.seed,
        model="pyp",
        trace=tuple(objective.trace),
    )


def fit_dp(sketch: CountMinSketch) -> FitResult:
    """Empirical Bayes DP fit packaged as a FitResult"""
    theta = fit_theta_empirical_bayes(sketch)
    return FitResult(
        params=PypParams(alpha=0.0, theta=theta),
        objective=-dm_log_likelihood(sketch.counts, theta),
        evaluations=THETA_GRID_POINTS,
        seed=0,
        model="dp",
    )
