#!/usr/bin/env python3
"""
Binned-MAE evaluation of frequency estimators on a token stream.

For every hashing configuration the stream is sketched once, priors are fitted
once, and every distinct token with true frequency in (0, 256] is queried.
Tokens sharing the same hashed row get the same estimates, so posteriors are
computed once per distinct row, in parallel when workers > 1.
"""
import logging
import numpy as np
from collections import Counter
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sketchbit.errors import SketchBitUsageError
from sketchbit.sketch.core.hashing import tokenize_text
from sketchbit.sketch.core.count_min import CountMinSketch, HashedRow, cms_estimate, cmm_estimate
from sketchbit.bnp.core.models import PypParams
from sketchbit.bnp.core.posterior_dp import dp_posterior_multi, fit_theta_empirical_bayes, posterior_summary
from sketchbit.bnp.core.posterior_pyp import PypPosteriorContext, pyp_posterior_multi
from sketchbit.bnp.core.fit import DEFAULT_BUDGET, DEFAULT_REPLICATES, FitConfig, SummaryVector, fit_params
from sketchbit.bench.core.report import BIN_EDGES, BinnedMaeReport

logger = logging.getLogger("sketchbit.bench.harness")

ESTIMATORS = (
    "cms",
    "cmm",
    "dp-mean",
    "dp-median",
    "dp-mode",
    "pyp-mean",
    "pyp-median",
    "pyp-mode",
)
DEFAULT_ESTIMATORS = ("cms", "cmm", "dp-mean", "pyp-mean")
MAX_QUERY_FREQUENCY = BIN_EDGES[-1]


class BenchException(SketchBitUsageError):
    """Invalid benchmark setup"""

    pass


@dataclass(frozen=True)
class HashConfig:
    """J buckets per row, N rows"""

    j: int
    n: int

    def __post_init__(self) -> None:
        if self.j < 2 or self.n < 1:
            raise BenchException(f"Hash configuration needs J >= 2 and N >= 1, got J={self.j}, N={self.n}")

    @property
    def label(self) -> str:
        return f"{self.j}x{self.n}"

    @classmethod
    def parse(cls, text: str) -> "HashConfig":
        """Parse `JxN`, e.g. 320x2"""
        try:
            j, n = (int(part) for part in text.lower().split("x"))
        except ValueError:
            raise BenchException(f"Hash configuration must look like JxN (e.g. 320x2), got {text!r}")
        return cls(j=j, n=n)


DEFAULT_CONFIGS = (HashConfig(j=320, n=2), HashConfig(j=160, n=4))


@dataclass(frozen=True)
class BenchConfig:
    estimators: Tuple[str, ...] = DEFAULT_ESTIMATORS
    configs: Tuple[HashConfig, ...] = DEFAULT_CONFIGS
    seed: int = 0
    workers: int = 1
    max_queries: Optional[int] = None
    alpha: Optional[float] = None
    theta: Optional[float] = None
    replicates: int = DEFAULT_REPLICATES
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise BenchException(f"Unknown estimator(s) {unknown}; choose from {', '.join(ESTIMATORS)}")
        if not self.estimators:
            raise BenchException("Select at least one estimator")
        if not self.configs:
            raise BenchException("Select at least one hash configuration")
        if self.workers < 1:
            raise BenchException(f"Workers must be >= 1, got {self.workers}")
        if self.max_queries is not None and self.max_queries < 1:
            raise BenchException(f"max_queries must be >= 1, got {self.max_queries}")
        if (self.alpha is None) != (self.theta is None):
            raise BenchException("Give both --alpha and --theta, or neither")

    @property
    def needs_dp(self) -> bool:
        return any(e.startswith("dp-") for e in self.estimators)

    @property
    def needs_pyp(self) -> bool:
        return any(e.startswith("pyp-") for e in self.estimators)


@dataclass
class BenchResult:
    reports: List[BinnedMaeReport]
    params: Dict[str, Dict[str, PypParams]] = field(default_factory=dict)
    queried: int = 0


def query_tokens(truth: Counter, max_queries: Optional[int], seed: int) -> List[str]:
    """Distinct tokens with f <= 256, optionally a uniform sample of them"""
    tokens = sorted(t for t, f in truth.items() if f <= MAX_QUERY_FREQUENCY)
    if max_queries is not None and len(tokens) > max_queries:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(len(tokens), size=max_queries, replace=False))
        tokens = [tokens[i] for i in keep]
        logger.info(f"Sampled {max_queries} query tokens out of {len(truth)} distinct")
    return tokens


def build_sketch(token_ids: Sequence[int], hash_config: HashConfig, seed: int) -> CountMinSketch:
    sketch = CountMinSketch.from_seed(hash_config.n, hash_config.j, seed)
    sketch.update_many(token_ids)
    return sketch


def make_estimators(
    sketch: CountMinSketch,
    names: Sequence[str],
    dp_theta: Optional[float] = None,
    pyp_params: Optional[PypParams] = None,
    exact_correction: bool = False,
) -> Dict[str, Callable[[HashedRow], float]]:
    """One point-estimate callable per estimator name"""
    unknown = [name for name in names if name not in ESTIMATORS]
    if unknown:
        raise BenchException(f"Unknown estimator(s) {unknown}; choose from {', '.join(ESTIMATORS)}")
    out: Dict[str, Callable[[HashedRow], float]] = {}
    ctx: Optional[PypPosteriorContext] = None
    for name in names:
        family, _, kind = name.partition("-")
        if name == "cms":
            out[name] = lambda row: float(cms_estimate(row))
        elif name == "cmm":
            out[name] = lambda row: cmm_estimate(row, sketch.m, sketch.j)
        elif family == "dp":
            if dp_theta is None:
                raise BenchException(f"Estimator {name} needs a DP theta")
            out[name] = lambda row, kind=kind, theta=dp_theta: posterior_summary(
                dp_posterior_multi(theta, sketch.j, row, exact_correction=exact_correction, m=sketch.m),
                kind,
            )
        else:
            if pyp_params is None:
                raise BenchException(f"Estimator {name} needs PYP parameters")
            if ctx is None:
                ctx = PypPosteriorContext(params=pyp_params, j=sketch.j, m=sketch.m)
            out[name] = lambda row, kind=kind, ctx=ctx: posterior_summary(
                pyp_posterior_multi(ctx, row, exact_correction=exact_correction), kind
            )
    return out


def fit_priors(sketch: CountMinSketch, cfg: BenchConfig) -> Dict[str, PypParams]:
    """Priors needed by the selected estimators, fitted on this sketch"""
    fitted: Dict[str, PypParams] = {}
    if cfg.needs_dp:
        fitted["dp"] = PypParams(alpha=0.0, theta=fit_theta_empirical_bayes(sketch))
    if cfg.needs_pyp:
        if cfg.alpha is not None and cfg.theta is not None:
            fitted["pyp"] = PypParams(alpha=cfg.alpha, theta=cfg.theta)
        else:
            fit_cfg = FitConfig.for_stream(
                sketch.m, seed=cfg.seed, r_replicates=cfg.replicates, budget=cfg.budget
            )
            fitted["pyp"] = fit_params(SummaryVector.from_sketch(sketch), fit_cfg, sketch.family).params
    logger.info(f"Priors for J={sketch.j}, N={sketch.n}: {fitted}")
    return fitted


def _estimate_rows(
    rows: List[HashedRow], estimators: Dict[str, Callable[[HashedRow], float]], workers: int
) -> List[Dict[str, float]]:
    def one(row: HashedRow) -> Dict[str, float]:
        return {name: estimate(row) for name, estimate in estimators.items()}

    if workers == 1:
        return [one(row) for row in rows]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(one, rows))


def run_bench(tokens: Sequence[str], cfg: BenchConfig) -> BenchResult:
    """Sketch the stream under every hash configuration and bin the estimation errors"""
    if not tokens:
        raise BenchException("Benchmark stream is empty")
    truth = Counter(tokens)
    ids = {token: tokenize_text(token) for token in truth}
    stream_ids = [ids[token] for token in tokens]
    queries = query_tokens(truth, cfg.max_queries, cfg.seed)
    logger.info(f"Benchmark: m={len(tokens)}, {len(truth)} distinct, {len(queries)} queried")

    result = BenchResult(reports=[], queried=len(queries))
    for hash_config in cfg.configs:
        sketch = build_sketch(stream_ids, hash_config, cfg.seed)
        fitted = fit_priors(sketch, cfg)
        estimators = make_estimators(
            sketch,
            cfg.estimators,
            dp_theta=fitted["dp"].theta if "dp" in fitted else None,
            pyp_params=fitted.get("pyp"),
        )
        result.params[hash_config.label] = fitted

        rows_by_key: Dict[Tuple[int, ...], HashedRow] = {}
        query_keys = []
        for token in queries:
            row = sketch.hashed_row(ids[token])
            key = tuple(int(v) for v in row.values)
            rows_by_key.setdefault(key, row)
            query_keys.append(key)
        distinct = list(rows_by_key)
        estimates = dict(zip(distinct, _estimate_rows([rows_by_key[k] for k in distinct], estimators, cfg.workers)))
        logger.debug(f"{hash_config.label}: {len(distinct)} distinct hashed rows for {len(queries)} queries")

        report = BinnedMaeReport(config=hash_config.label, estimators=tuple(cfg.estimators))
        for token, key in zip(queries, query_keys):
            report.add(truth[token], estimates[key])
        result.reports.append(report)
    return result
