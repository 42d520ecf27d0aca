#!/usr/bin/env python3
"""
Brute-force law of query frequencies and hashed counts for tiny streams.

Set partitions of the first m draws are enumerated as restricted-growth
strings and weighted by the Pitman-Yor EPPF. The s query draws are then
seated with the predictive rule, every block receives an independent uniform
bucket per hash, and the hashed counts seen by the query tokens are
convolved out exactly. The result is the joint table of
(f_1..f_s, C_{1,1}..C_{1,s}, ..., C_{N,1}..C_{N,s}).
"""
import math
import logging
import numpy as np
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple

from sketchbit.errors import SketchBitUsageError
from sketchbit.bnp.core.models import PypParams
from sketchbit.bnp.core.specialfn import log_rising

logger = logging.getLogger("sketchbit.bnp.oracle")

ORACLE_MAX_M = 10
ORACLE_MAX_J = 4
ORACLE_MAX_HASHES = 2


class OracleException(SketchBitUsageError):
    """Oracle request outside the enumerable range or impossible conditioning"""

    pass


def _restricted_growth_strings(m: int) -> Iterator[List[int]]:
    """Block sizes of every set partition of {1..m}"""
    if m == 0:
        yield []
        return
    sizes: List[int] = []

    def extend(i: int) -> Iterator[List[int]]:
        if i == m:
            yield sizes
            return
        for block in range(len(sizes)):
            sizes[block] += 1
            yield from extend(i + 1)
            sizes[block] -= 1
        sizes.append(1)
        yield from extend(i + 1)
        sizes.pop()

    yield from extend(0)


def _log_eppf(sizes: Sequence[int], params: PypParams) -> float:
    m = sum(sizes)
    if m == 0:
        return 0.0
    alpha, theta = params.alpha, params.theta
    out = sum(math.log(theta + i * alpha) for i in range(1, len(sizes)))
    out -= log_rising(theta + 1.0, m - 1)
    out += sum(log_rising(1.0 - alpha, n - 1) for n in sizes)
    return out


def _configuration_weights(m: int, params: PypParams) -> Dict[Tuple[int, ...], float]:
    """Probability of each block-size multiset of the first m draws"""
    weights: Dict[Tuple[int, ...], float] = defaultdict(float)
    partitions = 0
    for sizes in _restricted_growth_strings(m):
        weights[tuple(sorted(sizes, reverse=True))] += math.exp(_log_eppf(sizes, params))
        partitions += 1
    logger.debug(f"Enumerated {partitions} partitions of {m} draws into {len(weights)} configurations")
    return dict(weights)


def _seat(occupied: List[int], n_seated: int, params: PypParams) -> List[Tuple[int, float]]:
    """
    Predictive moves for one more draw.

    occupied lists the seated size of every block, n_seated their total.
    Returns (block index, probability); index len(occupied) means a new block.
    """
    if n_seated == 0:
        return [(0, 1.0)]
    alpha, theta = params.alpha, params.theta
    denom = theta + n_seated
    moves = [(b, (size - alpha) / denom) for b, size in enumerate(occupied)]
    moves.append((len(occupied), (theta + len(occupied) * alpha) / denom))
    return [(b, p) for b, p in moves if p > 0]


def _single_count_law(f: int, others: Sequence[int], m: int, t: float) -> np.ndarray:
    """Law of C = f + sum of other blocks sharing the query bucket"""
    law = np.zeros(m + 1)
    law[f] = 1.0
    for size in others:
        shifted = np.zeros_like(law)
        shifted[size:] = law[: m + 1 - size]
        law = (1.0 - t) * law + t * shifted
    return law


def _pair_count_law(f1: int, f2: int, others: Sequence[int], m: int, t: float) -> np.ndarray:
    """Law of (C_1, C_2) for two distinct query symbols"""
    same = np.zeros((m + 1, m + 1))
    shared = _single_count_law(f1 + f2, others, m, t)
    same[np.arange(m + 1), np.arange(m + 1)] = shared
    if t >= 1.0:
        return same

    split = np.zeros((m + 1, m + 1))
    split[f1, f2] = 1.0
    for size in others:
        to_first = np.zeros_like(split)
        to_first[size:, :] = split[: m + 1 - size, :]
        to_second = np.zeros_like(split)
        to_second[:, size:] = split[:, : m + 1 - size]
        split = (1.0 - 2.0 * t) * split + t * to_first + t * to_second
    return t * same + (1.0 - t) * split


def _repeat_outer(law: np.ndarray, n_hashes: int) -> np.ndarray:
    out = law
    for _ in range(n_hashes - 1):
        out = np.multiply.outer(out, law)
    return out


@dataclass(frozen=True)
class OracleLaw:
    """
    Exact joint law of query frequencies and hashed counts.

    table axes: s frequency axes, then s count axes for each hash in turn.
    Every axis runs over 0..m.
    """

    m: int
    j: int
    s: int
    n_hashes: int
    table: np.ndarray

    def __post_init__(self) -> None:
        logger.debug(
            f"OracleLaw m={self.m}, J={self.j}, s={self.s}, N={self.n_hashes}, "
            f"total mass {self.table.sum():.15f}"
        )

    @property
    def frequency_law(self) -> np.ndarray:
        """Marginal law of (f_1..f_s)"""
        return self.table.sum(axis=tuple(range(self.s, self.table.ndim)))

    def _condition(self, counts: Sequence[int]) -> np.ndarray:
        if len(counts) != self.s * self.n_hashes:
            raise OracleException(
                f"Expected {self.s * self.n_hashes} hashed counts, got {len(counts)}"
            )
        if any(not 0 <= c <= self.m for c in counts):
            raise OracleException(f"Hashed counts must lie in [0, {self.m}], got {list(counts)}")
        joint = self.table[(Ellipsis, *counts)]
        evidence = joint.sum()
        if evidence <= 0:
            raise OracleException(f"Hashed counts {list(counts)} have zero probability")
        return joint / evidence

    def conditional_single(self, counts: Sequence[int]) -> np.ndarray:
        """Pr[f = l | C_n = counts[n] for every hash], l = 0..m"""
        if self.s != 1:
            raise OracleException("conditional_single needs a single query draw")
        return self._condition(list(counts))

    def conditional_pair(self, pairs: Sequence[Tuple[int, int]]) -> np.ndarray:
        """Pr[f_1 = l1, f_2 = l2 | (C_{n,1}, C_{n,2}) = pairs[n]]"""
        if self.s != 2:
            raise OracleException("conditional_pair needs two query draws")
        return self._condition([c for pair in pairs for c in pair])

    def conditional_independent_hashes(self, counts: Sequence[int]) -> np.ndarray:
        """
        Posterior of f when the N hashed counts are treated as independent
        given f, built from this single-hash law:
        p(l) proportional to Pr[f=l]^(1-N) * prod_n Pr[f=l, C=counts[n]].
        """
        if self.s != 1 or self.n_hashes != 1:
            raise OracleException("Needs a single-hash, single-query law")
        prior = self.frequency_law
        live = prior > 0
        out = np.zeros(self.m + 1)
        out[live] = prior[live] ** (1 - len(counts))
        for c in counts:
            out = out * self.table[:, c]
        total = out.sum()
        if total <= 0:
            raise OracleException(f"Hashed counts {list(counts)} have zero probability")
        return out / total


def enumeration_oracle(
    m: int, j: int, params: PypParams, s: int = 1, n_hashes: int = 1
) -> OracleLaw:
    """Exact law of (f_{X_{m+1..m+s}}, hashed counts) under perfectly random hashing"""
    if not 0 <= m <= ORACLE_MAX_M:
        raise OracleException(f"Oracle needs 0 <= m <= {ORACLE_MAX_M}, got {m}")
    if not 1 <= j <= ORACLE_MAX_J:
        raise OracleException(f"Oracle needs 1 <= J <= {ORACLE_MAX_J}, got {j}")
    if s not in (1, 2):
        raise OracleException(f"Oracle supports one or two query draws, got s={s}")
    if not 1 <= n_hashes <= ORACLE_MAX_HASHES:
        raise OracleException(f"Oracle supports 1..{ORACLE_MAX_HASHES} hashes, got {n_hashes}")

    t = 1.0 / j
    shape = (m + 1,) * (s + s * n_hashes)
    table = np.zeros(shape)

    for sizes, weight in _configuration_weights(m, params).items():
        blocks = list(sizes)
        for first, p_first in _seat(blocks, m, params):
            f1 = blocks[first] if first < len(blocks) else 0
            if s == 1:
                others = blocks[:first] + blocks[first + 1 :]
                law = _single_count_law(f1, others, m, t)
                table[f1] += weight * p_first * _repeat_outer(law, n_hashes)
                continue

            seated = blocks + [1] if first == len(blocks) else blocks.copy()
            if first < len(blocks):
                seated[first] += 1
            for second, p_second in _seat(seated, m + 1, params):
                f2 = blocks[second] if second < len(blocks) else 0
                p = weight * p_first * p_second
                if second == first:
                    others = blocks[:first] + blocks[first + 1 :]
                    diagonal = _single_count_law(f1, others, m, t)
                    law = np.diag(diagonal)
                else:
                    chosen = {first, second}
                    others = [size for b, size in enumerate(blocks) if b not in chosen]
                    law = _pair_count_law(f1, f2, others, m, t)
                table[f1, f2] += p * _repeat_outer(law, n_hashes)

    return OracleLaw(m=m, j=j, s=s, n_hashes=n_hashes, table=table)
