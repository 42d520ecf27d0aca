#!/usr/bin/env python3
import logging
import numpy as np
from pathlib import Path
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Union

from sketchbit.errors import (
    SketchBitIOError,
    SketchBitNumericError,
    SketchBitUsageError,
)
from sketchbit.sketch.core.hashing import HashFamily, PerfectHashFamily, draw_family

logger = logging.getLogger("sketchbit.sketch.count_min")

_COUNTER_MAX = np.iinfo(np.uint64).max

AnyFamily = Union[HashFamily, PerfectHashFamily]


class SketchException(SketchBitUsageError):
    """Invalid sketch operation"""

    pass


class SketchFormatException(SketchBitIOError):
    """Unreadable or malformed sketch snapshot"""

    pass


class SketchOverflowException(SketchBitNumericError):
    """A 64-bit counter would overflow"""

    pass


@dataclass(frozen=True)
class HashedRow:
    """Counters C_{n, h_n(v)} of one query token, one per hash row"""

    values: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.values < 0):
            raise SketchException("Hashed counts must be non-negative")

    @classmethod
    def of(cls, values: Iterable[int]) -> "HashedRow":
        return cls(values=np.asarray(list(values), dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def support_max(self) -> int:
        return int(self.values.min())


class CountMinSketch:
    """N x J counter matrix fed by N pairwise-independent hashes"""

    def __init__(self, family: AnyFamily) -> None:
        self.family = family
        self.counts = np.zeros((family.n, family.j), dtype=np.uint64)
        self.m = 0
        logger.debug(f"CountMinSketch created: N={family.n}, J={family.j}")

    @classmethod
    def from_seed(cls, n: int, j: int, seed: int) -> "CountMinSketch":
        return cls(draw_family(n, j, seed))

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def j(self) -> int:
        return self.family.j

    def update(self, token_id: int) -> None:
        if self.m >= _COUNTER_MAX:
            raise SketchOverflowException("Token counter would overflow 64 bits")
        for row, bucket in enumerate(self.family.buckets(token_id)):
            self.counts[row, bucket] += np.uint64(1)
        self.m += 1

    def update_many(self, token_ids: Iterable[int]) -> None:
        """Ingest a batch; equivalent to calling update once per token"""
        tally = Counter(token_ids)
        if not tally:
            return
        batch = sum(tally.values())
        if self.m + batch > _COUNTER_MAX:
            raise SketchOverflowException("Token counter would overflow 64 bits")

        bucket_matrix = np.array(
            [self.family.buckets(token_id) for token_id in tally], dtype=np.int64
        )
        weights = np.fromiter(tally.values(), dtype=np.uint64, count=len(tally))
        for row in range(self.n):
            np.add.at(self.counts[row], bucket_matrix[:, row], weights)
        self.m += batch

        logger.debug(
            f"Ingested batch of {batch} tokens ({len(tally)} distinct), m={self.m}"
        )
        self._check_row_sums()

    def hashed_row(self, token_id: int) -> HashedRow:
        values = [
            int(self.counts[row, bucket])
            for row, bucket in enumerate(self.family.buckets(token_id))
        ]
        return HashedRow.of(values)

    def merge(self, other: "CountMinSketch") -> "CountMinSketch":
        """Cellwise sum of two sketches built with the same family"""
        if self.family != other.family:
            raise SketchException("Can only merge sketches sharing a hash family")
        if self.m + other.m > _COUNTER_MAX:
            raise SketchOverflowException("Merged token count would overflow 64 bits")
        merged = CountMinSketch(self.family)
        merged.counts = self.counts + other.counts
        merged.m = self.m + other.m
        return merged

    def _check_row_sums(self) -> None:
        sums = self.counts.sum(axis=1, dtype=np.uint64)
        if np.any(sums != np.uint64(self.m)):
            raise SketchOverflowException(
                f"Row sums {sums.tolist()} disagree with m={self.m}"
            )

    def save(self, path: Union[str, Path]) -> None:
        """Write `N J m seed` then one line of counts per row"""
        if not isinstance(self.family, HashFamily):
            raise SketchException("Sketches built on a perfect hash cannot be saved")
        lines = [f"{self.n} {self.j} {self.m} {self.family.seed}"]
        lines.extend(" ".join(str(int(v)) for v in row) for row in self.counts)
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
        logger.info(f"Saved sketch snapshot to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CountMinSketch":
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except (OSError, UnicodeDecodeError) as e:
            logger.error(f"Cannot read sketch snapshot {path}: {e}")
            raise SketchFormatException(f"Cannot read sketch snapshot {path}: {e}")

        if not lines:
            raise SketchFormatException(f"{path}: empty snapshot")
        try:
            n, j, m, seed = (int(tok) for tok in lines[0].split())
        except ValueError:
            raise SketchFormatException(
                f"{path}:1: expected header 'N J m seed', got {lines[0]!r}"
            )
        if n < 1 or j < 1 or m < 0 or seed < 0:
            raise SketchFormatException(f"{path}:1: invalid header values")
        if len(lines) < n + 1:
            raise SketchFormatException(
                f"{path}: expected {n} count rows, found {len(lines) - 1}"
            )

        sketch = cls.from_seed(n, j, seed)
        for row in range(n):
            lineno = row + 2
            try:
                values = [int(tok) for tok in lines[row + 1].split()]
            except ValueError:
                raise SketchFormatException(f"{path}:{lineno}: non-integer count")
            if len(values) != j:
                raise SketchFormatException(
                    f"{path}:{lineno}: expected {j} counts, found {len(values)}"
                )
            if min(values) < 0:
                raise SketchFormatException(f"{path}:{lineno}: negative count")
            if sum(values) != m:
                raise SketchFormatException(
                    f"{path}:{lineno}: row sums to {sum(values)}, header says m={m}"
                )
            sketch.counts[row] = np.array(values, dtype=np.uint64)
        sketch.m = m
        logger.info(f"Loaded sketch snapshot {path}: N={n}, J={j}, m={m}")
        return sketch


def update(sketch: CountMinSketch, token_id: int) -> CountMinSketch:
    sketch.update(token_id)
    return sketch


def hashed_row(sketch: CountMinSketch, token_id: int) -> HashedRow:
    return sketch.hashed_row(token_id)


def cms_estimate(row: HashedRow) -> int:
    if row.n == 0:
        raise SketchException("Hashed row is empty")
    return int(row.values.min())


def cmm_estimate(row: HashedRow, m: int, j: int) -> float:
    """Median of per-row noise-corrected counts, clamped to [0, CMS]"""
    if j < 2:
        raise SketchException(f"CMM needs J >= 2, got J={j}")
    if row.n == 0:
        raise SketchException("Hashed row is empty")
    values = row.values.astype(float)
    corrected = values - (m - values) / (j - 1)
    return float(np.clip(np.median(corrected), 0.0, cms_estimate(row)))
