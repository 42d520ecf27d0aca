#!/usr/bin/env python3
import csv
import logging
import numpy as np
from pathlib import Path
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sketchbit.errors import SketchBitIOError, SketchBitUsageError

logger = logging.getLogger("sketchbit.bench.report")

BIN_EDGES = (0, 1, 2, 4, 8, 16, 32, 64, 128, 256)
CSV_FIELDS = ("config", "bin_lo", "bin_hi", "estimator", "mae", "tokens")


class ReportException(SketchBitUsageError):
    """Inconsistent benchmark results"""

    pass


class ReportWriteException(SketchBitIOError):
    """Report could not be written"""

    pass


def bins() -> List[Tuple[int, int]]:
    """Frequency intervals (lo, hi]"""
    return list(zip(BIN_EDGES[:-1], BIN_EDGES[1:]))


def bin_index(f: int) -> Optional[int]:
    """Index of the (lo, hi] interval containing f, or None outside (0, 256]"""
    if f <= BIN_EDGES[0] or f > BIN_EDGES[-1]:
        return None
    return int(np.searchsorted(BIN_EDGES, f, side="left")) - 1


@dataclass
class BinnedMaeReport:
    """
    Mean absolute error per frequency bin and estimator, for one hashing
    configuration. Tokens are binned by their true frequency.
    """

    config: str
    estimators: Tuple[str, ...]
    abs_error: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    tokens: np.ndarray = field(default_factory=lambda: np.zeros(len(BIN_EDGES) - 1, dtype=np.int64))

    def __post_init__(self) -> None:
        if not self.estimators:
            raise ReportException("A report needs at least one estimator")
        for name in self.estimators:
            self.abs_error.setdefault(name, np.zeros(len(BIN_EDGES) - 1))
        logger.debug(f"BinnedMaeReport created: config={self.config}, estimators={self.estimators}")

    def add(self, truth: int, estimates: Dict[str, float]) -> None:
        """Record one queried token"""
        index = bin_index(truth)
        if index is None:
            return
        missing = set(self.estimators) - set(estimates)
        if missing:
            raise ReportException(f"Missing estimates for {sorted(missing)}")
        self.tokens[index] += 1
        for name in self.estimators:
            self.abs_error[name][index] += abs(float(estimates[name]) - truth)

    def mae(self, estimator: str) -> np.ndarray:
        """Per-bin MAE; NaN where a bin holds no token"""
        if estimator not in self.abs_error:
            raise ReportException(f"Unknown estimator {estimator!r}")
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.tokens > 0, self.abs_error[estimator] / np.maximum(self.tokens, 1), np.nan)

    def rows(self) -> List[Dict[str, Union[str, int, float]]]:
        out = []
        for name in self.estimators:
            values = self.mae(name)
            for (lo, hi), value, count in zip(bins(), values, self.tokens):
                out.append(
                    {
                        "config": self.config,
                        "bin_lo": lo,
                        "bin_hi": hi,
                        "estimator": name,
                        "mae": "" if np.isnan(value) else f"{value:.6f}",
                        "tokens": int(count),
                    }
                )
        return out

    def to_text(self) -> str:
        """Aligned table: one row per bin, one column per estimator"""
        header = ["bin", *self.estimators, "tokens"]
        body = []
        for i, (lo, hi) in enumerate(bins()):
            cells = [f"({lo},{hi}]"]
            for name in self.estimators:
                value = self.mae(name)[i]
                cells.append("-" if np.isnan(value) else f"{value:.2f}")
            cells.append(str(int(self.tokens[i])))
            body.append(cells)
        widths = [max(len(row[k]) for row in [header, *body]) for k in range(len(header))]
        lines = [f"config {self.config}"]
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(header, widths)))
        lines.extend("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in body)
        return "\n".join(lines) + "\n"


def write_csv(reports: Sequence[BinnedMaeReport], path: Union[str, Path]) -> None:
    try:
        with Path(path).open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS)
            writer.writeheader()
            for report in reports:
                writer.writerows(report.rows())
    except OSError as e:
        logger.error(f"Cannot write report CSV {path}: {e}")
        raise ReportWriteException(f"Cannot write report CSV {path}: {e}")
    logger.info(f"Wrote {len(reports)} report(s) to {path}")
