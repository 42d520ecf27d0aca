#!/usr/bin/env python3
"""
Token streams for ingestion and benchmarking.

Three sources are understood: synthetic Zipf streams, plain token files (one
token per line, optionally split on whitespace) and UCI bag-of-words files
(three header lines D, W, NNZ followed by `docID wordID count` triples).
"""
import logging
import numpy as np
from pathlib import Path
from dataclasses import dataclass
from typing import Iterator, List, Optional, Union

from sketchbit.errors import SketchBitIOError, SketchBitUsageError

logger = logging.getLogger("sketchbit.bench.datasets")

SOURCES = ("zipf", "text", "uci")
DEFAULT_VOCAB = 100_000


class DatasetException(SketchBitUsageError):
    """Invalid dataset parameters"""

    pass


class DatasetFormatException(SketchBitIOError):
    """Unreadable or malformed token file"""

    pass


@dataclass(frozen=True)
class DatasetDescriptor:
    """Where a token stream comes from and how large it is"""

    source: str
    m: int
    path: Optional[Path] = None
    exponent: Optional[float] = None
    vocab: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise DatasetException(f"Unknown dataset source {self.source!r}")
        if self.m < 1:
            raise DatasetException(f"Dataset must hold at least one token, got m={self.m}")
        if self.source == "zipf" and (self.exponent is None or self.exponent <= 1):
            raise DatasetException(f"Zipf exponent must exceed 1, got {self.exponent}")
        logger.debug(f"DatasetDescriptor created: {self}")

    def label(self) -> str:
        if self.source == "zipf":
            return f"zipf(c={self.exponent:g})"
        return f"{self.source}:{self.path.name if self.path else '-'}"


def generate_zipf(c: float, m: int, vocab: int = DEFAULT_VOCAB, seed: int = 0) -> List[str]:
    """
    m i.i.d. ranks from Zipf(c) truncated to 1..vocab, by inverse CDF on the
    normalized weights r^(-c). Ranks are returned as decimal strings.
    """
    if c <= 1:
        raise DatasetException(f"Zipf exponent must exceed 1, got {c}")
    if m < 1:
        raise DatasetException(f"Stream length must be >= 1, got {m}")
    if vocab < 1:
        raise DatasetException(f"Vocabulary must be >= 1, got {vocab}")

    cdf = np.cumsum(np.power(np.arange(1, vocab + 1, dtype=float), -c))
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    u = np.random.default_rng(seed).random(m)
    ranks = np.searchsorted(cdf, u, side="right") + 1
    logger.debug(f"Generated Zipf stream c={c}, m={m}, vocab={vocab}, seed={seed}")
    return [str(r) for r in ranks]


def write_tokens(tokens: List[str], path: Union[str, Path]) -> None:
    try:
        Path(path).write_text("".join(f"{t}\n" for t in tokens), encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot write token stream {path}: {e}")
        raise DatasetFormatException(f"Cannot write token stream {path}: {e}")
    logger.info(f"Wrote {len(tokens)} tokens to {path}")


def _open_lines(path: Path) -> Iterator[str]:
    try:
        with path.open("r", encoding="utf-8") as handle:
            yield from handle
    except (OSError, UnicodeDecodeError) as e:
        logger.error(f"Cannot read {path}: {e}")
        raise DatasetFormatException(f"Cannot read {path}: {e}")


def read_tokens(path: Union[str, Path], split: bool = False) -> List[str]:
    """
    One token per line; blank lines are skipped. With split, every line is
    lowercased and split on whitespace.
    """
    path = Path(path)
    tokens: List[str] = []
    for line in _open_lines(path):
        if split:
            tokens.extend(line.lower().split())
            continue
        token = line.rstrip("\r\n")
        if token.strip():
            tokens.append(token)
    logger.debug(f"Read {len(tokens)} tokens from {path}")
    return tokens


def read_uci_bow(path: Union[str, Path]) -> List[str]:
    """Expand every `docID wordID count` triple into count copies of wordID"""
    path = Path(path)
    tokens: List[str] = []
    header: List[int] = []
    nnz_seen = 0
    for lineno, raw in enumerate(_open_lines(path), start=1):
        line = raw.strip()
        if lineno <= 3:
            try:
                header.append(int(line))
            except ValueError:
                raise DatasetFormatException(
                    f"{path}:{lineno}: expected an integer header value, got {line!r}"
                )
            continue
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise DatasetFormatException(
                f"{path}:{lineno}: expected 'docID wordID count', got {line!r}"
            )
        try:
            _, word, count = (int(v) for v in fields)
        except ValueError:
            raise DatasetFormatException(f"{path}:{lineno}: non-integer field in {line!r}")
        if count < 0 or word < 1:
            raise DatasetFormatException(f"{path}:{lineno}: invalid word id or count")
        tokens.extend([str(word)] * count)
        nnz_seen += 1

    if len(header) < 3:
        raise DatasetFormatException(f"{path}: missing the three-line D/W/NNZ header")
    if nnz_seen != header[2]:
        logger.warning(f"{path}: header announces {header[2]} triples, found {nnz_seen}")
    logger.debug(f"Read {len(tokens)} tokens from UCI file {path} (D={header[0]}, W={header[1]})")
    return tokens


def load_dataset(source: str, path: Union[str, Path], split: bool = False) -> List[str]:
    """Tokens of a text or UCI file; empty streams are rejected"""
    if source == "text":
        tokens = read_tokens(path, split=split)
    elif source == "uci":
        tokens = read_uci_bow(path)
    else:
        raise DatasetException(f"Cannot load source {source!r} from a file; choose text or uci")
    if not tokens:
        raise DatasetException(f"{path}: stream is empty (m must be >= 1)")
    return tokens


def materialize(descriptor: DatasetDescriptor, split: bool = False) -> List[str]:
    """Tokens described by a descriptor, generated or read"""
    if descriptor.source == "zipf":
        return generate_zipf(
            float(descriptor.exponent or 0.0),
            descriptor.m,
            descriptor.vocab or DEFAULT_VOCAB,
            descriptor.seed or 0,
        )
    if descriptor.path is None:
        raise DatasetException(f"Source {descriptor.source!r} needs an input path")
    return load_dataset(descriptor.source, descriptor.path, split=split)
