#!/usr/bin/env python3
"""
Pairwise-independent hashing of 64-bit token ids into J buckets.

Row hashes are h(x) = ((a * (x mod p) + b) mod p) mod J with the Mersenne
prime p = 2^61 - 1. Parameters (a, b) are drawn from numpy's PCG64 generator
seeded with the family seed, so a family is reproducible from its seed alone.
"""
import logging
import numpy as np
from dataclasses import dataclass, field
from typing import Dict, Tuple

from sketchbit.errors import SketchBitIOError, SketchBitUsageError

logger = logging.getLogger("sketchbit.sketch.hashing")

MERSENNE_61 = (1 << 61) - 1
FNV64_OFFSET = 14695981039346656037
FNV64_PRIME = 1099511628211
_MASK_64 = (1 << 64) - 1


class HashingException(SketchBitUsageError):
    """Invalid hash family parameters"""

    pass


class HashFamilyFormatException(SketchBitIOError):
    """Malformed serialized hash family"""

    pass


def tokenize(token: bytes) -> int:
    """FNV-1a 64-bit digest of the token bytes"""
    digest = FNV64_OFFSET
    for byte in token:
        digest ^= byte
        digest = (digest * FNV64_PRIME) & _MASK_64
    return digest


def tokenize_text(token: str) -> int:
    return tokenize(token.encode("utf-8"))


@dataclass(frozen=True)
class HashSpec:
    """One row hash ((a*x + b) mod p) mod J"""

    a: int
    b: int
    j_buckets: int
    p: int = MERSENNE_61

    def __post_init__(self) -> None:
        if not 1 <= self.a < self.p:
            raise HashingException(f"Hash multiplier a={self.a} outside [1, p)")
        if not 0 <= self.b < self.p:
            raise HashingException(f"Hash offset b={self.b} outside [0, p)")
        if self.j_buckets < 1:
            raise HashingException(f"Bucket count must be >= 1, got {self.j_buckets}")

    def __call__(self, token_id: int) -> int:
        return hash_token(self, token_id)


def hash_token(spec: HashSpec, token_id: int) -> int:
    # numpy integers would wrap at 64 bits in a * x
    x = int(token_id) % spec.p
    return ((spec.a * x + spec.b) % spec.p) % spec.j_buckets


@dataclass(frozen=True)
class HashFamily:
    """N row hashes sharing J and p, drawn from a seed"""

    specs: Tuple[HashSpec, ...]
    seed: int

    def __post_init__(self) -> None:
        if not self.specs:
            raise HashingException("A hash family needs at least one row")
        if len({(s.j_buckets, s.p) for s in self.specs}) != 1:
            raise HashingException("All rows of a family must share J and p")
        logger.debug(
            f"HashFamily created: N={self.n}, J={self.j}, seed={self.seed}"
        )

    @property
    def n(self) -> int:
        return len(self.specs)

    @property
    def j(self) -> int:
        return self.specs[0].j_buckets

    @property
    def p(self) -> int:
        return self.specs[0].p

    def buckets(self, token_id: int) -> Tuple[int, ...]:
        return tuple(hash_token(spec, token_id) for spec in self.specs)

    def to_text(self) -> str:
        lines = [f"{self.n} {self.j} {self.p} {self.seed}"]
        lines.extend(f"{spec.a} {spec.b}" for spec in self.specs)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HashFamily":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise HashFamilyFormatException("Empty hash family record")
        try:
            n, j, p, seed = (int(tok) for tok in lines[0].split())
        except ValueError:
            raise HashFamilyFormatException(
                f"line 1: expected 'N J p seed', got {lines[0]!r}"
            )
        if len(lines) != n + 1:
            raise HashFamilyFormatException(
                f"Expected {n} hash rows after the header, found {len(lines) - 1}"
            )
        specs = []
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                a, b = (int(tok) for tok in line.split())
            except ValueError:
                raise HashFamilyFormatException(
                    f"line {lineno}: expected 'a b', got {line!r}"
                )
            specs.append(HashSpec(a=a, b=b, j_buckets=j, p=p))
        return cls(specs=tuple(specs), seed=seed)


def draw_family(n: int, j: int, seed: int) -> HashFamily:
    """Draw N row hashes for J buckets, deterministically in the seed"""
    if n < 1:
        raise HashingException(f"Number of hashes must be >= 1, got {n}")
    if j < 1:
        raise HashingException(f"Number of buckets must be >= 1, got {j}")
    if seed < 0:
        raise HashingException(f"Seed must be non-negative, got {seed}")

    rng = np.random.default_rng(seed)
    a_values = rng.integers(1, MERSENNE_61, size=n, dtype=np.int64)
    b_values = rng.integers(0, MERSENNE_61, size=n, dtype=np.int64)
    specs = tuple(
        HashSpec(a=int(a), b=int(b), j_buckets=j)
        for a, b in zip(a_values, b_values)
    )
    logger.debug(f"Drew hash family N={n}, J={j}, seed={seed}")
    return HashFamily(specs=specs, seed=seed)


@dataclass
class PerfectHashFamily:
    """
    Idealized family: every distinct symbol gets i.i.d. uniform buckets.

    Buckets are a function of (seed, token_id) only, so results do not depend
    on query order. Not serializable.
    """

    n: int
    j: int
    seed: int
    _memo: Dict[int, Tuple[int, ...]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.n < 1 or self.j < 1:
            raise HashingException(
                f"Perfect hash needs n >= 1 and j >= 1, got n={self.n}, j={self.j}"
            )

    def buckets(self, token_id: int) -> Tuple[int, ...]:
        token_id = int(token_id)
        cached = self._memo.get(token_id)
        if cached is None:
            rng = np.random.default_rng([self.seed, token_id])
            cached = tuple(int(v) for v in rng.integers(0, self.j, size=self.n))
            self._memo[token_id] = cached
        return cached
