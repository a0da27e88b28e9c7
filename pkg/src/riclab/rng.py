"""Seeded randomness and permutation enumeration.

Every random choice in the package flows from a 64-bit master seed.  Trial
``i`` of an experiment gets its own stream derived from ``(master, i)`` with
numpy's ``SeedSequence`` so trials can run in any order, on any number of
workers, and still reproduce bit for bit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

MAX_ENUM_N = 10


class SizeLimitError(ValueError):
    """Raised when an exhaustive enumeration would be too large."""


def trial_seed(master: int, trial: int) -> int:
    """Derive the 64-bit seed of trial ``trial`` under master seed ``master``."""
    ss = np.random.SeedSequence(int(master), spawn_key=(int(trial),))
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class InsertionOrder:
    """A permutation of ``0..n-1``; ``items[k]`` is inserted at step ``k+1``."""

    items: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.items) != list(range(len(self.items))):
            raise ValueError("insertion order must be a permutation of 0..n-1")

    @classmethod
    def of(cls, seq: Sequence[int]) -> "InsertionOrder":
        return cls(tuple(int(v) for v in seq))

    @property
    def n(self) -> int:
        return len(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, k):
        return self.items[k]

    def prefix(self, k: int) -> tuple[int, ...]:
        if not 0 <= k <= self.n:
            raise IndexError(f"prefix length {k} outside 0..{self.n}")
        return self.items[:k]

    def reversed(self) -> "InsertionOrder":
        """The same run read as a deletion sequence."""
        return InsertionOrder(self.items[::-1])

    def rank(self) -> np.ndarray:
        """``rank[x]`` is the 0-based step at which object ``x`` is inserted."""
        r = np.empty(self.n, dtype=np.int64)
        r[list(self.items)] = np.arange(self.n)
        return r

    def as_array(self) -> np.ndarray:
        return np.asarray(self.items, dtype=np.int64)


def random_permutation(n: int, seed: int) -> InsertionOrder:
    """Uniform permutation of ``0..n-1`` (numpy's Fisher-Yates shuffle)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return InsertionOrder(tuple(int(v) for v in make_rng(seed).permutation(n)))


def permutation_array(n: int, rng: np.random.Generator) -> np.ndarray:
    """Array form for hot loops; avoids building tuples."""
    return rng.permutation(n).astype(np.int64)


def all_permutations(n: int) -> Iterator[InsertionOrder]:
    """All ``n!`` orders in lexicographic order."""
    if n > MAX_ENUM_N:
        raise SizeLimitError(f"refusing to enumerate {n}! permutations (limit n <= {MAX_ENUM_N})")
    for p in itertools.permutations(range(n)):
        yield InsertionOrder(p)
