"""The dart game: how often does the running minimum change?

n darts land on n distinct ordered locations in random order (a random
permutation).  S(i) is the smallest location hit by the first i darts and
Z(n) counts the indices where S changes, with i = 1 always counted.  By
deleting darts backwards, dart i is a new minimum with probability 1/i, so
E[Z(n)] = H_n and Z(n) is a sum of independent Bernoulli(1/i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .concentration import harmonic, harmonic_exact
from .martingale import TrialStats, WorkTrace
from .rng import InsertionOrder, all_permutations, make_rng, trial_seed


@dataclass
class DartTrace:
    mins: np.ndarray
    z: int

    @property
    def changes(self) -> np.ndarray:
        """0/1 per step; step 1 is always a change."""
        if len(self.mins) == 0:
            return np.zeros(0, dtype=np.int64)
        out = np.ones(len(self.mins), dtype=np.int64)
        out[1:] = self.mins[1:] < self.mins[:-1]
        return out


def play_darts(n: int, order: InsertionOrder) -> DartTrace:
    if len(order) != n:
        raise ValueError("order length must equal n")
    mins = np.minimum.accumulate(order.as_array()) if n else np.zeros(0, dtype=np.int64)
    z = int(1 + (mins[1:] < mins[:-1]).sum()) if n else 0
    return DartTrace(mins, z)


def record_count(perm: np.ndarray) -> int:
    """Z for a raw array; equivalent to ``play_darts(...).z``."""
    m = np.minimum.accumulate(perm)
    return int(1 + np.count_nonzero(m[1:] < m[:-1]))


def z_exact_distribution(n: int) -> list[Fraction]:
    """Pr[Z(n) = k] for k = 0..n, from the independent 1/i indicators."""
    dist = [Fraction(1)]
    for i in range(1, n + 1):
        p = Fraction(1, i)
        nxt = [Fraction(0)] * (len(dist) + 1)
        for k, w in enumerate(dist):
            nxt[k] += w * (1 - p)
            nxt[k + 1] += w * p
        dist = nxt
    return dist


def z_distribution_float(n: int) -> np.ndarray:
    """Float version of :func:`z_exact_distribution` for large n."""
    dist = np.zeros(n + 1)
    dist[0] = 1.0
    for i in range(1, n + 1):
        p = 1.0 / i
        dist[1:i + 1] = dist[1:i + 1] * (1 - p) + dist[0:i] * p
        dist[0] *= 1 - p
    return dist


def z_enumerated(n: int) -> dict[int, int]:
    """Histogram of Z over all n! orders."""
    hist: dict[int, int] = {}
    for p in all_permutations(n):
        z = play_darts(n, p).z
        hist[z] = hist.get(z, 0) + 1
    return hist


def exact_deviation_prob(n: int, width: float) -> float:
    """Pr[|Z(n) - H_n| >= width] under the exact law."""
    dist = z_distribution_float(n)
    h = harmonic(n)
    k = np.arange(n + 1)
    return float(dist[np.abs(k - h) >= width].sum())


@dataclass
class DartTailResult:
    n: int
    stats: TrialStats
    harmonic: float
    deviation_width: float
    deviation_prob: float           # empirical Pr[|Z - H_n| >= 0.9 ln n]
    deviation_bound: float          # n^-0.7
    window_prob: float              # empirical Pr[0.1 ln n <= Z <= 1.9 ln n]
    window_bound: float             # 1 - n^-0.7
    exact_deviation_prob: float
    z_hist: np.ndarray = field(repr=False)

    @property
    def deviation_ok(self) -> bool:
        return self.deviation_prob <= self.deviation_bound

    @property
    def window_ok(self) -> bool:
        return self.window_prob >= self.window_bound


def dart_tail_experiment(n: int, trials: int, seed: int) -> DartTailResult:
    """Z(n) over seeded trials; every log is natural."""
    if n < 2 or trials < 1:
        raise ValueError("need n >= 2 and trials >= 1")
    zs = np.empty(trials)
    for t in range(trials):
        perm = make_rng(trial_seed(seed, t)).permutation(n)
        zs[t] = record_count(perm)
    h = harmonic(n)
    ln = math.log(n)
    width = 0.9 * ln
    stats = TrialStats(n, False, zs, np.ones(trials))
    return DartTailResult(
        n=n, stats=stats, harmonic=h, deviation_width=width,
        deviation_prob=float(np.mean(np.abs(zs - h) >= width)),
        deviation_bound=n ** -0.7,
        window_prob=float(np.mean((zs >= 0.1 * ln) & (zs <= 1.9 * ln))),
        window_bound=1 - n ** -0.7,
        exact_deviation_prob=exact_deviation_prob(n, width),
        z_hist=np.bincount(zs.astype(np.int64), minlength=n + 1))


def dart_cost(order: InsertionOrder) -> int:
    """Z of an order, usable as a Doob cost function."""
    return play_darts(len(order), order).z


def dart_trace(order: InsertionOrder) -> WorkTrace:
    return WorkTrace(play_darts(len(order), order).changes)


def expected_z(n: int) -> Fraction:
    return harmonic_exact(n)
