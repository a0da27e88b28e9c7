"""Quicksort viewed as an incremental construction over intervals.

Pivots are the objects inserted in random order; the structure after step j
is the partition of the keys into the intervals cut out by the first j
pivots.  An element is charged one comparison at step j when the interval
that contains it changes.

Two boundary conventions are supported.

* plain: sentinels at -inf and +inf.  Element x is charged at step j iff the
  j-th pivot p lands in the open interval of x (and x is not p and not yet a
  pivot).  This is exactly the comparison count of ordinary quicksort.
* circular: the keys sit on a cycle.  After the pivot set R is inserted, the
  arc of x is (a, b] where b is the first pivot at or clockwise after x and a
  is the pivot preceding b.  Step j >= 2 charges x iff its pair (a, b) changes,
  which by deleting a random pivot backwards happens with probability exactly
  2/j.  Step 1 charges nobody.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numba
import numpy as np

from .concentration import harmonic, quicksort_freedman, azuma_bound
from .martingale import TrialStats, WorkTrace
from .rng import InsertionOrder, all_permutations, make_rng, trial_seed


@dataclass
class QuickSortTrace:
    element: int
    indicators: np.ndarray
    comparisons_total: int

    @property
    def charges(self) -> int:
        return int(self.indicators.sum())


def expected_charge(n: int) -> Fraction:
    """Sum_{j=2..n} 2/j, the exact per-element expectation under the circular rule."""
    return sum((Fraction(2, j) for j in range(2, n + 1)), Fraction(0))


def _ranks(values: Sequence) -> tuple[list, np.ndarray]:
    keys = list(values)
    if len(set(keys)) != len(keys):
        raise ValueError("duplicate keys are not supported")
    idx = sorted(range(len(keys)), key=lambda i: keys[i])
    rank = np.empty(len(keys), dtype=np.int64)
    rank[idx] = np.arange(len(keys))
    return [keys[i] for i in idx], rank


def run_quicksort(values: Sequence, order: InsertionOrder, tracked: int = 0,
                  circular: bool = False):
    """Insert pivots one by one and record comparisons.

    Returns ``(sorted_keys, QuickSortTrace, WorkTrace)``.  This is the
    readable reference; :func:`charge_counts` is the fast kernel used by the
    experiments, and the two are compared in the tests.
    """
    n = len(values)
    if len(order) != n:
        raise ValueError("order length must equal the number of keys")
    if n and not 0 <= tracked < n:
        raise ValueError("tracked element out of range")
    ref_sorted, rank = _ranks(values)
    inserted: list = []          # pivot ranks, kept sorted
    out: list = []               # pivot keys, kept sorted (the output)
    per_step = np.zeros(n, dtype=np.int64)
    ind = np.zeros(n, dtype=np.int64)
    x = int(rank[tracked]) if n else 0
    for j, obj in enumerate(order):
        p = int(rank[obj])
        i = bisect.bisect_left(inserted, p)
        if circular:
            if inserted:
                k = len(inserted)
                b = inserted[i % k]
                a = inserted[(i - 1) % k]
                size = (b - a) % n or n      # arc (a, b]; whole cycle if a == b
                per_step[j] = size
                if (x - a - 1) % n < size:
                    ind[j] = 1
        else:
            a = inserted[i - 1] if i > 0 else -1
            b = inserted[i] if i < len(inserted) else n
            per_step[j] = b - a - 2
            if a < x < b and x != p:
                ind[j] = 1
        inserted.insert(i, p)
        bisect.insort(out, values[obj])
    if out != ref_sorted:
        raise AssertionError("pivot structure disagrees with comparison sort")
    qt = QuickSortTrace(tracked, ind, int(per_step.sum()))
    return out, qt, WorkTrace(per_step)


@numba.njit(cache=True)
def _charge_kernel(pos, circular):
    # Replay the run backwards on a doubly linked list of the sorted ranks:
    # when the j-th pivot is unlinked its neighbours are exactly the pivots
    # bounding it at insertion time.
    n = pos.shape[0]
    prev = np.empty(n + 2, np.int64)
    nxt = np.empty(n + 2, np.int64)
    per_step = np.zeros(n, np.int64)
    diff = np.zeros(n + 1, np.int64)
    if circular:
        for r in range(n):
            prev[r] = (r - 1) % n
            nxt[r] = (r + 1) % n
    else:
        # ranks shifted by one; 0 and n+1 are the sentinels
        for r in range(n + 2):
            prev[r] = r - 1
            nxt[r] = r + 1
    for j in range(n - 1, -1, -1):
        p = pos[j]
        if circular:
            if j == 0:
                break
            a = prev[p]
            b = nxt[p]
            if a == p:
                break
            if j == 1:
                # only one other pivot: the arc is the whole cycle
                per_step[j] = n
                diff[0] += 1
                diff[n] -= 1
            else:
                size = (b - a) % n
                per_step[j] = size
                lo = a + 1
                hi = lo + size   # exclusive, may wrap
                if hi <= n:
                    diff[lo] += 1
                    diff[hi] -= 1
                else:
                    diff[lo] += 1
                    diff[n] -= 1
                    diff[0] += 1
                    diff[hi - n] -= 1
            nxt[a] = b
            prev[b] = a
        else:
            q = p + 1
            a = prev[q]
            b = nxt[q]
            per_step[j] = b - a - 2
            if b - a - 2 > 0:
                diff[a] += 1        # rank a is shifted rank a+1 - 1
                diff[b - 1] -= 1
                diff[p] -= 1
                diff[p + 1] += 1
            nxt[a] = b
            prev[b] = a
    per_elem = np.cumsum(diff[:n])
    return per_step, per_elem


def charge_counts(pos: np.ndarray, circular: bool) -> tuple[np.ndarray, np.ndarray]:
    """Per-step comparison counts and per-rank charges for one run.

    ``pos[j]`` is the sorted position of the pivot inserted at step j.
    """
    return _charge_kernel(np.ascontiguousarray(pos, dtype=np.int64), bool(circular))


@dataclass
class QuicksortTailResult:
    n: int
    c: float
    circular: bool
    stats: TrialStats
    threshold: float
    pair_tail: float                 # fraction of (trial, element) pairs at or above threshold
    freedman: float
    azuma: float
    cost_hist: np.ndarray = field(repr=False)
    indicator_mean: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def mean_per_element(self) -> float:
        return self.stats.mean_total / self.n

    @property
    def se_per_element(self) -> float:
        return self.stats.se_mean / self.n

    @property
    def expected_per_element(self) -> float:
        return float(expected_charge(self.n)) if self.circular else float("nan")


def _tail(n: int, c: float, circular: bool, positions, tracked: int,
          store_steps: bool) -> QuicksortTailResult:
    threshold = float(2 * harmonic(n) - 2 + 2 * c * math.log(n))
    hist = np.zeros(n + 1, dtype=np.int64)
    ind_sum = np.zeros(n, dtype=np.int64)
    totals, maxes, steps = [], [], []
    for pos in positions:
        per_step, per_elem = charge_counts(pos, circular)
        hist += np.bincount(per_elem, minlength=n + 1)
        totals.append(per_step.sum())
        maxes.append(per_step.max() if n else 0)
        if store_steps:
            steps.append(per_step)
        ind_sum += _indicator_row(pos, tracked, circular)
    stats = TrialStats(n, store_steps, np.array(totals, dtype=float), np.array(maxes, dtype=float))
    if store_steps:
        arr = np.asarray(steps, dtype=float)
        stats.step_sum = arr.sum(axis=0)
        stats.step_sq_sum = (arr ** 2).sum(axis=0)
    pairs = hist.sum()
    k0 = math.ceil(threshold - 1e-12)
    pair_tail = float(hist[max(k0, 0):].sum() / pairs) if k0 <= n else 0.0
    return QuicksortTailResult(
        n=n, c=c, circular=circular, stats=stats, threshold=threshold, pair_tail=pair_tail,
        freedman=quicksort_freedman(n, c),
        azuma=azuma_bound(2 * c * math.log(n), float(n)) if c > 0 else 1.0,
        cost_hist=hist, indicator_mean=ind_sum / max(stats.count, 1))


@numba.njit(cache=True)
def _indicator_kernel(pos, x, circular):
    # forward replay for a single rank x; O(n) via the same backward list trick
    n = pos.shape[0]
    out = np.zeros(n, np.int64)
    prev = np.empty(n + 2, np.int64)
    nxt = np.empty(n + 2, np.int64)
    if circular:
        for r in range(n):
            prev[r] = (r - 1) % n
            nxt[r] = (r + 1) % n
    else:
        for r in range(n + 2):
            prev[r] = r - 1
            nxt[r] = r + 1
    for j in range(n - 1, 0 if circular else -1, -1):
        p = pos[j]
        if circular:
            a = prev[p]
            b = nxt[p]
            if j == 1:
                out[j] = 1
            elif (x - a - 1) % n < (b - a) % n:
                out[j] = 1
            nxt[a] = b
            prev[b] = a
        else:
            q = p + 1
            a = prev[q]
            b = nxt[q]
            if a < x + 1 < b and x != p:
                out[j] = 1
            nxt[a] = b
            prev[b] = a
    return out


def _indicator_row(pos, x, circular):
    return _indicator_kernel(np.ascontiguousarray(pos, dtype=np.int64), int(x), bool(circular))


def quicksort_tail_experiment(n: int, trials: int, seed: int, c: float,
                              circular: bool = True, tracked: Optional[int] = None,
                              store_steps: bool = False) -> QuicksortTailResult:
    """Monte Carlo per-element tail against the Freedman and Azuma values.

    Keys are taken to be ``0..n-1`` (only their order matters), so the
    position of a pivot equals its label.
    """
    if n < 2 or trials < 1:
        raise ValueError("need n >= 2 and trials >= 1")
    tracked = n // 2 if tracked is None else tracked
    positions = (make_rng(trial_seed(seed, t)).permutation(n) for t in range(trials))
    return _tail(n, c, circular, positions, tracked, store_steps)


def quicksort_tail_exhaustive(n: int, c: float, circular: bool = True,
                              tracked: int = 0) -> QuicksortTailResult:
    """Same report over all n! orders (every order weighted once)."""
    positions = (np.array(p.items) for p in all_permutations(n))
    return _tail(n, c, circular, positions, tracked, True)


def per_element_cost(order: InsertionOrder, element: int, circular: bool) -> int:
    """Charge of one element for keys ``0..n-1``; handy as a Doob cost function."""
    return int(_indicator_row(order.as_array(), element, circular).sum())


def total_comparisons(order: InsertionOrder, circular: bool = False) -> int:
    per_step, _ = charge_counts(order.as_array(), circular)
    return int(per_step.sum())
