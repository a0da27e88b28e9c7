"""Monte Carlo experiments on the trapezoidal-map builders.

Inputs without crossings run through the compiled kernel in
:mod:`._fastmap`; everything else (crossing inputs, list-free mode) runs
through the reference builder in :mod:`.trapmap`.  All logs are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from ._fastmap import fast_build, seg_arrays
from .adversary import AdversaryConfig, gen_adversary
from .concentration import harmonic, inverse_ackermann
from .geometry import DegenerateInputError, Segment, check_cap, pairwise_disjoint
from .martingale import TrialStats, WorkTrace, trace_aggregate
from .rng import InsertionOrder, all_permutations, make_rng, trial_seed
from .trapmap import (MODES, Arrangement, brute_decomposition, build_trapmap, grid_segments,
                      random_noncrossing, vcmp)

GENERATORS = ("random-noncrossing", "grid", "adversary")

# stream key of the input generator, kept apart from the trial streams 0, 1, ...
INPUT_STREAM = 2 ** 32 - 1


def segment_generator(name: str, n: int = 0, seed: int = 0, k: int = 0) -> list[Segment]:
    """Build an input by generator name; ``grid`` uses ``k``, the others ``n``."""
    if name == "random-noncrossing":
        return random_noncrossing(n, make_rng(trial_seed(seed, INPUT_STREAM)))
    if name == "grid":
        if k < 1:
            raise ValueError("grid needs k >= 1")
        return grid_segments(k)
    if name == "adversary":
        return gen_adversary(AdversaryConfig(n))
    raise ValueError(f"unknown generator {name!r}; expected one of {GENERATORS}")


@dataclass
class BoundRow:
    name: str
    threshold: float
    empirical: float
    bound: float
    applicable: bool

    @property
    def holds(self) -> bool:
        """Empirical tail at or below the bound (vacuously true off-regime)."""
        return (not self.applicable) or self.empirical <= self.bound


@dataclass
class SegintTailResult:
    n: int
    m: int
    mode: str
    stats: TrialStats
    seeds: np.ndarray
    sq_sums: np.ndarray
    bounds: list[BoundRow] = field(default_factory=list)

    @property
    def scale(self) -> float:
        """n ln n + m, the expected-work scale."""
        return self.n * math.log(max(self.n, 2)) + self.m

    @property
    def mean_ratio(self) -> float:
        return self.stats.mean_total / self.scale


def _prepare(segs: list[Segment]):
    """(arrangement or None, kernel arrays or None, m) for one input."""
    for sg in segs:
        check_cap(sg.coords())
    if segs and pairwise_disjoint(segs):
        return None, seg_arrays(segs), 0
    arr = Arrangement(segs)
    return arr, None, arr.m


def _trial_trace(segs, arr, arrays, order: np.ndarray, mode: str) -> WorkTrace:
    if arrays is not None and mode == "conflict-graph":
        return WorkTrace(fast_build(arrays, order).work)
    arr = arr or Arrangement(segs, check=False)
    _, trace, _, _ = build_trapmap(segs, InsertionOrder.of(order), mode, arr=arr)
    return trace


def bound_rows(stats: TrialStats, n: int, m: int, mode: str, beta: float = 1.0,
               c_const: float = 2.0) -> list[BoundRow]:
    """Compare the empirical total-work tail with the three closed forms.

    conflict-graph, m >= beta n ln^2 n : Pr[work >= m] vs exp(-m / (n ln^2 n))
    conflict-graph, m == 0             : Pr[work >= c beta n ln^2 n] vs n^(-beta^2)
    list-free                          : Pr[work >= c (m + n ln n)] vs exp(-ln n / alpha(n)),
                                         or exp(-m / (n alpha(n))) once m >= n ln n
    """
    if n < 2:
        return []
    ln = math.log(n)
    rows = []
    if mode == "conflict-graph":
        thr = float(m)
        rows.append(BoundRow("crossing-tail", thr, stats.tail([thr])[0],
                             math.exp(-m / (n * ln * ln)), m >= beta * n * ln * ln))
        thr = c_const * beta * n * ln * ln
        rows.append(BoundRow("noncrossing-tail", thr, stats.tail([thr])[0], n ** (-beta * beta), m == 0))
    else:
        a = inverse_ackermann(n)
        thr = c_const * (m + n * ln)
        bound = math.exp(-m / (n * a)) if m >= n * ln else math.exp(-ln / a)
        rows.append(BoundRow("list-free-tail", thr, stats.tail([thr])[0], bound, True))
    return rows


def segint_tail_experiment(source: Union[str, Sequence[Segment]], trials: int, seed: int,
                           mode: str = "conflict-graph", n: int = 0, k: int = 0,
                           beta: float = 1.0, c_const: float = 2.0,
                           store_steps: bool = False) -> SegintTailResult:
    """Total work over ``trials`` random orders of one fixed input.

    ``source`` is either a list of segments or a generator name (see
    :data:`GENERATORS`).  Trial t uses the order drawn from ``trial_seed(seed, t)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    segs = segment_generator(source, n, seed, k) if isinstance(source, str) else list(source)
    n = len(segs)
    arr, arrays, m = _prepare(segs)
    if arr is None and mode == "list-free":
        arr = Arrangement(segs, check=False)
    traces, seeds = [], np.empty(trials, dtype=np.uint64)
    for t in range(trials):
        s = trial_seed(seed, t)
        seeds[t] = s
        traces.append(_trial_trace(segs, arr, arrays, make_rng(s).permutation(n), mode))
    stats = trace_aggregate(traces, store_steps) if n else TrialStats(0, False, np.zeros(trials), np.zeros(trials))
    sq = np.array([tr.sq_sum for tr in traces])
    return SegintTailResult(n, m, mode, stats, seeds, sq, bound_rows(stats, n, m, mode, beta, c_const))


# point location -----------------------------------------------------------------

def random_queries(segs: Sequence[Segment], count: int, rng: np.random.Generator,
                   coord: Optional[int] = None) -> list[tuple[int, int]]:
    """Points off every segment and distinct from every vertex."""
    arr = Arrangement(segs, check=False)
    if coord is None:
        coord = max([1] + [abs(v) for s in segs for v in s.coords()]) + 1
    out = []
    for _ in range(1000 * (count + 1)):
        if len(out) == count:
            return out
        x, y = (int(v) for v in rng.integers(0, coord, 2))
        q = (x, y, 1)
        if q in arr.vdef:
            continue
        if any(arr.side(i, q) == 0 and vcmp(arr.A[i], q) <= 0 <= vcmp(arr.B[i], q) for i in range(arr.n)):
            continue
        out.append((x, y))
    raise RuntimeError("could not place non-degenerate queries")


@dataclass
class PointLocationResult:
    n: int
    trials: int
    queries: list
    mean_changes: float          # per query, averaged over trials and queries
    se: float
    harmonic_bound: float        # 4 H_n


def point_location_experiment(segs: Sequence[Segment], queries: Sequence, trials: int,
                              seed: int) -> PointLocationResult:
    """Mean number of times the trapezoid holding a query is replaced."""
    segs = list(segs)
    n = len(segs)
    arr, arrays, _ = _prepare(segs)
    per_trial = np.empty(trials)
    for t in range(trials):
        order = make_rng(trial_seed(seed, t)).permutation(n)
        if arrays is not None:
            ch = fast_build(arrays, order, queries).query_changes
        else:
            ch = build_trapmap(segs, InsertionOrder.of(order), queries=queries, arr=arr)[3].query_changes
        per_trial[t] = np.mean(ch)
    se = float(per_trial.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return PointLocationResult(n, trials, list(queries), float(per_trial.mean()), se, 4 * harmonic(n))


def exact_point_location_mean(segs: Sequence[Segment], query) -> Fraction:
    """E[changes] over all n! orders, counted by the incremental builder."""
    segs = list(segs)
    arr = Arrangement(segs)
    total, count = 0, 0
    for order in all_permutations(len(segs)):
        total += build_trapmap(segs, order, queries=[query], arr=arr)[3].query_changes[0]
        count += 1
    return Fraction(total, count)


def enumerated_point_location_mean(segs: Sequence[Segment], query) -> Fraction:
    """The same expectation from scratch: decompose every prefix independently.

    For each order the trapezoid holding the query is read off the brute-force
    decomposition of each prefix; a change is a step where it differs from
    the previous one.  Prefix maps are cached by their segment set.
    """
    segs = list(segs)
    arr = Arrangement(segs)
    q = (query[0], query[1], 1)
    cell: dict = {}

    def holder(ids: frozenset):
        if ids not in cell:
            tm = brute_decomposition(arr, ids)
            hits = [t for t in tm.trapezoids if arr.contains(t, q)]
            if len(hits) != 1:
                raise DegenerateInputError(f"query {query} is not interior to a single trapezoid")
            cell[ids] = hits[0]
        return cell[ids]

    total, count = 0, 0
    for order in all_permutations(len(segs)):
        prev = holder(frozenset())
        for k in range(1, len(segs) + 1):
            cur = holder(frozenset(order.prefix(k)))
            total += cur != prev
            prev = cur
        count += 1
    return Fraction(total, count)


# conflict-list sizes --------------------------------------------------------------

@dataclass
class ConflictProfile:
    n: int
    trials: int
    checkpoints: np.ndarray
    max_sizes: np.ndarray        # trials x checkpoints
    mean_sizes: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        """max |conflict list| * k / (n ln n) per trial and checkpoint."""
        return self.max_sizes * self.checkpoints[None, :] / (self.n * math.log(self.n))

    @property
    def measured_c(self) -> float:
        return float(self.ratios.max())


def conflict_size_profile(segs: Sequence[Segment], trials: int, seed: int,
                          checkpoints: Sequence[int]) -> ConflictProfile:
    """Largest and mean live conflict list after k insertions (non-crossing inputs)."""
    segs = list(segs)
    arrays = seg_arrays(segs)
    cps = np.asarray(sorted(checkpoints), dtype=np.int64)
    mx = np.empty((trials, len(cps)), dtype=np.int64)
    mn = np.empty((trials, len(cps)))
    for t in range(trials):
        fr = fast_build(arrays, make_rng(trial_seed(seed, t)).permutation(len(segs)), checkpoints=cps)
        mx[t], mn[t] = fr.cp_max, fr.cp_mean
    return ConflictProfile(len(segs), trials, cps, mx, mn)
