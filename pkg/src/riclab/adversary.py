"""Two-pile input on which conflict-graph work has a heavy upper tail.

n horizontal disjoint segments: an upper pile U of n/2 long segments and a
lower pile B of n/2 shorter ones whose x-range sits strictly inside U's.
Because left endpoints that share an x-coordinate are ordered by y, the
upward wall of every inserted B left endpoint reaches the lowest inserted U
segment.  If a random order happens to leave the lowest c(n) sqrt(n)
segments of U (the set T) uninserted for a while, each of them conflicts
with about sqrt(n) trapezoids, and every change of the lowest inserted U
segment rebuilds those conflicts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._fastmap import fast_build, seg_arrays
from .geometry import COORD_CAP, CoordinateCapError, Segment
from .rng import make_rng, trial_seed


class TrialBudgetError(ValueError):
    """Too few trials to resolve the 1 - 1/sqrt(n) quantile."""


@dataclass(frozen=True)
class AdversaryConfig:
    n: int
    c_of_n: Optional[float] = None      # default ln(n) / 40
    alpha_frac: float = 0.5

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValueError("n must be even and at least 4")
        if not 0 < self.alpha_frac < 1:
            raise ValueError("alpha_frac must lie in (0, 1)")
        if self.c * math.sqrt(self.n) > self.n / 2:
            raise ValueError("c(n) sqrt(n) must not exceed n/2")

    @property
    def c(self) -> float:
        return math.log(self.n) / 40 if self.c_of_n is None else self.c_of_n

    @property
    def t_size(self) -> int:
        return int(math.floor(self.c * math.sqrt(self.n)))

    @property
    def phase1(self) -> int:
        return int(round(10 * math.sqrt(self.n)))


def gen_adversary(cfg: AdversaryConfig) -> list[Segment]:
    """Ids 0..n/2-1 are B (bottom up), ids n/2..n-1 are U (bottom up)."""
    n, h = cfg.n, cfg.n // 2
    if 4 * n > COORD_CAP or n + h > COORD_CAP:
        raise CoordinateCapError(f"adversary input for n={n} exceeds the coordinate cap")
    segs = [Segment.of(n, y, 3 * n, y, id=y) for y in range(h)]
    segs += [Segment.of(0, n + j, 4 * n, n + j, id=h + j) for j in range(h)]
    return segs


def pile_ids(cfg: AdversaryConfig):
    """Index sets (B, U, T, T', T'') as numpy arrays of segment ids."""
    h = cfg.n // 2
    B = np.arange(h)
    U = np.arange(h, cfg.n)
    T = U[:cfg.t_size]
    k = int(math.floor(cfg.alpha_frac * cfg.t_size))
    return B, U, T, T[:k], T[k:]


@dataclass
class PhaseFlags:
    enough_samples: bool        # >= sqrt(n) of both piles among the first 10 sqrt(n)
    t_untouched: bool           # no T segment among the first 10 sqrt(n)
    tpp_first: bool             # the first ceil(ln n) T samples avoid T'
    tpp_changes: int            # record lows among T'' within those samples
    tpp_changes_all: int        # record lows among all T'' insertions


def phase_flags(cfg: AdversaryConfig, order: np.ndarray) -> PhaseFlags:
    n = cfg.n
    h = n // 2
    B, U, T, Tp, Tpp = pile_ids(cfg)
    p1 = order[:cfg.phase1]
    root = math.sqrt(n)
    enough = bool((p1 < h).sum() >= root and (p1 >= h).sum() >= root)
    tmax = h + cfg.t_size
    untouched = bool(not np.any((p1 >= h) & (p1 < tmax)))
    t_seq = order[(order >= h) & (order < tmax)]
    k = int(math.ceil(math.log(n)))
    first = t_seq[:k]
    tp_max = h + len(Tp)
    tpp_first = bool(not np.any(first < tp_max))
    return PhaseFlags(enough, untouched, tpp_first,
                      _records(first[first >= tp_max]), _records(t_seq[t_seq >= tp_max]))


def _records(seq: np.ndarray) -> int:
    if len(seq) == 0:
        return 0
    m = np.minimum.accumulate(seq)
    return int(1 + np.count_nonzero(m[1:] < m[:-1]))


@dataclass
class HeavyTailRow:
    n: int
    trials: int
    c: float
    quantile_level: float
    q_work: float
    ratio: float                 # q_work / (n ln n)
    mean_work: float
    mean_ratio: float
    miss_rate: float             # empirical Pr[T untouched in phase 1]
    miss_formula: float          # (1 - c/sqrt(n))^(10 sqrt(n))
    miss_se: float
    miss_exact: float            # hypergeometric value of the same event
    enough_rate: float
    tpp_first_rate: float
    mean_tpp_changes: float
    dominance_ok: bool
    totals: np.ndarray = field(repr=False)
    flags: list = field(repr=False, default_factory=list)


def _quantile(x: np.ndarray, level: float) -> float:
    return float(np.quantile(np.sort(x), level, method="inverted_cdf"))


def adversary_trial(cfg: AdversaryConfig, arrays, seed: int):
    """One seeded run: ``(per-step work, created trapezoids total, PhaseFlags)``."""
    order = make_rng(seed).permutation(cfg.n)
    fr = fast_build(arrays, order)
    return fr.work, int(fr.created.sum()), phase_flags(cfg, order)


def summarize_heavy_tail(cfg: AdversaryConfig, totals: np.ndarray, flags: list,
                         dominance_ok: bool = True) -> HeavyTailRow:
    n = cfg.n
    trials = len(totals)
    level = 1 - 1 / math.sqrt(n)
    q = _quantile(totals, level)
    nl = n * math.log(n)
    miss = np.array([f.t_untouched for f in flags], dtype=float)
    p = miss.mean()
    return HeavyTailRow(
        n=n, trials=trials, c=cfg.c, quantile_level=level, q_work=q, ratio=q / nl,
        mean_work=float(np.sort(totals).sum() / trials), mean_ratio=float(np.sort(totals).sum() / trials / nl),
        miss_rate=float(p), miss_formula=(1 - cfg.c / math.sqrt(n)) ** (10 * math.sqrt(n)),
        miss_se=float(math.sqrt(max(p * (1 - p), 1e-300) / trials)),
        miss_exact=exact_miss_probability(cfg),
        enough_rate=float(np.mean([f.enough_samples for f in flags])),
        tpp_first_rate=float(np.mean([f.tpp_first for f in flags])),
        mean_tpp_changes=float(np.mean([f.tpp_changes_all for f in flags])),
        dominance_ok=dominance_ok, totals=np.asarray(totals), flags=list(flags))


def heavy_tail_run(cfg: AdversaryConfig, trials: int, seed: int) -> HeavyTailRow:
    arrays = seg_arrays(gen_adversary(cfg))
    totals = np.empty(trials)
    flags = []
    dom = True
    for t in range(trials):
        work, created, fl = adversary_trial(cfg, arrays, trial_seed(seed, t))
        totals[t] = work.sum()
        # conflict edges created dominate the list-free structural count
        dom &= bool(totals[t] >= created)
        flags.append(fl)
    return summarize_heavy_tail(cfg, totals, flags, dom)


def heavy_tail_experiment(n_list: Sequence[int], trials: Optional[int] = None, seed: int = 0,
                          c_over_log: float = 1 / 40, trials_scale: float = 20.0,
                          alpha_frac: float = 0.5) -> list[HeavyTailRow]:
    """One row per n.  ``trials`` defaults to ``trials_scale * sqrt(n)`` per n."""
    rows = []
    need = 20 * math.sqrt(max(n_list))
    if trials is not None and trials < need:
        raise TrialBudgetError(f"trials={trials} < 20 sqrt(n)={need:.0f}; the 1/sqrt(n) quantile is unresolved")
    if trials is None and trials_scale < 20:
        raise TrialBudgetError(f"trials_scale={trials_scale} < 20; the 1/sqrt(n) quantile is unresolved")
    for n in n_list:
        cfg = AdversaryConfig(n, c_over_log * math.log(n), alpha_frac)
        tr = trials if trials is not None else int(math.ceil(trials_scale * math.sqrt(n)))
        rows.append(heavy_tail_run(cfg, tr, seed))
    return rows


def exact_miss_probability(cfg: AdversaryConfig) -> float:
    """Pr[no T segment among the first 10 sqrt(n)] for a uniform order."""
    n, t = cfg.n, cfg.t_size
    k = min(cfg.phase1, n)          # for tiny n phase 1 is the whole order
    return math.comb(n - t, k) / math.comb(n, k)
