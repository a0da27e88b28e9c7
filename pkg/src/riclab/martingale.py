"""Work traces, cross-trial statistics and the exact Doob-martingale oracle.

A run of any incremental construction is reduced to its per-step costs
T_1..T_n (a :class:`WorkTrace`).  Traces from many seeded trials fold into a
:class:`TrialStats`; folding is associative and, because every stored sum is
an exact float sum of integers, independent of how trials were chunked.

For tiny n the conditional expectations Y_j = E[cost | first j insertions]
can be computed exactly by enumerating every permutation; that is what
:func:`exact_doob` and :func:`martingale_property_check` do.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .rng import InsertionOrder, SizeLimitError, all_permutations

MAX_DOOB_N = 8
MAX_CHECK_N = 7

Cost = Callable[[InsertionOrder], "int | Fraction"]


@dataclass
class WorkTrace:
    per_step: np.ndarray

    def __post_init__(self):
        self.per_step = np.asarray(self.per_step, dtype=np.float64)
        if self.per_step.ndim != 1 or (self.per_step < 0).any():
            raise ValueError("per-step costs must be a 1-d array of nonnegative values")

    @property
    def n(self) -> int:
        return len(self.per_step)

    @property
    def total(self) -> float:
        return float(self.per_step.sum())

    @property
    def max_step(self) -> float:
        return float(self.per_step.max()) if self.n else 0.0

    @property
    def sq_sum(self) -> float:
        return float((self.per_step ** 2).sum())


@dataclass
class MartingaleExact:
    y: list[Fraction]


@dataclass
class TrialStats:
    """Mergeable summary of many trials of one experiment.

    ``totals`` and ``max_steps`` keep one entry per trial (quantiles and tail
    probabilities are read from them); the per-step arrays are kept only when
    ``store_steps`` is set.
    """

    n: int
    store_steps: bool = True
    totals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    max_steps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    step_sum: Optional[np.ndarray] = None
    step_sq_sum: Optional[np.ndarray] = None

    def __post_init__(self):
        self.totals = np.asarray(self.totals, dtype=np.float64)
        self.max_steps = np.asarray(self.max_steps, dtype=np.float64)
        if self.store_steps and self.step_sum is None:
            self.step_sum = np.zeros(self.n)
            self.step_sq_sum = np.zeros(self.n)

    @classmethod
    def from_trace(cls, trace: WorkTrace, store_steps: bool = True) -> "TrialStats":
        s = cls(trace.n, store_steps, np.array([trace.total]), np.array([trace.max_step]))
        if store_steps:
            s.step_sum = trace.per_step.copy()
            s.step_sq_sum = trace.per_step ** 2
        return s

    @property
    def count(self) -> int:
        return len(self.totals)

    def merge(self, other: "TrialStats") -> "TrialStats":
        if other.n != self.n:
            raise ValueError("cannot merge statistics of different n")
        keep = self.store_steps and other.store_steps
        out = TrialStats(self.n, keep,
                         np.concatenate([self.totals, other.totals]),
                         np.concatenate([self.max_steps, other.max_steps]))
        if keep:
            out.step_sum = self.step_sum + other.step_sum
            out.step_sq_sum = self.step_sq_sum + other.step_sq_sum
        return out

    # derived quantities -------------------------------------------------
    @property
    def mean_total(self) -> float:
        return float(np.sort(self.totals).sum() / self.count)

    @property
    def var_total(self) -> float:
        """Population variance of the per-trial totals."""
        t = np.sort(self.totals)
        return float(((t - t.sum() / self.count) ** 2).sum() / self.count)

    @property
    def se_mean(self) -> float:
        if self.count < 2:
            return 0.0
        return float(np.sqrt(self.var_total * self.count / (self.count - 1) / self.count))

    @property
    def mean_step(self) -> np.ndarray:
        self._need_steps()
        return self.step_sum / self.count

    @property
    def mean_step_sq(self) -> np.ndarray:
        self._need_steps()
        return self.step_sq_sum / self.count

    @property
    def delta_sq_proxy(self) -> float:
        """Sum over steps of the empirical E[T_k^2]."""
        return float(self.mean_step_sq.sum())

    def quantiles(self, levels: Sequence[float]) -> list[float]:
        t = np.sort(self.totals)
        return [float(np.quantile(t, q, method="inverted_cdf")) for q in levels]

    def tail(self, thresholds: Sequence[float]) -> list[float]:
        """Empirical Pr[total >= x] for each threshold."""
        t = np.sort(self.totals)
        return [float((self.count - np.searchsorted(t, x, side="left")) / self.count) for x in thresholds]

    def _need_steps(self):
        if not self.store_steps:
            raise ValueError("per-step arrays were not stored")


def trace_aggregate(traces: Iterable[WorkTrace], store_steps: bool = True) -> TrialStats:
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    n = traces[0].n
    if any(tr.n != n for tr in traces):
        raise ValueError("all traces must have the same n")
    stats = TrialStats(n, store_steps,
                       np.array([tr.total for tr in traces]),
                       np.array([tr.max_step for tr in traces]))
    if store_steps:
        steps = np.stack([tr.per_step for tr in traces])
        stats.step_sum = steps.sum(axis=0)
        stats.step_sq_sum = (steps ** 2).sum(axis=0)
    return stats


# exact Doob martingale -------------------------------------------------------

def _cost_table(costs: Cost, n: int) -> dict[tuple, Fraction]:
    return {p.items: Fraction(costs(p)) for p in all_permutations(n)}


def doob_tree(costs: Cost, n: int) -> dict[tuple, Fraction]:
    """Y for every prefix node of the permutation tree, keyed by the prefix."""
    if n > MAX_DOOB_N:
        raise SizeLimitError(f"exact Doob martingale limited to n <= {MAX_DOOB_N}")
    table = _cost_table(costs, n)
    tree: dict[tuple, Fraction] = dict(table)
    level = table
    for j in range(n - 1, -1, -1):
        sums: dict[tuple, list] = {}
        for key, val in level.items():
            acc = sums.setdefault(key[:j], [Fraction(0), 0])
            acc[0] += val
            acc[1] += 1
        level = {k: s / c for k, (s, c) in sums.items()}
        tree.update(level)
    return tree


def exact_doob(costs: Cost, n: int, order: InsertionOrder) -> MartingaleExact:
    if n > MAX_DOOB_N:
        raise SizeLimitError(f"exact Doob martingale limited to n <= {MAX_DOOB_N}")
    if len(order) != n:
        raise ValueError("order length must equal n")
    tree = doob_tree(costs, n)
    return MartingaleExact([tree[order.prefix(j)] for j in range(n + 1)])


def check_martingale_tree(tree: dict[tuple, Fraction], n: int) -> bool:
    """Every node equals the average of its one-step extensions."""
    for prefix, y in tree.items():
        if len(prefix) == n:
            continue
        rest = [x for x in range(n) if x not in prefix]
        children = [tree[prefix + (x,)] for x in rest]
        if sum(children, Fraction(0)) != y * len(children):
            return False
    return True


def martingale_property_check(costs: Cost, n: int) -> bool:
    if n > MAX_CHECK_N:
        raise SizeLimitError(f"martingale check limited to n <= {MAX_CHECK_N}")
    return check_martingale_tree(doob_tree(costs, n), n)
