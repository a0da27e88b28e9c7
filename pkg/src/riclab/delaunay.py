"""Randomized incremental Delaunay triangulation with edge flips.

Every uninserted point lives in the bucket of the triangle that contains it
(closed containment; a point on a shared edge goes to the first new triangle
that claims it, in creation order).  Inserting p splits its triangle into
three, or the two triangles sharing the edge p lies on into four, and then
flips illegal edges opposite p.  Every triangle created on the way, transient
ones included, gets its bucket filled from the triangles it replaces.

Sentinels.  Three extra points sit at ``FAR * u`` for the directions
returned by :func:`sentinel_dirs`.  ``FAR`` is so large that each predicate
has the sign of the leading coefficient of the corresponding polynomial in
the distance, which is what the compiled kernel evaluates; here it is plain
big-integer arithmetic.  The large component of each ``u`` exceeds every
coordinate difference of the input, so no sentinel is ever collinear with
two other points.

Ties.  Cocircular quadruples are broken by lifting point v to
``x^2 + y^2 + eps_v`` with ``eps`` decreasing in the point id (sentinels
last); the result depends on ids only, never on the insertion order.

This module is the readable reference; :mod:`._fastdt` is the compiled twin
used for large experiments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .concentration import harmonic
from .geometry import DegenerateInputError, check_cap, in_circle_det, orient
from .martingale import TrialStats, WorkTrace, trace_aggregate
from .rng import InsertionOrder, all_permutations, make_rng, trial_seed

FAR = 2 ** 200

GENERATORS = ("uniform-square", "uniform-circle", "file")
SQUARE_SIDE = 1024


def _sign(v) -> int:
    return (v > 0) - (v < 0)


# generators -------------------------------------------------------------------

def uniform_square(n: int, rng: np.random.Generator, side: int = SQUARE_SIDE) -> list[tuple[int, int]]:
    """n distinct lattice points drawn uniformly from [0, side)^2."""
    if n > side * side:
        raise ValueError("more points than lattice sites")
    flat = rng.choice(side * side, size=n, replace=False)
    return [(int(v % side), int(v // side)) for v in flat]


def uniform_circle(n: int, rng: np.random.Generator, side: int = SQUARE_SIDE) -> list[tuple[int, int]]:
    """n distinct lattice points drawn uniformly from the disk inscribed in [0, side)^2."""
    r = (side - 1) / 2
    xs, ys = np.meshgrid(np.arange(side), np.arange(side), indexing="xy")
    inside = ((xs - r) ** 2 + (ys - r) ** 2 <= r * r).ravel()
    sites = np.flatnonzero(inside)
    if n > len(sites):
        raise ValueError("more points than lattice sites in the disk")
    flat = rng.choice(sites, size=n, replace=False)
    return [(int(v % side), int(v // side)) for v in flat]


def point_generator(name: str, n: int, seed: int, path: Optional[str] = None) -> list[tuple[int, int]]:
    rng = make_rng(trial_seed(seed, 2 ** 32 - 1))
    if name == "uniform-square":
        return uniform_square(n, rng)
    if name == "uniform-circle":
        return uniform_circle(n, rng)
    if name == "file":
        from .geometry import read_objects
        if path is None:
            raise ValueError("the file generator needs a path")
        return list(read_objects(path)[1])
    raise ValueError(f"unknown generator {name!r}; expected one of {GENERATORS}")


def sentinel_dirs(points: Sequence) -> tuple:
    """Directions (-K, -1), (K, -1), (1, K) with K = 2 max|coordinate| + 1."""
    k = 2 * max([1] + [abs(int(v)) for p in points for v in p]) + 1
    return ((-k, -1), (k, -1), (1, k))


# predicates -------------------------------------------------------------------

class Predicates:
    """Exact orientation / in-circle over the real points plus sentinels.

    Ids ``0..n-1`` are the input points, ``n, n+1, n+2`` the sentinels.
    """

    def __init__(self, points: Sequence):
        self.n = len(points)
        self.P = [(int(x), int(y)) for x, y in points]
        for p in self.P:
            check_cap(p)
        self.P += [(FAR * ux, FAR * uy) for ux, uy in sentinel_dirs(self.P)]

    def orient(self, a: int, b: int, c: int) -> int:
        P = self.P
        return orient(P[a], P[b], P[c])

    def in_circle(self, a: int, b: int, c: int, d: int) -> int:
        """+1 if d is inside the circle through ccw a, b, c (after perturbation)."""
        P = self.P
        s = _sign(in_circle_det(P[a], P[b], P[c], P[d]))
        if s:
            return s
        # lifting d raises it above the paraboloid; cofactor of each lift entry
        cof = ((a, orient(P[b], P[c], P[d])), (b, orient(P[c], P[a], P[d])),
               (c, orient(P[a], P[b], P[d])), (d, -orient(P[a], P[b], P[c])))
        for _, v in sorted(cof):
            if v:
                return v
        raise DegenerateInputError(f"in-circle tie on {a, b, c, d} not resolved")

    def contains(self, tri, q: int) -> bool:
        a, b, c = tri
        return self.orient(a, b, q) >= 0 and self.orient(b, c, q) >= 0 and self.orient(c, a, q) >= 0


def _rot(tri) -> tuple:
    """Rotate a ccw triple so the smallest id comes first."""
    k = tri.index(min(tri))
    return tri[k:] + tri[:k]


# the triangulation ------------------------------------------------------------

@dataclass
class Triangulation:
    points: list
    triangles: frozenset            # ccw triples of real ids, smallest id first
    inserted: tuple

    def __len__(self) -> int:
        return len(self.triangles)

    def adjacency(self) -> dict:
        """Edge-sharing neighbours among the real triangles."""
        by_edge: dict = {}
        for t in self.triangles:
            for i in range(3):
                by_edge.setdefault(frozenset((t[i], t[(i + 1) % 3])), []).append(t)
        adj = {t: set() for t in self.triangles}
        for ts in by_edge.values():
            if len(ts) == 2:
                adj[ts[0]].add(ts[1])
                adj[ts[1]].add(ts[0])
        return adj

    def hull_size(self) -> int:
        """Points of the inserted set lying on the boundary of its hull."""
        return len(hull_boundary([self.points[i] for i in self.inserted]))

    def euler_ok(self) -> bool:
        pts = [self.points[i] for i in self.inserted]
        if len(pts) < 3 or _all_collinear(pts):
            return len(self.triangles) == 0
        return len(self.triangles) == 2 * len(pts) - self.hull_size() - 2


def _all_collinear(pts) -> bool:
    return all(orient(pts[0], pts[1], p) == 0 for p in pts[2:])


def hull_boundary(pts) -> list:
    """Points on the convex hull boundary, collinear boundary points included."""
    ps = sorted(set(pts))
    if len(ps) <= 2:
        return ps

    def chain(seq):
        out: list = []
        for p in seq:
            while len(out) >= 2 and orient(out[-2], out[-1], p) < 0:
                out.pop()
            out.append(p)
        return out
    lower, upper = chain(ps), chain(ps[::-1])
    if _all_collinear(ps):
        return ps
    return lower[:-1] + upper[:-1]


@dataclass
class DelaunayLog:
    created: np.ndarray
    destroyed: np.ndarray
    flips: np.ndarray
    bucket_work: np.ndarray          # sum of bucket sizes over created triangles
    degree: np.ndarray               # triangles around the new point after the step
    s1: np.ndarray                   # sum of their bucket sizes
    s2: np.ndarray                   # sum of squared bucket sizes
    real_flips: np.ndarray           # flips whose removed edge joins two input points
    cp_max: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    cp_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cp_degsq: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    cp_live: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    @property
    def work(self) -> np.ndarray:
        return self.bucket_work + self.created


class _Builder:
    def __init__(self, points: Sequence, order: Sequence[int], verify: bool = False):
        self.pr = Predicates(points)
        n = self.pr.n
        self.n = n
        self.verify = verify
        # triangle id -> [verts, nbrs, bucket]; nbrs[i] is opposite verts[i]
        self.tri: list = []
        self.alive: set = set()
        self.loc = np.zeros(n, dtype=np.int64)
        root = self._new((n, n + 1, n + 2), [-1, -1, -1], list(order))
        self.loc[:] = root
        self.inserted: list = []

    def _new(self, verts, nbrs, bucket) -> int:
        self.tri.append([tuple(verts), list(nbrs), bucket])
        t = len(self.tri) - 1
        self.alive.add(t)
        return t

    def _relink(self, t: int, old: int, new: int) -> None:
        if t >= 0:
            nb = self.tri[t][1]
            nb[nb.index(old)] = new

    def _spread(self, sources: list, targets: list, skip: int) -> int:
        """Hand every bucketed point of ``sources`` to the first target holding it."""
        buckets = {t: [] for t in targets}
        for s in sources:
            for q in self.tri[s][2]:
                if q == skip:
                    continue
                for t in targets:
                    if self.pr.contains(self.tri[t][0], q):
                        buckets[t].append(q)
                        self.loc[q] = t
                        break
                else:  # pragma: no cover - would mean a broken bucket
                    raise AssertionError(f"point {q} lost during redistribution")
        total = 0
        for t in targets:
            self.tri[t][2] = buckets[t]
            total += len(buckets[t])
        return total

    def _kill(self, *ts) -> None:
        for t in ts:
            self.alive.discard(t)

    def insert(self, p: int):
        pr = self.pr
        t = int(self.loc[p])
        verts, nbrs, _ = self.tri[t]
        on = [i for i in range(3) if pr.orient(verts[(i + 1) % 3], verts[(i + 2) % 3], p) == 0]
        created: list = []
        if not on:
            base = len(self.tri)
            for i in range(3):
                u, w = verts[(i + 1) % 3], verts[(i + 2) % 3]
                created.append(self._new((u, w, p), [base + (i + 1) % 3, base + (i + 2) % 3, nbrs[i]], None))
            for i in range(3):
                self._relink(nbrs[i], t, base + i)
            work = self._spread([t], created, p)
            self._kill(t)
            destroyed = 1
        else:
            i = on[0]
            a, u, w = verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]
            s = nbrs[i]
            sv, sn, _ = self.tri[s]
            j = sv.index(next(v for v in sv if v not in (u, w)))
            d = sv[j]
            # neighbours outside the two old triangles
            t_au = nbrs[(i + 2) % 3]          # across (a, u)
            t_wa = nbrs[(i + 1) % 3]          # across (w, a)
            s_dw = sn[sv.index(u)]            # across (d, w)
            s_ud = sn[sv.index(w)]            # across (u, d)
            base = len(self.tri)
            created.append(self._new((a, u, p), [base + 3, base + 1, t_au], None))
            created.append(self._new((a, p, w), [base + 2, t_wa, base], None))
            created.append(self._new((d, w, p), [base + 1, base + 3, s_dw], None))
            created.append(self._new((d, p, u), [base, s_ud, base + 2], None))
            self._relink(t_au, t, base)
            self._relink(t_wa, t, base + 1)
            self._relink(s_dw, s, base + 2)
            self._relink(s_ud, s, base + 3)
            work = self._spread([t, s], created, p)
            self._kill(t, s)
            destroyed = 2
        # legalize the edges opposite p, depth first like the recursive version
        stack = [c for c in reversed(created)]
        flips = real_flips = 0
        while stack:
            T = stack.pop()
            if T not in self.alive:
                continue
            tv, tn, _ = self.tri[T]
            k = tv.index(p)
            N = tn[k]
            if N < 0:
                continue
            u, w = tv[(k + 1) % 3], tv[(k + 2) % 3]
            nv, nn, _ = self.tri[N]
            d = next(v for v in nv if v not in (u, w))
            if pr.in_circle(u, w, p, d) <= 0:
                continue
            flips += 1
            real_flips += u < self.n and w < self.n
            t_pu = tn[(k + 2) % 3]            # across (p, u)
            t_wp = tn[(k + 1) % 3]            # across (w, p)
            n_ud = nn[nv.index(w)]            # across (u, d)
            n_dw = nn[nv.index(u)]            # across (d, w)
            base = len(self.tri)
            f1 = self._new((u, d, p), [base + 1, t_pu, n_ud], None)
            f2 = self._new((d, w, p), [t_wp, base, n_dw], None)
            self._relink(t_pu, T, f1)
            self._relink(n_ud, N, f1)
            self._relink(t_wp, T, f2)
            self._relink(n_dw, N, f2)
            work += self._spread([T, N], [f1, f2], p)
            self._kill(T, N)
            destroyed += 2
            created += [f1, f2]
            stack += [f2, f1]
        around = [c for c in created if c in self.alive]
        sizes = [len(self.tri[c][2]) for c in around]
        self.inserted.append(p)
        if self.verify:
            self._check()
        return (len(created), destroyed, flips, work, len(around), sum(sizes), sum(v * v for v in sizes),
                real_flips)

    # audits ------------------------------------------------------------------
    def real_triangles(self) -> frozenset:
        n = self.n
        return frozenset(_rot(self.tri[t][0]) for t in self.alive if max(self.tri[t][0]) < n)

    def _check(self) -> None:
        tris = self.real_triangles()
        ins = self.inserted
        P = self.pr.P
        for a, b, c in tris:
            for q in ins:
                if q not in (a, b, c) and in_circle_det(P[a], P[b], P[c], P[q]) > 0:
                    raise AssertionError(f"triangle {(a, b, c)} has {q} inside its circumcircle")
        tr = Triangulation(self.pr.P[:self.n], tris, tuple(ins))
        if not tr.euler_ok():
            raise AssertionError(f"Euler count fails after {len(ins)} insertions")

    def snapshot(self):
        live = [t for t in self.alive]
        sizes = np.array([len(self.tri[t][2]) for t in live])
        deg = np.zeros(self.n + 3, dtype=np.int64)
        for t in live:
            for v in self.tri[t][0]:
                deg[v] += 1
        return int(sizes.max()), float(sizes.sum() / len(live)), int((deg[:self.n] ** 2).sum()), len(live)


def build_delaunay(points: Sequence, order: Optional[InsertionOrder] = None,
                   checkpoints: Sequence[int] = (), verify: bool = False):
    """Insert ``points`` in ``order``; returns ``(Triangulation, WorkTrace, flips, DelaunayLog)``.

    ``checkpoints`` lists insertion counts i at which the largest and mean
    bucket size, the live triangle count and the sum of squared vertex
    degrees are recorded.  ``verify`` re-checks the Delaunay property and the
    Euler count after every insertion (quadratic; small inputs only).
    """
    points = list(points)
    n = len(points)
    if n < 3:
        raise DegenerateInputError("need at least 3 points")
    if len(set(map(tuple, points))) != n:
        raise DegenerateInputError("duplicate points")
    if _all_collinear(points):
        raise DegenerateInputError("all points are collinear")
    order = order if order is not None else InsertionOrder(tuple(range(n)))
    if len(order) != n:
        raise ValueError("order length must equal the number of points")
    b = _Builder(points, order, verify)
    cols = np.zeros((8, n), dtype=np.int64)
    cps = sorted(int(c) for c in checkpoints)
    cp_rows = []
    if 0 in cps:
        cp_rows.append(b.snapshot())
    for k, p in enumerate(order):
        cols[:, k] = b.insert(int(p))
        cp_rows += [b.snapshot()] * cps.count(k + 1)
    cp = np.array(cp_rows, dtype=np.float64).reshape(-1, 4)
    log = DelaunayLog(*cols, cp_max=cp[:, 0].astype(np.int64), cp_mean=cp[:, 1],
                      cp_degsq=cp[:, 2].astype(np.int64), cp_live=cp[:, 3].astype(np.int64))
    tr = Triangulation(points, b.real_triangles(), tuple(order))
    return tr, WorkTrace(log.work), log.flips, log


# brute-force oracle -----------------------------------------------------------

def brute_delaunay(points: Sequence) -> frozenset:
    """All ccw triples whose (perturbed) circumcircle holds no other point.

    Vectorized over the fourth point in int64 when coordinates allow it; ties
    fall back to the perturbed predicate.
    """
    pts = [(int(x), int(y)) for x, y in points]
    n = len(pts)
    pr = Predicates(pts)
    P = np.array(pts, dtype=np.int64).reshape(-1, 2)
    small = n == 0 or int(np.abs(P).max()) <= 1 << 12
    out = set()
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                o = orient(pts[a], pts[b], pts[c])
                if o == 0:
                    continue
                tri = (a, b, c) if o > 0 else (a, c, b)
                if small:
                    d = P
                    A, B, C = (P[i] for i in tri)
                    adx, ady = A[0] - d[:, 0], A[1] - d[:, 1]
                    bdx, bdy = B[0] - d[:, 0], B[1] - d[:, 1]
                    cdx, cdy = C[0] - d[:, 0], C[1] - d[:, 1]
                    ad, bd, cd = adx * adx + ady * ady, bdx * bdx + bdy * bdy, cdx * cdx + cdy * cdy
                    det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
                    det[list(tri)] = -1
                    if (det > 0).any():
                        continue
                    ties = np.flatnonzero(det == 0)
                    if any(pr.in_circle(*tri, int(q)) > 0 for q in ties):
                        continue
                else:
                    if any(q not in tri and pr.in_circle(*tri, q) > 0 for q in range(n)):
                        continue
                out.add(_rot(tri))
    return frozenset(out)


def empty_circle_violations(tr: Triangulation) -> list:
    """(triangle, point) pairs with the point strictly inside the circumcircle."""
    P = tr.points
    bad = []
    for a, b, c in tr.triangles:
        for q in tr.inserted:
            if q not in (a, b, c) and in_circle_det(P[a], P[b], P[c], P[q]) > 0:
                bad.append(((a, b, c), q))
    return bad


# experiments ------------------------------------------------------------------

@dataclass
class ConflictAudit:
    n: int
    checkpoints: np.ndarray
    max_sizes: np.ndarray
    mean_sizes: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        """max bucket * i / (n ln n) per checkpoint i."""
        return self.max_sizes * self.checkpoints / (self.n * math.log(self.n))


def conflict_size_audit(points: Sequence, order: InsertionOrder, checkpoints: Sequence[int]) -> ConflictAudit:
    from ._fastdt import fast_delaunay, kernel_ok
    cps = np.asarray(sorted(checkpoints), dtype=np.int64)
    if kernel_ok(points):
        run = fast_delaunay(points, order.as_array(), cps)
        mx, mn = run.cp_max, run.cp_mean
    else:
        log = build_delaunay(points, order, cps)[3]
        mx, mn = log.cp_max, log.cp_mean
    return ConflictAudit(len(points), cps, np.asarray(mx), np.asarray(mn))


@dataclass
class TailRow:
    alpha: float
    threshold: float
    empirical: float
    bound: float                     # exp(-alpha)


@dataclass
class DelaunayTailResult:
    n: int
    trials: int
    stats: TrialStats
    created_per_n: float             # mean total created triangles / n
    var_budget: float                # sum_k mean(T_k^2) / (n^2 ln n)
    max_stage_ratio: float           # mean over trials of max_k T_k / (n ln n)
    c_fit: float                     # mean total / (n ln n)
    tails: list = field(default_factory=list)
    flips_mean: float = 0.0
    cp_checkpoints: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    cp_max: Optional[np.ndarray] = None      # trials x checkpoints
    cp_mean: Optional[np.ndarray] = None
    cp_degsq: Optional[np.ndarray] = None
    jensen_ok: bool = True
    accounting_ok: bool = True
    seeds: Optional[np.ndarray] = None
    flips_total: Optional[np.ndarray] = None
    sq_sums: Optional[np.ndarray] = None


def delaunay_tail_experiment(n: int, trials: int, seed: int, generator: str = "uniform-square",
                             alphas: Sequence[float] = (2, 4, 8), checkpoints: Sequence[int] = (),
                             points: Optional[Sequence] = None, path: Optional[str] = None) -> DelaunayTailResult:
    """Total work over ``trials`` random orders of one point set.

    The point set comes from ``generator`` (drawn once from the master seed)
    unless ``points`` is given.  Work per step is bucket points moved plus
    triangles created.
    """
    from ._fastdt import fast_delaunay, kernel_ok
    if n < 3 and points is None:
        raise ValueError("n must be >= 3")
    pts = list(points) if points is not None else point_generator(generator, n, seed, path)
    n = len(pts)
    use_kernel = kernel_ok(pts)
    cps = np.asarray(sorted(checkpoints), dtype=np.int64)
    traces = []
    created = np.empty(trials)
    flips = np.empty(trials)
    seeds = np.empty(trials, dtype=np.uint64)
    cpm = np.zeros((trials, len(cps)), dtype=np.int64)
    cpa = np.zeros((trials, len(cps)))
    cpd = np.zeros((trials, len(cps)), dtype=np.int64)
    jensen = accounting = True
    for t in range(trials):
        s = trial_seed(seed, t)
        seeds[t] = s
        order = make_rng(s).permutation(n)
        if use_kernel:
            run = fast_delaunay(pts, order, cps)
        else:
            run = build_delaunay(pts, InsertionOrder.of(order), cps)[3]
        traces.append(WorkTrace(run.work))
        created[t] = run.created.sum()
        flips[t] = run.flips.sum()
        cpm[t], cpa[t], cpd[t] = run.cp_max, run.cp_mean, run.cp_degsq
        jensen &= bool(np.all(run.s1.astype(float) ** 2 <= run.degree * run.s2.astype(float)))
        # one root triangle, then created minus destroyed; the final map has
        # 2(n + 3) - 3 - 2 triangles counting the sentinels
        accounting &= bool(1 + run.created.sum() - run.destroyed.sum() == 2 * (n + 3) - 5)
    stats = trace_aggregate(traces, store_steps=True)
    ln = math.log(n)
    c_fit = stats.mean_total / (n * ln)
    tails = [TailRow(a, a * c_fit * n * ln, stats.tail([a * c_fit * n * ln])[0], math.exp(-a)) for a in alphas]
    return DelaunayTailResult(
        n=n, trials=trials, stats=stats,
        created_per_n=float(created.mean() / n),
        var_budget=float(stats.mean_step_sq.sum() / (n * n * ln)),
        max_stage_ratio=float(stats.max_steps.mean() / (n * ln)),
        c_fit=c_fit, tails=tails, flips_mean=float(flips.mean()),
        cp_checkpoints=cps, cp_max=cpm, cp_mean=cpa, cp_degsq=cpd,
        jensen_ok=jensen, accounting_ok=accounting, seeds=seeds, flips_total=flips,
        sq_sums=np.array([tr.sq_sum for tr in traces]))


def exact_expected_work(points: Sequence) -> Fraction:
    """E[total work] over all n! insertion orders (n <= 8)."""
    total, count = 0, 0
    for order in all_permutations(len(points)):
        total += int(build_delaunay(points, order)[1].total)
        count += 1
    return Fraction(total, count)
