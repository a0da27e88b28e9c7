"""Randomized incremental trapezoidal map of segments that may cross.

A trapezoid is the tuple ``(top, bot, lp, rp)``: the segment ids bounding it
from above and below (``TOP`` / ``BOTTOM`` for the box) and the vertices whose
vertical walls bound it on the left and right (``"L"`` / ``"R"`` for the box
sides).  Vertices are homogeneous integer triples, see :mod:`.geometry`.

Two maintenance modes are provided.

``conflict-graph``
    every live trapezoid keeps the list of uninserted segments crossing its
    interior; a step costs the number of conflict edges it creates.
``list-free``
    only the trapezoids and their history DAG are kept; the trapezoids hit by
    a new segment are found by searching the DAG, and a step costs the number
    of trapezoids created plus the DAG path lengths of both endpoints.

Both modes build the same map, and both log all cost streams.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import DegenerateInputError, Segment, check_cap, check_general_position, crossing_point
from .martingale import WorkTrace
from .rng import InsertionOrder

TOP, BOTTOM = -1, -2
LEFT, RIGHT = "L", "R"
MODES = ("conflict-graph", "list-free")


def _sgn(v: int) -> int:
    return (v > 0) - (v < 0)


def vcmp(p, q) -> int:
    """Lexicographic comparison of homogeneous vertices (box sides allowed)."""
    if p == q:
        return 0
    if p == LEFT or q == RIGHT:
        return -1
    if p == RIGHT or q == LEFT:
        return 1
    d = p[0] * q[2] - q[0] * p[2]
    if d:
        return _sgn(d)
    return _sgn(p[1] * q[2] - q[1] * p[2])


class Arrangement:
    """Segments plus their exact crossing structure."""

    def __init__(self, segs: Sequence[Segment], check: bool = True):
        self.segs = list(segs)
        for s in self.segs:
            check_cap(s.coords())
        if check:
            if len(set((s.a, s.b) for s in self.segs)) != len(self.segs):
                raise DegenerateInputError("duplicate segments")
            check_general_position(self.segs)
        self.S = [s.coords() for s in self.segs]
        self.A = [(s.a[0], s.a[1], 1) for s in self.segs]
        self.B = [(s.b[0], s.b[1], 1) for s in self.segs]
        self.vdef: dict = {}
        for i in range(len(self.segs)):
            self.vdef[self.A[i]] = (i,)
            self.vdef[self.B[i]] = (i,)
        self._cross: dict = {}
        n = len(self.segs)
        for i in range(n):
            for j in range(i + 1, n):
                if self._proper(i, j):
                    x = crossing_point(self.segs[i], self.segs[j])
                    self._cross[(i, j)] = x
                    self.vdef[x] = (i, j)
        xs = [v for s in self.segs for v in (s.a[0], s.b[0])]
        ys = [v for s in self.segs for v in (s.a[1], s.b[1])]
        if xs:
            self.box = (min(xs) - 1, min(ys) - 1, max(xs) + 1, max(ys) + 1)
        else:
            self.box = (-1, -1, 1, 1)

    @property
    def n(self) -> int:
        return len(self.segs)

    def _proper(self, i, j) -> bool:
        s, t = self.segs[i], self.segs[j]
        from .geometry import orient
        return (orient(s.a, s.b, t.a) * orient(s.a, s.b, t.b) < 0
                and orient(t.a, t.b, s.a) * orient(t.a, t.b, s.b) < 0)

    def cross(self, i: int, j: int):
        return self._cross.get((i, j) if i < j else (j, i))

    @property
    def m(self) -> int:
        return len(self._cross)

    def side(self, i: int, v) -> int:
        """+1 if vertex v is above segment i (left of a->b), -1 below."""
        ax, ay, bx, by = self.S[i]
        X, Y, W = v
        return _sgn((bx - ax) * (Y - ay * W) - (by - ay) * (X - ax * W))

    def rel(self, u: int, t: int, w, right: bool) -> int:
        """Sign of (u - t) at the wall through w, as a one-sided limit.

        Both segments must span w.  The order at the left end of their common
        span flips once if they cross at or before w.
        """
        ua, ta = self.A[u], self.A[t]
        base = self.side(t, ua) if vcmp(ua, ta) > 0 else -self.side(u, ta)
        x = self.cross(u, t)
        if x is not None:
            c = vcmp(x, w)
            if c < 0 or (c == 0 and right):
                base = -base
        return base

    def hits(self, s: int, tz) -> bool:
        """Does segment s meet the interior of trapezoid tz?"""
        top, bot, lp, rp = tz
        a, b = self.A[s], self.B[s]
        l = a if lp == LEFT or vcmp(a, lp) > 0 else lp
        r = b if rp == RIGHT or vcmp(b, rp) < 0 else rp
        if vcmp(l, r) >= 0:
            return False
        if bot >= 0 and self.rel(s, bot, l, True) < 0 and self.rel(s, bot, r, False) < 0:
            return False
        if top >= 0 and self.rel(s, top, l, True) > 0 and self.rel(s, top, r, False) > 0:
            return False
        return True

    def contains(self, tz, q) -> bool:
        """Is vertex q strictly inside tz?"""
        top, bot, lp, rp = tz
        if vcmp(lp, q) >= 0 or vcmp(q, rp) >= 0:
            return False
        if top >= 0 and self.side(top, q) >= 0:
            return False
        if bot >= 0 and self.side(bot, q) <= 0:
            return False
        return True

    def defining(self, tz) -> frozenset:
        top, bot, lp, rp = tz
        d = {x for x in (top, bot) if x >= 0}
        for v in (lp, rp):
            if v not in (LEFT, RIGHT):
                d.update(self.vdef[v])
        return frozenset(d)

    # exact area, used by the partition audit
    def _vx(self, v):
        if v == LEFT:
            return Fraction(self.box[0])
        if v == RIGHT:
            return Fraction(self.box[2])
        return Fraction(v[0], v[2])

    def _y_at(self, i, x):
        if i == TOP:
            return Fraction(self.box[3])
        if i == BOTTOM:
            return Fraction(self.box[1])
        ax, ay, bx, by = self.S[i]
        return ay + Fraction(by - ay, bx - ax) * (x - ax)

    def area(self, tz) -> Fraction:
        top, bot, lp, rp = tz
        x0, x1 = self._vx(lp), self._vx(rp)
        if x0 == x1:
            return Fraction(0)
        h0 = self._y_at(top, x0) - self._y_at(bot, x0)
        h1 = self._y_at(top, x1) - self._y_at(bot, x1)
        return (x1 - x0) * (h0 + h1) / 2

    def box_area(self) -> Fraction:
        x0, y0, x1, y1 = self.box
        return Fraction((x1 - x0) * (y1 - y0))


BOX = (TOP, BOTTOM, LEFT, RIGHT)


@dataclass
class TrapMap:
    arr: Arrangement
    trapezoids: frozenset
    inserted: tuple

    def __len__(self) -> int:
        return len(self.trapezoids)

    def defining(self, tz) -> frozenset:
        return self.arr.defining(tz)

    def area_ok(self) -> bool:
        return sum((self.arr.area(t) for t in self.trapezoids), Fraction(0)) == self.arr.box_area()

    def _wall_halves(self, tz, v) -> tuple[bool, bool]:
        """Which halves (above v, below v) of the wall through v tz touches."""
        top, bot, _, _ = tz
        through = set(self.arr.vdef[v])
        return top not in through, bot not in through

    def adjacency(self) -> dict:
        """Wall-sharing neighbours: tz -> set of trapezoids across a wall."""
        by_left: dict = {}
        for t in self.trapezoids:
            by_left.setdefault(t[2], []).append(t)
        adj = {t: set() for t in self.trapezoids}
        for t in self.trapezoids:
            v = t[3]
            if v == RIGHT:
                continue
            up, down = self._wall_halves(t, v)
            for u in by_left.get(v, ()):
                up2, down2 = self._wall_halves(u, v)
                if (up and up2) or (down and down2):
                    adj[t].add(u)
                    adj[u].add(t)
        return adj


@dataclass
class ArrangementStats:
    m: int
    m_k: np.ndarray
    zone_sizes: np.ndarray


@dataclass
class BuildLog:
    created: np.ndarray
    destroyed: np.ndarray
    conflict_edges: np.ndarray
    location_steps: np.ndarray
    dag_visits: np.ndarray
    crossings: np.ndarray
    query_changes: list = field(default_factory=list)


class _Builder:
    def __init__(self, arr: Arrangement, mode: str, queries=(), verify: bool = False):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.arr = arr
        self.mode = mode
        self.verify = verify
        self.alive: dict = {BOX: None}
        self.children: dict = {}
        self.seg_conf: dict = {}
        self.inserted: list = []
        if mode == "conflict-graph":
            self.alive[BOX] = list(range(arr.n))
            self.seg_conf = {i: {BOX} for i in range(arr.n)}
        self.queries = [(q[0], q[1], 1) for q in queries]
        for q in self.queries:
            for i in range(arr.n):
                if arr.side(i, q) == 0 and vcmp(arr.A[i], q) <= 0 <= vcmp(arr.B[i], q):
                    raise DegenerateInputError(f"query {q[:2]} lies on segment {i}")
            if q in arr.vdef:
                raise DegenerateInputError(f"query {q[:2]} is a vertex")
        self.qloc = [BOX] * len(self.queries)
        self.qchanges = [0] * len(self.queries)

    # point location in the history DAG -------------------------------------
    def locate(self, q) -> tuple:
        node, steps = BOX, 1
        while node not in self.alive:
            for c in self.children[node]:
                if self.arr.contains(c, q):
                    node = c
                    break
            else:  # pragma: no cover - would mean a broken DAG
                raise AssertionError("point fell out of the history DAG")
            steps += 1
        return node, steps

    def dag_search(self, s) -> tuple[list, int]:
        found, seen, stack, visits = [], {BOX}, [BOX], 0
        while stack:
            node = stack.pop()
            visits += 1
            if node in self.alive:
                found.append(node)
                continue
            for c in self.children[node]:
                if c not in seen and self.arr.hits(s, c):
                    seen.add(c)
                    stack.append(c)
        return found, visits

    # one insertion -----------------------------------------------------------
    def _entry_exit(self, s, tz):
        arr = self.arr
        top, bot, lp, rp = tz
        a, b = arr.A[s], arr.B[s]
        l = a if lp == LEFT or vcmp(a, lp) > 0 else lp
        r = b if rp == RIGHT or vcmp(b, rp) < 0 else rp
        if bot >= 0 and arr.rel(s, bot, l, True) < 0:
            entry = ("bot", arr.cross(s, bot))
        elif top >= 0 and arr.rel(s, top, l, True) > 0:
            entry = ("top", arr.cross(s, top))
        else:
            entry = ("end" if l == a else "wall", l)
        if bot >= 0 and arr.rel(s, bot, r, False) < 0:
            exit_ = ("bot", arr.cross(s, bot))
        elif top >= 0 and arr.rel(s, top, r, False) > 0:
            exit_ = ("top", arr.cross(s, top))
        else:
            exit_ = ("end" if r == b else "wall", r)
        return entry, exit_

    def insert(self, s: int):
        arr = self.arr
        loc_steps = dag_visits = 0
        if self.mode == "conflict-graph":
            D = [t for t in self.seg_conf.pop(s) if t in self.alive]
        else:
            D, dag_visits = self.dag_search(s)
            loc_steps = self.locate(arr.A[s])[1] + self.locate(arr.B[s])[1]
        info = {t: self._entry_exit(s, t) for t in D}
        D.sort(key=functools.cmp_to_key(lambda t, u: vcmp(info[t][0][1], info[u][0][1])))

        new: list = []          # (trapezoid, set of destroyed sources)
        up = lo = None          # [top, lp, sources] / [bot, lp, sources]
        crossings = 0
        for t in D:
            top, bot, lp, rp = t
            (ek, ep), (xk, xp) = info[t]
            if ek == "wall":
                if arr.side(s, ep) > 0:
                    new.append(((up[0], s, up[1], ep), up[2]))
                    up = [top, ep, {t}]
                    assert lo[0] == bot
                    lo[2].add(t)
                else:
                    new.append(((s, lo[0], lo[1], ep), lo[2]))
                    lo = [bot, ep, {t}]
                    assert up[0] == top
                    up[2].add(t)
            else:
                new.append(((top, bot, lp, ep), {t}))
                up = [top, ep, {t}]
                lo = [bot, ep, {t}]
            if xk != "wall":
                new.append(((up[0], s, up[1], xp), up[2]))
                new.append(((s, lo[0], lo[1], xp), lo[2]))
                new.append(((top, bot, xp, rp), {t}))
                crossings += xk != "end"
                up = lo = None
        assert up is None and lo is None

        dead = set(D)
        old_conf = {t: self.alive.pop(t) for t in D}
        edges = 0
        for tz, src in new:
            for t in src:
                self.children.setdefault(t, []).append(tz)
            if self.mode == "conflict-graph":
                cand = set()
                for t in src:
                    cand.update(old_conf[t])
                cand.discard(s)
                conf = sorted(u for u in cand if arr.hits(u, tz))
                self.alive[tz] = conf
                for u in conf:
                    self.seg_conf[u].add(tz)
                edges += len(conf)
            else:
                self.alive[tz] = None
        for qi, q in enumerate(self.queries):
            if self.qloc[qi] in dead:
                self.qchanges[qi] += 1
                self.qloc[qi] = next(tz for tz, src in new if self.qloc[qi] in src and arr.contains(tz, q))
        self.inserted.append(s)
        if self.verify and self.mode == "conflict-graph":
            self._verify_conflicts()
        return len(new), len(D), edges, loc_steps, dag_visits, crossings

    def _verify_conflicts(self):
        todo = set(range(self.arr.n)) - set(self.inserted)
        for tz, conf in self.alive.items():
            truth = sorted(u for u in todo if self.arr.hits(u, tz))
            if truth != conf:
                raise AssertionError(f"conflict list of {tz} is {conf}, expected {truth}")

    def run(self, order: Sequence[int]):
        n = len(order)
        cols = np.zeros((6, n), dtype=np.int64)
        for k, s in enumerate(order):
            cols[:, k] = self.insert(int(s))
        return BuildLog(*cols, query_changes=list(self.qchanges))


def build_trapmap(segs: Sequence[Segment], order: Optional[InsertionOrder] = None,
                  mode: str = "conflict-graph", queries=(), verify: bool = False,
                  arr: Optional[Arrangement] = None):
    """Insert ``segs`` in ``order``; returns ``(TrapMap, WorkTrace, ArrangementStats, BuildLog)``.

    The work trace holds conflict edges created per step in conflict-graph
    mode, and trapezoids created plus endpoint location steps in list-free
    mode.  Pass a prebuilt ``arr`` to skip the O(n^2) input validation.
    """
    arr = arr or Arrangement(segs)
    order = order if order is not None else InsertionOrder(tuple(range(arr.n)))
    if len(order) != arr.n:
        raise ValueError("order length must equal the number of segments")
    b = _Builder(arr, mode, queries, verify)
    log = b.run(order)
    if mode == "conflict-graph":
        work = log.conflict_edges
    else:
        work = log.created + log.location_steps
    tm = TrapMap(arr, frozenset(b.alive), tuple(order))
    m_k = np.cumsum(log.crossings)
    stats = ArrangementStats(arr.m, m_k, zone_sizes(tm))
    return tm, WorkTrace(work), stats, log


def zone_sizes(tm: TrapMap) -> np.ndarray:
    z = np.zeros(tm.arr.n, dtype=np.int64)
    for t in tm.trapezoids:
        for i in tm.defining(t):
            z[i] += 1
    return z


@dataclass
class ZoneAudit:
    sizes: np.ndarray
    total: int
    sq_total: int


def zone_audit(segs: Sequence[Segment]) -> ZoneAudit:
    """Zone sizes of the full map: |T_i| = trapezoids having s_i among their definers."""
    tm = brute_decomposition(Arrangement(segs))
    z = zone_sizes(tm)
    return ZoneAudit(z, int(z.sum()), int((z ** 2).sum()))


def point_location_changes(segs: Sequence[Segment], order: InsertionOrder, query,
                           arr: Optional[Arrangement] = None) -> int:
    """Number of steps at which the trapezoid containing ``query`` is replaced."""
    _, _, _, log = build_trapmap(segs, order, "conflict-graph", queries=[query], arr=arr)
    return log.query_changes[0]


# brute-force oracle -----------------------------------------------------------

def brute_decomposition(arr: Arrangement, ids: Optional[Iterable[int]] = None) -> TrapMap:
    """Sweep all vertices left to right, building the map slab by slab.

    Each slab orders its spanning segments bottom to top.  At vertex v the
    wall runs from the first segment below v to the first above; cells of the
    left slab inside that range close at v, cells of the right slab inside it
    open at v, and every other cell carries over.
    """
    ids = sorted(range(arr.n) if ids is None else ids)
    idset = set(ids)
    events: dict = {}
    for i in ids:
        events.setdefault(arr.A[i], []).append(i)
        events.setdefault(arr.B[i], []).append(i)
    for a_ in range(len(ids)):
        for b_ in range(a_ + 1, len(ids)):
            x = arr.cross(ids[a_], ids[b_])
            if x is not None:
                events.setdefault(x, []).extend((ids[a_], ids[b_]))
    verts = sorted(events, key=functools.cmp_to_key(vcmp))
    active: list = []
    opened = {(TOP, BOTTOM): LEFT}
    out = []
    for v in verts:
        through = set(events[v])
        rest = [u for u in active if u not in through]
        below = [u for u in rest if arr.side(u, v) > 0]
        down = below[-1] if below else BOTTOM
        ups = [u for u in rest if arr.side(u, v) < 0]
        up = ups[0] if ups else TOP
        left_through = [u for u in active if u in through]
        for upper, lower in _cells([down] + left_through + [up]):
            out.append((upper, lower, opened.pop((upper, lower)), v))
        ending = {u for u in through if arr.B[u] == v}
        nxt = [u for u in active if u not in ending] + [u for u in through if arr.A[u] == v]
        nxt.sort(key=functools.cmp_to_key(lambda p, q: arr.rel(p, q, v, True)))
        active = nxt
        right_through = [u for u in active if u in through]
        for upper, lower in _cells([down] + right_through + [up]):
            opened[(upper, lower)] = v
    for (upper, lower), lp in opened.items():
        out.append((upper, lower, lp, RIGHT))
    assert idset >= set(active) and not active
    return TrapMap(arr, frozenset(out), tuple(ids))


def _cells(stack: list):
    """Consecutive (upper, lower) pairs of a bottom-to-top list."""
    return [(stack[k + 1], stack[k]) for k in range(len(stack) - 1)]


# generators -------------------------------------------------------------------

def random_noncrossing(n: int, rng: np.random.Generator, coord: int = 1 << 16) -> list[Segment]:
    """n pairwise disjoint segments in general position (rejection sampling).

    Segments are short relative to the square so rejection stays cheap.  A
    candidate is refused if any orientation against an existing segment is
    zero, which also rules out touching and collinear pairs.
    """
    c = np.zeros((n, 4), dtype=np.int64)
    k = 0
    length = max(4, int(coord / max(1.0, np.sqrt(n)) * 1.5))
    tries = 0
    while k < n:
        tries += 1
        if tries > 1000 * (n + 10):
            raise RuntimeError("could not place disjoint segments")
        ax, ay = (int(v) for v in rng.integers(0, coord, 2))
        dx, dy = (int(v) for v in rng.integers(-length, length + 1, 2))
        bx, by = ax + dx, ay + dy
        if (dx, dy) == (0, 0) or not (0 <= bx < coord and 0 <= by < coord):
            continue
        if k:
            e = c[:k]
            o1 = _orient_many(ax, ay, bx, by, e[:, 0], e[:, 1])
            o2 = _orient_many(ax, ay, bx, by, e[:, 2], e[:, 3])
            o3 = _orient_many(e[:, 0], e[:, 1], e[:, 2], e[:, 3], ax, ay)
            o4 = _orient_many(e[:, 0], e[:, 1], e[:, 2], e[:, 3], bx, by)
            if np.any((o1 * o2 <= 0) & (o3 * o4 <= 0)):
                continue
        c[k] = (ax, ay, bx, by)
        k += 1
    return [Segment.of(*(int(v) for v in row), id=i) for i, row in enumerate(c)]


def _orient_many(px, py, qx, qy, rx, ry):
    return np.sign((qx - px) * (ry - py) - (qy - py) * (rx - px))


def random_segments(n: int, rng: np.random.Generator, coord: int = 1 << 10) -> list[Segment]:
    """n segments that may cross, redrawn until in general position."""
    from .geometry import seg_intersect, IntersectionKind
    while True:
        segs: list[Segment] = []
        ok = True
        for k in range(n):
            for _ in range(1000):
                ax, ay, bx, by = (int(v) for v in rng.integers(0, coord, 4))
                if (ax, ay) == (bx, by):
                    continue
                s = Segment.of(ax, ay, bx, by, id=k)
                if all(seg_intersect(s, t)[0] in (IntersectionKind.NONE, IntersectionKind.PROPER) for t in segs):
                    segs.append(s)
                    break
            else:
                ok = False
                break
        if ok:
            try:
                check_general_position(segs)
                return segs
            except DegenerateInputError:
                continue


def grid_segments(k: int) -> list[Segment]:
    """k horizontals and k verticals crossing in k^2 points."""
    segs = [Segment.of(0, y, k + 1, y, id=y - 1) for y in range(1, k + 1)]
    segs += [Segment.of(x, 0, x, k + 1, id=k + x - 1) for x in range(1, k + 1)]
    return segs
