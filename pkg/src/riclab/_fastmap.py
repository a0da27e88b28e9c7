"""Compiled conflict-graph trapezoidal map for pairwise disjoint segments.

Same construction as :mod:`.trapmap` restricted to inputs without crossings,
written over flat arrays so that thousands of runs at n in the thousands stay
affordable.  The tests check it step by step against the reference builder.

Layout
  vertex code 2*i is the left endpoint of segment i, 2*i+1 the right one;
  -1 / -2 stand for the left / right side of the box.  Segment ids -1 / -2
  are the box top / bottom.  Conflict lists are write-once slices of an
  append-only pool; the reverse links (segment -> trapezoids) are singly
  linked lists whose dead entries are skipped on read.
"""
from __future__ import annotations

import numba
import numpy as np

from .geometry import Segment

_LEFT, _RIGHT = -1, -2
_KMAX = 1 << 62
_SHIFT = 22
_TOP, _BOT = -1, -2


@numba.njit(cache=True, inline="always")
def _vx(code, ax, ay, bx, by):
    i = code >> 1
    if code & 1:
        return bx[i], by[i]
    return ax[i], ay[i]


@numba.njit(cache=True, inline="always")
def _key(c, vk):
    if c == _LEFT:
        return -1
    if c == _RIGHT:
        return _KMAX
    return vk[c]


@numba.njit(cache=True, inline="always")
def _vlt(c1, c2, vk):
    """Strict lexicographic order of two vertex codes."""
    return _key(c1, vk) < _key(c2, vk)


@numba.njit(cache=True, inline="always")
def _orient(px, py, qx, qy, rx, ry):
    d = (qx - px) * (ry - py) - (qy - py) * (rx - px)
    return (d > 0) - (d < 0)


@numba.njit(cache=True, inline="always")
def _above(u, t, ax, ay, bx, by):
    # u above t on their common span (no crossings)
    if ax[u] > ax[t] or (ax[u] == ax[t] and ay[u] > ay[t]):
        return _orient(ax[t], ay[t], bx[t], by[t], ax[u], ay[u]) > 0
    return _orient(ax[u], ay[u], bx[u], by[u], ax[t], ay[t]) < 0


@numba.njit(cache=True, inline="always")
def _hits(s, top, bot, lp, rp, ax, ay, bx, by, vk):
    l = 2 * s if (lp == _LEFT or _vlt(lp, 2 * s, vk)) else lp
    r = 2 * s + 1 if (rp == _RIGHT or _vlt(2 * s + 1, rp, vk)) else rp
    if not _vlt(l, r, vk):
        return False
    if bot >= 0 and not _above(s, bot, ax, ay, bx, by):
        return False
    if top >= 0 and _above(s, top, ax, ay, bx, by):
        return False
    return True


@numba.njit(cache=True, inline="always")
def _contains(qx, qy, top, bot, lp, rp, ax, ay, bx, by):
    if lp != _LEFT:
        x, y = _vx(lp, ax, ay, bx, by)
        if not (x < qx or (x == qx and y < qy)):
            return False
    if rp != _RIGHT:
        x, y = _vx(rp, ax, ay, bx, by)
        if not (qx < x or (qx == x and qy < y)):
            return False
    if top >= 0 and _orient(ax[top], ay[top], bx[top], by[top], qx, qy) >= 0:
        return False
    if bot >= 0 and _orient(ax[bot], ay[bot], bx[bot], by[bot], qx, qy) <= 0:
        return False
    return True


@numba.njit(cache=True)
def _grow(a, need):
    if need <= a.shape[0]:
        return a
    b = np.empty(max(need, 2 * a.shape[0]), a.dtype)
    b[:a.shape[0]] = a
    return b


@numba.njit(cache=True)
def _run(ax, ay, bx, by, vk, order, qx, qy, checkpoints):
    n = ax.shape[0]
    cap = 4 * n + 16
    t_top = np.empty(cap, np.int64)
    t_bot = np.empty(cap, np.int64)
    t_lp = np.empty(cap, np.int64)
    t_rp = np.empty(cap, np.int64)
    t_cs = np.empty(cap, np.int64)
    t_cl = np.empty(cap, np.int64)
    t_alive = np.zeros(cap, np.bool_)
    pool = np.empty(8 * n + 16, np.int32)
    l_trap = np.empty(8 * n + 16, np.int64)
    l_next = np.empty(8 * n + 16, np.int64)
    head = np.full(n, -1, np.int64)
    mark = np.full(n, -1, np.int64)

    # the box conflicts with everything
    t_top[0], t_bot[0], t_lp[0], t_rp[0] = _TOP, _BOT, _LEFT, _RIGHT
    t_cs[0], t_cl[0], t_alive[0] = 0, n, True
    for i in range(n):
        pool[i] = i
        l_trap[i] = 0
        l_next[i] = -1
        head[i] = i
    ntz, npool, nlink = 1, n, n

    work = np.zeros(n, np.int64)
    created = np.zeros(n, np.int64)
    destroyed = np.zeros(n, np.int64)
    nq = qx.shape[0]
    qloc = np.zeros(nq, np.int64)
    qchg = np.zeros(nq, np.int64)
    ncp = checkpoints.shape[0]
    cp_max = np.zeros(ncp, np.int64)
    cp_mean = np.zeros(ncp, np.float64)
    cp_i = 0

    D = np.empty(16, np.int64)
    # new pieces: top, bot, lp, rp, first source index in D, last source index
    P = np.empty((16, 6), np.int64)
    for k in range(n):
        s = order[k]
        # collect live conflicting trapezoids
        nd = 0
        e = head[s]
        while e >= 0:
            t = l_trap[e]
            if t_alive[t]:
                D = _grow(D, nd + 1)
                D[nd] = t
                nd += 1
            e = l_next[e]
        # sort by left wall
        if nd > 1:
            keys = np.empty(nd, np.int64)
            for i in range(nd):
                keys[i] = _key(t_lp[D[i]], vk)
            D[:nd] = D[:nd][np.argsort(keys)]
        if P.shape[0] < 3 * nd + 4:
            P = np.empty((2 * (3 * nd + 4), 6), np.int64)
        npc = 0
        a_code, b_code = 2 * s, 2 * s + 1
        up_top = up_lp = up_src = lo_bot = lo_lp = lo_src = 0
        for i in range(nd):
            t = D[i]
            top, bot, lp, rp = t_top[t], t_bot[t], t_lp[t], t_rp[t]
            if i == 0:
                P[npc, 0], P[npc, 1], P[npc, 2], P[npc, 3], P[npc, 4], P[npc, 5] = top, bot, lp, a_code, 0, 0
                npc += 1
                up_top, up_lp, up_src = top, a_code, 0
                lo_bot, lo_lp, lo_src = bot, a_code, 0
            else:
                vx_, vy_ = _vx(lp, ax, ay, bx, by)
                if _orient(ax[s], ay[s], bx[s], by[s], vx_, vy_) > 0:
                    P[npc, 0], P[npc, 1], P[npc, 2], P[npc, 3], P[npc, 4], P[npc, 5] = up_top, s, up_lp, lp, up_src, i - 1
                    npc += 1
                    up_top, up_lp, up_src = top, lp, i
                else:
                    P[npc, 0], P[npc, 1], P[npc, 2], P[npc, 3], P[npc, 4], P[npc, 5] = s, lo_bot, lo_lp, lp, lo_src, i - 1
                    npc += 1
                    lo_bot, lo_lp, lo_src = bot, lp, i
            if i == nd - 1:
                P[npc, 0], P[npc, 1], P[npc, 2], P[npc, 3], P[npc, 4], P[npc, 5] = up_top, s, up_lp, b_code, up_src, i
                npc += 1
                P[npc, 0], P[npc, 1], P[npc, 2], P[npc, 3], P[npc, 4], P[npc, 5] = s, lo_bot, lo_lp, b_code, lo_src, i
                npc += 1
                P[npc, 0], P[npc, 1], P[npc, 2], P[npc, 3], P[npc, 4], P[npc, 5] = top, bot, b_code, rp, i, i
                npc += 1
        # materialize pieces with their conflict lists
        first_new = ntz
        edges = 0
        for p in range(npc):
            if ntz >= t_top.shape[0]:
                need = ntz + npc + 1
                t_top = _grow(t_top, need)
                t_bot = _grow(t_bot, need)
                t_lp = _grow(t_lp, need)
                t_rp = _grow(t_rp, need)
                t_cs = _grow(t_cs, need)
                t_cl = _grow(t_cl, need)
                alive2 = np.zeros(t_top.shape[0], np.bool_)
                alive2[:t_alive.shape[0]] = t_alive
                t_alive = alive2
            top, bot, lp, rp = P[p, 0], P[p, 1], P[p, 2], P[p, 3]
            stamp = ntz
            start = npool
            for d in range(P[p, 4], P[p, 5] + 1):
                src = D[d]
                for c in range(t_cs[src], t_cs[src] + t_cl[src]):
                    u = pool[c]
                    if u == s or mark[u] == stamp:
                        continue
                    mark[u] = stamp
                    if _hits(u, top, bot, lp, rp, ax, ay, bx, by, vk):
                        if npool >= pool.shape[0]:
                            pool = _grow(pool, npool + 1)
                        pool[npool] = u
                        npool += 1
            cnt = npool - start
            for c in range(start, npool):
                u = pool[c]
                if nlink >= l_trap.shape[0]:
                    l_trap = _grow(l_trap, nlink + 1)
                    l_next = _grow(l_next, nlink + 1)
                l_trap[nlink] = ntz
                l_next[nlink] = head[u]
                head[u] = nlink
                nlink += 1
            t_top[ntz], t_bot[ntz], t_lp[ntz], t_rp[ntz] = top, bot, lp, rp
            t_cs[ntz], t_cl[ntz], t_alive[ntz] = start, cnt, True
            ntz += 1
            edges += cnt
        for i in range(nd):
            t_alive[D[i]] = False
        # queries whose trapezoid died
        for q in range(nq):
            t = qloc[q]
            if t_alive[t]:
                continue
            pos = -1
            for i in range(nd):
                if D[i] == t:
                    pos = i
            for p in range(npc):
                if P[p, 4] <= pos <= P[p, 5] and _contains(qx[q], qy[q], P[p, 0], P[p, 1], P[p, 2], P[p, 3], ax, ay, bx, by):
                    qloc[q] = first_new + p
                    break
            qchg[q] += 1
        work[k] = edges
        created[k] = npc
        destroyed[k] = nd
        while cp_i < ncp and checkpoints[cp_i] == k + 1:
            mx = 0
            tot = 0
            cnt = 0
            for t in range(ntz):
                if t_alive[t]:
                    cnt += 1
                    tot += t_cl[t]
                    if t_cl[t] > mx:
                        mx = t_cl[t]
            cp_max[cp_i] = mx
            cp_mean[cp_i] = tot / cnt
            cp_i += 1
    nalive = 0
    for t in range(ntz):
        if t_alive[t]:
            nalive += 1
    final = np.empty((nalive, 4), np.int64)
    j = 0
    for t in range(ntz):
        if t_alive[t]:
            final[j, 0], final[j, 1], final[j, 2], final[j, 3] = t_top[t], t_bot[t], t_lp[t], t_rp[t]
            j += 1
    return work, created, destroyed, qchg, cp_max, cp_mean, final


class FastRun:
    __slots__ = ("work", "created", "destroyed", "query_changes", "cp_max", "cp_mean", "final")

    def __init__(self, *vals):
        for k, v in zip(self.__slots__, vals):
            setattr(self, k, v)


def seg_arrays(segs) -> tuple[np.ndarray, ...]:
    c = np.array([s.coords() for s in segs], dtype=np.int64).reshape(-1, 4)
    return tuple(np.ascontiguousarray(c[:, i]) for i in range(4))


def vertex_keys(arrays) -> np.ndarray:
    """Integer keys ordering vertex codes lexicographically by (x, y)."""
    ax, ay, bx, by = arrays
    off = 1 << (_SHIFT - 1)
    vk = np.empty(2 * len(ax), np.int64)
    vk[0::2] = ((ax + off) << _SHIFT) + (ay + off)
    vk[1::2] = ((bx + off) << _SHIFT) + (by + off)
    return vk


def fast_build(arrays, order, queries=None, checkpoints=None) -> FastRun:
    """Run the compiled builder.

    ``arrays`` is the output of :func:`seg_arrays` (segments must be pairwise
    disjoint and free of shared endpoints; this is not re-checked here).
    ``checkpoints`` lists prefix sizes i (sorted) at which the max and mean
    conflict-list size over live trapezoids are recorded.
    """
    ax, ay, bx, by = arrays
    q = np.zeros((0, 2), np.int64) if queries is None else np.asarray(queries, np.int64).reshape(-1, 2)
    cps = np.zeros(0, np.int64) if checkpoints is None else np.asarray(sorted(checkpoints), np.int64)
    res = _run(ax, ay, bx, by, vertex_keys(arrays), np.ascontiguousarray(order, dtype=np.int64),
               np.ascontiguousarray(q[:, 0]), np.ascontiguousarray(q[:, 1]), cps)
    return FastRun(*res)


def decode_trapezoid(row, segs) -> tuple:
    """Convert a kernel row to the tuple form used by :mod:`.trapmap`."""
    from .trapmap import BOTTOM, LEFT, RIGHT, TOP
    top, bot, lp, rp = (int(v) for v in row)

    def vert(c, side):
        if c < 0:
            return side
        s = segs[c >> 1]
        p = s.b if c & 1 else s.a
        return (p[0], p[1], 1)
    return (TOP if top == _TOP else top, BOTTOM if bot == _BOT else bot,
            vert(lp, LEFT), vert(rp, RIGHT))
