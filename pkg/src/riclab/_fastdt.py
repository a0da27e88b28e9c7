"""Compiled incremental Delaunay builder, step-for-step twin of :mod:`.delaunay`.

Sentinels are symbolic: a point is ``(x0 + M x1, y0 + M y1)`` and every
predicate is evaluated as a polynomial in M, taking the sign of the leading
nonzero coefficient.  Real points have ``x1 = y1 = 0``; sentinels have
``x0 = y0 = 0``.  With |coordinates| <= ``KERNEL_CAP`` all coefficients stay
far below 2**63.

Triangle rows hold vertices and the neighbour opposite each vertex; buckets
are write-once slices of an append-only pool.
"""
from __future__ import annotations

import numba
import numpy as np

KERNEL_CAP = 1 << 10


@numba.njit(cache=True, inline="always")
def _lead3(c0, c1, c2):
    if c2 != 0:
        return 1 if c2 > 0 else -1
    if c1 != 0:
        return 1 if c1 > 0 else -1
    return (c0 > 0) - (c0 < 0)


@numba.njit(cache=True, inline="always")
def _orient(X0, X1, Y0, Y1, a, b, c):
    dx0, dx1, dy0, dy1 = X0[b] - X0[a], X1[b] - X1[a], Y0[b] - Y0[a], Y1[b] - Y1[a]
    ex0, ex1, ey0, ey1 = X0[c] - X0[a], X1[c] - X1[a], Y0[c] - Y0[a], Y1[c] - Y1[a]
    c0 = dx0 * ey0 - dy0 * ex0
    c1 = dx0 * ey1 + dx1 * ey0 - dy0 * ex1 - dy1 * ex0
    c2 = dx1 * ey1 - dy1 * ex1
    return _lead3(c0, c1, c2)


@numba.njit(cache=True)
def _incircle_raw(X0, X1, Y0, Y1, a, b, c, d):
    """Sign of the in-circle polynomial (0 if it vanishes identically)."""
    # rows relative to d: x = x0 + M x1, y likewise, l = x^2 + y^2 (degree 2)
    ax0, ax1, ay0, ay1 = X0[a] - X0[d], X1[a] - X1[d], Y0[a] - Y0[d], Y1[a] - Y1[d]
    bx0, bx1, by0, by1 = X0[b] - X0[d], X1[b] - X1[d], Y0[b] - Y0[d], Y1[b] - Y1[d]
    cx0, cx1, cy0, cy1 = X0[c] - X0[d], X1[c] - X1[d], Y0[c] - Y0[d], Y1[c] - Y1[d]
    al0, al1, al2 = ax0 * ax0 + ay0 * ay0, 2 * (ax0 * ax1 + ay0 * ay1), ax1 * ax1 + ay1 * ay1
    bl0, bl1, bl2 = bx0 * bx0 + by0 * by0, 2 * (bx0 * bx1 + by0 * by1), bx1 * bx1 + by1 * by1
    cl0, cl1, cl2 = cx0 * cx0 + cy0 * cy0, 2 * (cx0 * cx1 + cy0 * cy1), cx1 * cx1 + cy1 * cy1
    # u = by*cl - bl*cy, v = bx*cl - bl*cx  (degree 3)
    u0 = by0 * cl0 - bl0 * cy0
    u1 = by0 * cl1 + by1 * cl0 - bl0 * cy1 - bl1 * cy0
    u2 = by0 * cl2 + by1 * cl1 - bl1 * cy1 - bl2 * cy0
    u3 = by1 * cl2 - bl2 * cy1
    v0 = bx0 * cl0 - bl0 * cx0
    v1 = bx0 * cl1 + bx1 * cl0 - bl0 * cx1 - bl1 * cx0
    v2 = bx0 * cl2 + bx1 * cl1 - bl1 * cx1 - bl2 * cx0
    v3 = bx1 * cl2 - bl2 * cx1
    # w = bx*cy - by*cx  (degree 2)
    w0 = bx0 * cy0 - by0 * cx0
    w1 = bx0 * cy1 + bx1 * cy0 - by0 * cx1 - by1 * cx0
    w2 = bx1 * cy1 - by1 * cx1
    # det = ax*u - ay*v + al*w  (degree 4)
    d0 = ax0 * u0 - ay0 * v0 + al0 * w0
    d1 = ax0 * u1 + ax1 * u0 - ay0 * v1 - ay1 * v0 + al0 * w1 + al1 * w0
    d2 = ax0 * u2 + ax1 * u1 - ay0 * v2 - ay1 * v1 + al0 * w2 + al1 * w1 + al2 * w0
    d3 = ax0 * u3 + ax1 * u2 - ay0 * v3 - ay1 * v2 + al1 * w2 + al2 * w1
    d4 = ax1 * u3 - ay1 * v3 + al2 * w2
    if d4 != 0:
        return 1 if d4 > 0 else -1
    if d3 != 0:
        return 1 if d3 > 0 else -1
    if d2 != 0:
        return 1 if d2 > 0 else -1
    if d1 != 0:
        return 1 if d1 > 0 else -1
    return (d0 > 0) - (d0 < 0)


@numba.njit(cache=True)
def _incircle(X0, X1, Y0, Y1, a, b, c, d):
    s = _incircle_raw(X0, X1, Y0, Y1, a, b, c, d)
    if s != 0:
        return s
    # lifting perturbation: the smallest id with a nonzero cofactor decides
    ids = np.array([a, b, c, d])
    cof = np.array([_orient(X0, X1, Y0, Y1, b, c, d), _orient(X0, X1, Y0, Y1, c, a, d),
                    _orient(X0, X1, Y0, Y1, a, b, d), -_orient(X0, X1, Y0, Y1, a, b, c)])
    for j in np.argsort(ids):
        if cof[j] != 0:
            return cof[j]
    return 0


@numba.njit(cache=True, inline="always")
def _contains(X0, X1, Y0, Y1, a, b, c, q):
    return (_orient(X0, X1, Y0, Y1, a, b, q) >= 0 and _orient(X0, X1, Y0, Y1, b, c, q) >= 0
            and _orient(X0, X1, Y0, Y1, c, a, q) >= 0)


@numba.njit(cache=True)
def _grow1(a, need):
    if need <= a.shape[0]:
        return a
    b = np.empty(max(need, 2 * a.shape[0]), a.dtype)
    b[:a.shape[0]] = a
    return b


@numba.njit(cache=True)
def _grow2(a, need):
    if need <= a.shape[0]:
        return a
    b = np.empty((max(need, 2 * a.shape[0]), a.shape[1]), a.dtype)
    b[:a.shape[0]] = a
    return b


@numba.njit(cache=True, inline="always")
def _idx(row, v):
    if row[0] == v:
        return 0
    if row[1] == v:
        return 1
    return 2


@numba.njit(cache=True)
def _run(X0, X1, Y0, Y1, order, checkpoints):
    n = order.shape[0]
    cap = 8 * n + 16
    TV = np.empty((cap, 3), np.int64)
    TN = np.empty((cap, 3), np.int64)
    bs = np.empty(cap, np.int64)
    bl = np.empty(cap, np.int64)
    alive = np.zeros(cap, np.bool_)
    pool = np.empty(16 * n + 16, np.int64)
    loc = np.zeros(n, np.int64)
    tmp = np.empty(n + 1, np.int64)
    tgt = np.empty(n + 1, np.int64)

    TV[0, 0], TV[0, 1], TV[0, 2] = n, n + 1, n + 2
    TN[0, 0], TN[0, 1], TN[0, 2] = -1, -1, -1
    for i in range(n):
        pool[i] = order[i]
    bs[0], bl[0], alive[0] = 0, n, True
    nt, npool = 1, n

    created = np.zeros(n, np.int64)
    destroyed = np.zeros(n, np.int64)
    flips = np.zeros(n, np.int64)
    rflips = np.zeros(n, np.int64)
    bwork = np.zeros(n, np.int64)
    degree = np.zeros(n, np.int64)
    s1 = np.zeros(n, np.int64)
    s2 = np.zeros(n, np.int64)
    ncp = checkpoints.shape[0]
    cp_max = np.zeros(ncp, np.int64)
    cp_mean = np.zeros(ncp, np.float64)
    cp_degsq = np.zeros(ncp, np.int64)
    cp_live = np.zeros(ncp, np.int64)
    cp_i = 0
    deg = np.zeros(n + 3, np.int64)

    stage = np.empty(64, np.int64)     # triangles created in the current step
    stack = np.empty(64, np.int64)
    srcs = np.empty(2, np.int64)
    tg = np.empty(4, np.int64)

    # checkpoint 0 (before any insertion)
    while cp_i < ncp and checkpoints[cp_i] == 0:
        cp_max[cp_i], cp_mean[cp_i], cp_live[cp_i] = n, n, 1
        cp_i += 1

    for k in range(n):
        p = order[k]
        t = loc[p]
        need = nt + 64
        if need > TV.shape[0]:
            TV = _grow2(TV, need)
            TN = _grow2(TN, need)
            bs = _grow1(bs, need)
            bl = _grow1(bl, need)
            al2 = np.zeros(TV.shape[0], np.bool_)
            al2[:alive.shape[0]] = alive
            alive = al2
        on = -1
        for i in range(3):
            if _orient(X0, X1, Y0, Y1, TV[t, (i + 1) % 3], TV[t, (i + 2) % 3], p) == 0:
                on = i
                break
        nst = 0
        work = 0
        ndes = 0
        if on < 0:
            base = nt
            for i in range(3):
                u, w = TV[t, (i + 1) % 3], TV[t, (i + 2) % 3]
                TV[nt, 0], TV[nt, 1], TV[nt, 2] = u, w, p
                TN[nt, 0], TN[nt, 1], TN[nt, 2] = base + (i + 1) % 3, base + (i + 2) % 3, TN[t, i]
                alive[nt] = True
                stage[nst] = nt
                nst += 1
                nt += 1
            for i in range(3):
                o = TN[t, i]
                if o >= 0:
                    TN[o, _idx(TN[o], t)] = base + i
            srcs[0] = t
            nsrc = 1
            ntg = 3
            for i in range(3):
                tg[i] = base + i
            alive[t] = False
            ndes = 1
        else:
            i = on
            a, u, w = TV[t, i], TV[t, (i + 1) % 3], TV[t, (i + 2) % 3]
            s = TN[t, i]
            d = TV[s, 0]
            if d == u or d == w:
                d = TV[s, 1]
                if d == u or d == w:
                    d = TV[s, 2]
            t_au = TN[t, (i + 2) % 3]
            t_wa = TN[t, (i + 1) % 3]
            s_dw = TN[s, _idx(TV[s], u)]
            s_ud = TN[s, _idx(TV[s], w)]
            base = nt
            TV[nt, 0], TV[nt, 1], TV[nt, 2] = a, u, p
            TN[nt, 0], TN[nt, 1], TN[nt, 2] = base + 3, base + 1, t_au
            TV[nt + 1, 0], TV[nt + 1, 1], TV[nt + 1, 2] = a, p, w
            TN[nt + 1, 0], TN[nt + 1, 1], TN[nt + 1, 2] = base + 2, t_wa, base
            TV[nt + 2, 0], TV[nt + 2, 1], TV[nt + 2, 2] = d, w, p
            TN[nt + 2, 0], TN[nt + 2, 1], TN[nt + 2, 2] = base + 1, base + 3, s_dw
            TV[nt + 3, 0], TV[nt + 3, 1], TV[nt + 3, 2] = d, p, u
            TN[nt + 3, 0], TN[nt + 3, 1], TN[nt + 3, 2] = base, s_ud, base + 2
            for j in range(4):
                alive[nt + j] = True
                stage[nst] = nt + j
                tg[j] = nt + j
                nst += 1
            nt += 4
            if t_au >= 0:
                TN[t_au, _idx(TN[t_au], t)] = base
            if t_wa >= 0:
                TN[t_wa, _idx(TN[t_wa], t)] = base + 1
            if s_dw >= 0:
                TN[s_dw, _idx(TN[s_dw], s)] = base + 2
            if s_ud >= 0:
                TN[s_ud, _idx(TN[s_ud], s)] = base + 3
            srcs[0], srcs[1] = t, s
            nsrc = 2
            ntg = 4
            alive[t] = False
            alive[s] = False
            ndes = 2
        # redistribute
        m = 0
        for si in range(nsrc):
            src = srcs[si]
            for c in range(bs[src], bs[src] + bl[src]):
                q = pool[c]
                if q != p:
                    tmp[m] = q
                    m += 1
        for j in range(m):
            q = tmp[j]
            tgt[j] = -1
            for g in range(ntg):
                tt = tg[g]
                if _contains(X0, X1, Y0, Y1, TV[tt, 0], TV[tt, 1], TV[tt, 2], q):
                    tgt[j] = g
                    break
        pool = _grow1(pool, npool + m)
        for g in range(ntg):
            tt = tg[g]
            bs[tt] = npool
            for j in range(m):
                if tgt[j] == g:
                    pool[npool] = tmp[j]
                    loc[tmp[j]] = tt
                    npool += 1
            bl[tt] = npool - bs[tt]
        work += m
        # legalize
        nstack = 0
        for j in range(nst - 1, -1, -1):
            stack[nstack] = stage[j]
            nstack += 1
        nflip = 0
        nreal_flip = 0
        while nstack > 0:
            nstack -= 1
            T = stack[nstack]
            if not alive[T]:
                continue
            kk = _idx(TV[T], p)
            N = TN[T, kk]
            if N < 0:
                continue
            u, w = TV[T, (kk + 1) % 3], TV[T, (kk + 2) % 3]
            d = TV[N, 0]
            if d == u or d == w:
                d = TV[N, 1]
                if d == u or d == w:
                    d = TV[N, 2]
            if _incircle(X0, X1, Y0, Y1, u, w, p, d) <= 0:
                continue
            nflip += 1
            if u < n and w < n:
                nreal_flip += 1
            t_pu = TN[T, (kk + 2) % 3]
            t_wp = TN[T, (kk + 1) % 3]
            n_ud = TN[N, _idx(TV[N], w)]
            n_dw = TN[N, _idx(TV[N], u)]
            if nt + 2 > TV.shape[0]:
                need = nt + 64
                TV = _grow2(TV, need)
                TN = _grow2(TN, need)
                bs = _grow1(bs, need)
                bl = _grow1(bl, need)
                al2 = np.zeros(TV.shape[0], np.bool_)
                al2[:alive.shape[0]] = alive
                alive = al2
            f1, f2 = nt, nt + 1
            TV[f1, 0], TV[f1, 1], TV[f1, 2] = u, d, p
            TN[f1, 0], TN[f1, 1], TN[f1, 2] = f2, t_pu, n_ud
            TV[f2, 0], TV[f2, 1], TV[f2, 2] = d, w, p
            TN[f2, 0], TN[f2, 1], TN[f2, 2] = t_wp, f1, n_dw
            alive[f1] = True
            alive[f2] = True
            nt += 2
            if t_pu >= 0:
                TN[t_pu, _idx(TN[t_pu], T)] = f1
            if n_ud >= 0:
                TN[n_ud, _idx(TN[n_ud], N)] = f1
            if t_wp >= 0:
                TN[t_wp, _idx(TN[t_wp], T)] = f2
            if n_dw >= 0:
                TN[n_dw, _idx(TN[n_dw], N)] = f2
            # redistribute T then N over f1, f2
            pool = _grow1(pool, npool + bl[T] + bl[N])
            m = 0
            for src in (T, N):
                for c in range(bs[src], bs[src] + bl[src]):
                    tmp[m] = pool[c]
                    m += 1
            bs[f1] = npool
            for j in range(m):
                q = tmp[j]
                if _contains(X0, X1, Y0, Y1, u, d, p, q):
                    tgt[j] = 0
                    pool[npool] = q
                    loc[q] = f1
                    npool += 1
                else:
                    tgt[j] = 1
            bl[f1] = npool - bs[f1]
            bs[f2] = npool
            for j in range(m):
                if tgt[j] == 1:
                    pool[npool] = tmp[j]
                    loc[tmp[j]] = f2
                    npool += 1
            bl[f2] = npool - bs[f2]
            work += m
            alive[T] = False
            alive[N] = False
            ndes += 2
            if nst + 2 > stage.shape[0]:
                stage = _grow1(stage, 2 * (nst + 2))
            stage[nst] = f1
            stage[nst + 1] = f2
            nst += 2
            if nstack + 2 > stack.shape[0]:
                stack = _grow1(stack, 2 * (nstack + 2))
            stack[nstack] = f2
            stack[nstack + 1] = f1
            nstack += 2
        created[k] = nst
        destroyed[k] = ndes
        flips[k] = nflip
        rflips[k] = nreal_flip
        bwork[k] = work
        dg = 0
        a1 = 0
        a2 = 0
        for j in range(nst):
            tt = stage[j]
            if alive[tt]:
                dg += 1
                a1 += bl[tt]
                a2 += bl[tt] * bl[tt]
        degree[k], s1[k], s2[k] = dg, a1, a2
        while cp_i < ncp and checkpoints[cp_i] == k + 1:
            mx = 0
            tot = 0
            live = 0
            deg[:] = 0
            for tt in range(nt):
                if alive[tt]:
                    live += 1
                    tot += bl[tt]
                    if bl[tt] > mx:
                        mx = bl[tt]
                    for j in range(3):
                        deg[TV[tt, j]] += 1
            dsq = 0
            for v in range(n):
                dsq += deg[v] * deg[v]
            cp_max[cp_i], cp_mean[cp_i], cp_degsq[cp_i], cp_live[cp_i] = mx, tot / live, dsq, live
            cp_i += 1
    nreal = 0
    for tt in range(nt):
        if alive[tt] and TV[tt, 0] < n and TV[tt, 1] < n and TV[tt, 2] < n:
            nreal += 1
    final = np.empty((nreal, 3), np.int64)
    j = 0
    for tt in range(nt):
        if alive[tt] and TV[tt, 0] < n and TV[tt, 1] < n and TV[tt, 2] < n:
            final[j] = TV[tt]
            j += 1
    return created, destroyed, flips, bwork, degree, s1, s2, cp_max, cp_mean, cp_degsq, cp_live, final, rflips


class FastDelaunay:
    __slots__ = ("created", "destroyed", "flips", "bucket_work", "degree", "s1", "s2",
                 "cp_max", "cp_mean", "cp_degsq", "cp_live", "final", "real_flips")

    def __init__(self, *vals):
        for k, v in zip(self.__slots__, vals):
            setattr(self, k, v)

    @property
    def work(self) -> np.ndarray:
        return self.bucket_work + self.created

    def triangles(self) -> frozenset:
        out = set()
        for row in self.final:
            tri = tuple(int(v) for v in row)
            k = tri.index(min(tri))
            out.add(tri[k:] + tri[:k])
        return frozenset(out)


def kernel_ok(points) -> bool:
    """True if every coordinate is small enough for exact int64 evaluation."""
    return len(points) >= 3 and all(abs(int(v)) <= KERNEL_CAP for p in points for v in p)


def point_arrays(points):
    """Coefficient arrays (x0, x1, y0, y1) for the points plus the three sentinels."""
    from .delaunay import sentinel_dirs
    n = len(points)
    X0 = np.zeros(n + 3, np.int64)
    X1 = np.zeros(n + 3, np.int64)
    Y0 = np.zeros(n + 3, np.int64)
    Y1 = np.zeros(n + 3, np.int64)
    P = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    X0[:n], Y0[:n] = P[:, 0], P[:, 1]
    for j, (ux, uy) in enumerate(sentinel_dirs(points)):
        X1[n + j], Y1[n + j] = ux, uy
    return X0, X1, Y0, Y1


def fast_delaunay(points, order, checkpoints=None, arrays=None) -> FastDelaunay:
    """Run the compiled builder; inputs must satisfy :func:`kernel_ok`.

    Degeneracy checks (duplicates, all collinear) are the caller's job.
    """
    if not kernel_ok(points):
        raise ValueError(f"coordinates must lie within +-{KERNEL_CAP} for the compiled builder")
    X0, X1, Y0, Y1 = arrays if arrays is not None else point_arrays(points)
    cps = np.zeros(0, np.int64) if checkpoints is None else np.asarray(sorted(checkpoints), np.int64)
    res = _run(X0, X1, Y0, Y1, np.ascontiguousarray(order, dtype=np.int64), cps)
    return FastDelaunay(*res)
