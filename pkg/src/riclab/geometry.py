"""Exact planar predicates on integer (or rational) coordinates.

Everything is evaluated with Python integers or Fractions, so there are no
tolerances anywhere.  Coordinates read from files or produced by the
generators are checked against ``COORD_CAP``.

Conventions shared by the trapezoid code:

* "left of" means lexicographically smaller in (x, y).  This is the usual
  symbolic shear: ties in x are broken by y, so vertical segments behave as
  slightly tilted ones and vertical walls through distinct points never
  coincide.
* A segment stores its endpoints with ``a`` lexicographically before ``b``.
* Intersection points of integer segments are rational; they are carried as
  homogeneous triples ``(X, Y, W)`` with ``W > 0`` and ``gcd = 1`` so equal
  points compare equal as tuples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

COORD_CAP = 2 ** 20

Num = Union[int, Fraction]


class CoordinateCapError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Point:
    x: Num
    y: Num

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class Segment:
    a: tuple
    b: tuple
    id: int = 0

    def __post_init__(self):
        a, b = tuple(self.a), tuple(self.b)
        if a == b:
            raise DegenerateInputError("segment endpoints coincide")
        if b < a:
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def of(cls, ax, ay, bx, by, id: int = 0) -> "Segment":
        return cls((ax, ay), (bx, by), id)

    def coords(self) -> tuple:
        return (self.a[0], self.a[1], self.b[0], self.b[1])


def check_cap(values: Iterable[int], cap: int = COORD_CAP) -> None:
    for v in values:
        if abs(v) > cap:
            raise CoordinateCapError(f"coordinate {v} exceeds cap {cap}")


# basic predicates -------------------------------------------------------------

def _sign(v) -> int:
    return (v > 0) - (v < 0)


def orient(p, q, r) -> int:
    """+1 if p, q, r turn counterclockwise, -1 if clockwise, 0 if collinear."""
    return _sign((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))


def in_circle_det(a, b, c, d):
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return (adx * (bdy * cd - bd * cdy)
            - ady * (bdx * cd - bd * cdx)
            + ad * (bdx * cdy - bdy * cdx))


def in_circle(a, b, c, d) -> int:
    """Sign of the in-circle determinant.

    Positive iff d is strictly inside the circle through a, b, c when those
    are counterclockwise (the sign flips for a clockwise triple).
    """
    if orient(a, b, c) == 0:
        raise DegenerateInputError("in_circle needs a non-collinear triple")
    return _sign(in_circle_det(a, b, c, d))


# segment intersection -------------------------------------------------------

class IntersectionKind(str, Enum):
    NONE = "none"
    PROPER = "proper"
    SHARED_ENDPOINT = "shared_endpoint"
    TOUCH = "touch"            # an endpoint lies in the other segment's interior
    OVERLAP = "overlap"


def _on_closed(p, q, r) -> bool:
    """r on the closed segment pq, given that the three are collinear."""
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def crossing_point(s: Segment, t: Segment) -> tuple:
    """Homogeneous (X, Y, W) of the intersection of the supporting lines."""
    (x1, y1), (x2, y2) = s.a, s.b
    (x3, y3), (x4, y4) = t.a, t.b
    den = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4)
    c1 = x1 * y2 - y1 * x2
    c2 = x3 * y4 - y3 * x4
    X = c1 * (x3 - x4) - (x1 - x2) * c2
    Y = c1 * (y3 - y4) - (y1 - y2) * c2
    return normalize(X, Y, den)


def normalize(X: int, Y: int, W: int) -> tuple:
    if W == 0:
        raise ZeroDivisionError("point at infinity")
    if W < 0:
        X, Y, W = -X, -Y, -W
    g = math.gcd(math.gcd(X, Y), W)
    return (X // g, Y // g, W // g)


def seg_intersect(s: Segment, t: Segment):
    """Classify the pair; returns ``(kind, point)``.

    ``point`` is a ``Point`` with Fraction coordinates for proper crossings
    and touches, the shared point for shared endpoints, else None.
    """
    o1, o2 = orient(s.a, s.b, t.a), orient(s.a, s.b, t.b)
    o3, o4 = orient(t.a, t.b, s.a), orient(t.a, t.b, s.b)
    if o1 == o2 == 0:
        # collinear: overlap, shared endpoint, or disjoint
        lo, hi = max(s.a, t.a), min(s.b, t.b)
        if lo < hi:
            return IntersectionKind.OVERLAP, None
        if lo == hi:
            return IntersectionKind.SHARED_ENDPOINT, Point(*lo)
        return IntersectionKind.NONE, None
    if {s.a, s.b} & {t.a, t.b}:
        p = (set([s.a, s.b]) & set([t.a, t.b])).pop()
        return IntersectionKind.SHARED_ENDPOINT, Point(*p)
    if o1 != o2 and o3 != o4:
        if 0 in (o1, o2, o3, o4):
            X, Y, W = crossing_point(s, t)
            return IntersectionKind.TOUCH, Point(Fraction(X, W), Fraction(Y, W))
        X, Y, W = crossing_point(s, t)
        return IntersectionKind.PROPER, Point(Fraction(X, W), Fraction(Y, W))
    for o, p, q, r in ((o1, s.a, s.b, t.a), (o2, s.a, s.b, t.b), (o3, t.a, t.b, s.a), (o4, t.a, t.b, s.b)):
        if o == 0 and _on_closed(p, q, r):
            return IntersectionKind.TOUCH, Point(*r)
    return IntersectionKind.NONE, None


def brute_intersections(segs: Sequence[Segment]):
    """All-pairs classification; returns ``(m, [(i, j, kind, point), ...])``.

    ``m`` counts proper crossings only; the list holds every non-empty pair.
    """
    out = []
    m = 0
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            kind, p = seg_intersect(segs[i], segs[j])
            if kind is not IntersectionKind.NONE:
                out.append((i, j, kind, p))
                m += kind is IntersectionKind.PROPER
    return m, out


def check_general_position(segs: Sequence[Segment]) -> int:
    """Reject inputs the trapezoid code does not handle; return m.

    Rejected: duplicate or touching segments, shared endpoints, overlaps, and
    three or more segments through one crossing point.
    """
    m, pairs = brute_intersections(segs)
    seen = {}
    for i, j, kind, p in pairs:
        if kind is not IntersectionKind.PROPER:
            raise DegenerateInputError(f"segments {i} and {j}: {kind.value}")
        if p in seen:
            raise DegenerateInputError(f"three segments meet at {p}")
        seen[p] = (i, j)
    return m


def pairwise_disjoint(segs: Sequence[Segment], block: int = 256) -> bool:
    """True iff no two closed segments share a point.

    Vectorized in row blocks so inputs with tens of thousands of segments
    stay cheap; integer products stay below 2**63 under ``COORD_CAP``.
    """
    import numpy as np
    c = np.array([s.coords() for s in segs], dtype=np.int64).reshape(-1, 4)
    n = len(c)
    ax, ay, bx, by = c.T

    def orient_(px, py, qx, qy, rx, ry):
        return np.sign((qx - px) * (ry - py) - (qy - py) * (rx - px))

    for lo in range(0, n, block):
        hi = min(n, lo + block)
        # pair (i, j) with i in the block and j > i
        i = np.arange(lo, hi)[:, None]
        j = np.arange(n)[None, :]
        keep = j > i
        Ax, Ay, Bx, By = (v[lo:hi, None] for v in (ax, ay, bx, by))
        o1 = orient_(Ax, Ay, Bx, By, ax[None, :], ay[None, :])
        o2 = orient_(Ax, Ay, Bx, By, bx[None, :], by[None, :])
        o3 = orient_(ax[None, :], ay[None, :], bx[None, :], by[None, :], Ax, Ay)
        o4 = orient_(ax[None, :], ay[None, :], bx[None, :], by[None, :], Bx, By)
        meet = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        coll = (o1 == 0) & (o2 == 0)
        # collinear pairs meet only if their lexicographic spans overlap
        a_lt_b = (Ax < bx[None, :]) | ((Ax == bx[None, :]) & (Ay <= by[None, :]))
        c_lt_d = (ax[None, :] < Bx) | ((ax[None, :] == Bx) & (ay[None, :] <= By))
        meet &= ~coll | (a_lt_b & c_lt_d)
        if np.any(meet & keep):
            return False
    return True


# file format ----------------------------------------------------------------

def parse_objects(text: str):
    """Parse ``SEG ax ay bx by`` / ``PT x y`` lines; ``#`` starts a comment."""
    segs: list[Segment] = []
    pts: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag, nums = parts[0].upper(), parts[1:]
        try:
            vals = [int(v) for v in nums]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer coordinate") from None
        check_cap(vals)
        if tag == "SEG" and len(vals) == 4:
            segs.append(Segment.of(*vals, id=len(segs)))
        elif tag == "PT" and len(vals) == 2:
            pts.append((vals[0], vals[1]))
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    return segs, pts


def read_objects(path: Union[str, Path]):
    return parse_objects(Path(path).read_text())


def format_objects(segs: Sequence[Segment] = (), pts: Sequence = ()) -> str:
    lines = [f"SEG {s.a[0]} {s.a[1]} {s.b[0]} {s.b[1]}" for s in segs]
    lines += [f"PT {p[0]} {p[1]}" for p in pts]
    return "\n".join(lines) + ("\n" if lines else "")


def write_objects(path: Union[str, Path], segs: Sequence[Segment] = (), pts: Sequence = ()) -> None:
    Path(path).write_text(format_objects(segs, pts))
