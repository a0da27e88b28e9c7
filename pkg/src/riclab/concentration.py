"""Closed-form tail bounds and the theoretical curves they are compared with.

All three bounds are evaluated in float64.  ``freedman_bound`` returns the raw
value (which can exceed 1); use :func:`as_probability` to clamp.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional


@dataclass(frozen=True)
class TailBoundParams:
    lam: float
    delta_sq: float
    m_max: float
    g_of_n: Optional[float] = None
    f_of_n: Optional[float] = None

    def __post_init__(self):
        if self.lam < 0 or self.delta_sq < 0 or self.m_max < 0:
            raise ValueError("lambda, delta_sq and m_max must be nonnegative")
        if self.g_of_n is not None:
            if self.f_of_n is None:
                raise ValueError("g_of_n requires f_of_n")
            if self.g_of_n < 0:
                raise ValueError("g_of_n must be nonnegative")
        if self.f_of_n is not None and self.f_of_n <= 1:
            raise ValueError("f_of_n must exceed 1")


@dataclass(frozen=True)
class MswParams:
    a_expect: float
    b_thresh: float
    d_max: float

    def __post_init__(self):
        if self.a_expect <= 0 or self.d_max <= 0 or self.b_thresh < 0:
            raise ValueError("need a_expect > 0, d_max > 0, b_thresh >= 0")


def freedman_bound(p: TailBoundParams) -> float:
    """2 exp(-lam^2 / (2 (delta_sq + M lam / 3))), plus 1/f in the (g, f) form.

    In the (g, f) form the increment bound M is replaced by g(n), which holds
    except with probability 1/f(n).
    """
    m = p.g_of_n if p.g_of_n is not None else p.m_max
    extra = 1.0 / p.f_of_n if p.g_of_n is not None else 0.0
    if p.lam == 0:
        return 2.0 + extra
    denom = 2.0 * (p.delta_sq + m * p.lam / 3.0)
    if denom == 0:
        # no variance and no increments: the martingale cannot move at all
        return 0.0 + extra
    return 2.0 * math.exp(-(p.lam ** 2) / denom) + extra


def azuma_bound(lam: float, sq_sum: float) -> float:
    """exp(-lam^2 / sum c_i^2), without the usual factor 2 or 1/2."""
    if sq_sum <= 0:
        raise ValueError("sq_sum must be positive")
    return math.exp(-(lam ** 2) / sq_sum)


def msw_bound(p: MswParams) -> float:
    """(e / (1 + B/A))^(B/d), capped at 1."""
    if p.b_thresh == 0:
        return 1.0
    base = math.e / (1.0 + p.b_thresh / p.a_expect)
    return min(1.0, base ** (p.b_thresh / p.d_max))


def as_probability(x: float) -> float:
    return min(1.0, max(0.0, x))


def harmonic(n: int) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.fsum(1.0 / i for i in range(1, n + 1))


def harmonic_exact(n: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def _ackermann(m: int, j: int, cap: int) -> int:
    """Ackermann-Peter A(m, j), saturating at ``cap`` to stay finite."""
    if m == 0:
        return min(j + 1, cap)
    if m == 1:
        return min(j + 2, cap)
    if m == 2:
        return min(2 * j + 3, cap)
    if m == 3:
        # 2^(j+3) - 3
        if j + 3 > cap.bit_length() + 1:
            return cap
        return min((1 << (j + 3)) - 3, cap)
    val = _ackermann(m - 1, 1, cap)
    for _ in range(j):
        if val >= cap:
            return cap
        val = _ackermann(m - 1, val, cap)
    return val


def inverse_ackermann(n: int) -> int:
    """Smallest m with A(m, m) >= n on the Ackermann-Peter diagonal.

    Diagonal values: A(0,0)=1, A(1,1)=3, A(2,2)=7, A(3,3)=61, and A(4,4) is a
    tower of 2s far beyond any machine integer, so the result is 4 for every
    62 <= n that fits in memory.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 0
    while _ackermann(m, m, n) < n:
        m += 1
    return m


def quicksort_freedman(n: int, c: float) -> float:
    """Per-element quicksort instantiation: lam = 2c ln n, delta^2 = 2 H_n, M = 1."""
    return freedman_bound(TailBoundParams(lam=2 * c * math.log(n), delta_sq=2 * harmonic(n), m_max=1.0))
