"""End-to-end acceptance checks, one test per criterion.

Each test records a ``criterion N: PASS|FAIL ...`` line that the conftest
prints in the terminal summary, then asserts.  Tolerances and sizes are the
required ones; nothing is scaled down.  Two criteria fail by design (see the
messages): they are implemented as stated rather than relaxed.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE
from riclab.adversary import heavy_tail_experiment
from riclab.concentration import harmonic, harmonic_exact
from riclab.darts import dart_cost, dart_tail_experiment, z_enumerated
from riclab.delaunay import brute_delaunay, build_delaunay, delaunay_tail_experiment, empty_circle_violations
from riclab.delaunay import uniform_square
from riclab.geometry import brute_intersections
from riclab.harness import ExperimentConfig, run_experiment
from riclab.martingale import martingale_property_check
from riclab.quicksort import expected_charge, per_element_cost, quicksort_tail_experiment, total_comparisons
from riclab.rng import InsertionOrder, all_permutations
from riclab.segint import (enumerated_point_location_mean, exact_point_location_mean, point_location_experiment,
                           random_queries, segint_tail_experiment, segment_generator)
from riclab.trapmap import Arrangement, brute_decomposition, build_trapmap, random_noncrossing, random_segments

SEED = 0


def record(num, ok, detail):
    ACCEPTANCE.append(f"criterion {num}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def test_c01_martingale_exactness():
    t0 = time.time()
    costs = {
        "quicksort-total": lambda o: total_comparisons(o),
        "quicksort-element": lambda o: per_element_cost(o, len(o) // 2, True),
        "darts": dart_cost,
    }
    ok = all(martingale_property_check(f, n) for f in costs.values() for n in range(1, 8))
    dt = time.time() - t0
    ok &= dt < 60
    assert record(1, ok, f"Doob property exact for n<=7, 3 cost functions ({dt:.1f}s)")


def test_c02_quicksort_expectation():
    t0 = time.time()
    target = sum(Fraction(2, j) for j in range(2, 9))
    exact = all(Fraction(sum(per_element_cost(p, x, True) for p in all_permutations(8)), 40320) == target
                for x in (0, 4, 7))
    r = quicksort_tail_experiment(1024, 10_000, SEED, 1.0)
    expect = 2 * harmonic(1024) - 2
    z = abs(r.mean_per_element - expect) / r.se_per_element
    dt = time.time() - t0
    ok = exact and z <= 3 and dt < 120 and expected_charge(8) == target
    assert record(2, ok, f"n=8 exact={exact}; n=1024 mean {r.mean_per_element:.4f} vs {expect:.4f} "
                         f"({z:.2f} SE, {dt:.1f}s)")


def test_c03_quicksort_tail_ordering():
    r = quicksort_tail_experiment(1024, 10_000, SEED, 1.0)
    ok = r.pair_tail < r.freedman < r.azuma
    assert record(3, ok, f"empirical {r.pair_tail:.3g} < freedman {r.freedman:.4g} < azuma {r.azuma:.4g}")


def test_c04_dart_game():
    t0 = time.time()
    exact = all(Fraction(sum(k * c for k, c in z_enumerated(n).items()), math.factorial(n)) == harmonic_exact(n)
                for n in range(1, 9))
    r = dart_tail_experiment(4096, 100_000, SEED)
    dt = time.time() - t0
    ok = exact and r.deviation_prob <= r.deviation_bound and dt < 120
    assert record(4, ok, f"E[Z]=H_n exact={exact}; Pr[|Z-H_n|>=0.9 ln n] = {r.deviation_prob:.5f} vs bound "
                         f"{r.deviation_bound:.5f} (exact law {r.exact_deviation_prob:.5f}; {dt:.1f}s)")


def test_c05_geometry_correctness():
    t0 = time.time()
    rng = np.random.default_rng(5)
    dt_ok = 0
    for _ in range(100):
        pts = uniform_square(64, rng)
        tr, *_ = build_delaunay(pts, InsertionOrder.of(rng.permutation(64)))
        dt_ok += tr.triangles == brute_delaunay(pts) and not empty_circle_violations(tr)
    tm_ok = m_ok = 0
    for k in range(100):
        n = int(rng.integers(1, 33))
        segs = random_noncrossing(n, rng, coord=1 << 12) if k % 2 else random_segments(min(n, 20), rng, coord=256)
        arr = Arrangement(segs)
        tm, _, st, _ = build_trapmap(segs, InsertionOrder.of(rng.permutation(len(segs))), arr=arr)
        tm_ok += tm.trapezoids == brute_decomposition(arr).trapezoids
        m_ok += st.m_k[-1] == brute_intersections(segs)[0]
    dt = time.time() - t0
    ok = dt_ok == 100 and tm_ok == 100 and m_ok == 100 and dt < 300
    assert record(5, ok, f"delaunay {dt_ok}/100, trapezoid maps {tm_ok}/100, intersection counts {m_ok}/100 "
                         f"({dt:.1f}s)")


def test_c06_noncrossing_count():
    rng = np.random.default_rng(6)
    good = total = 0
    for _ in range(100):
        n = int(rng.integers(1, 65))
        segs = random_noncrossing(n, rng)
        arr = Arrangement(segs)
        for _ in range(3):
            tm, *_ = build_trapmap(segs, InsertionOrder.of(rng.permutation(n)), arr=arr)
            good += len(tm) == 3 * n + 1
            total += 1
    assert record(6, good == total, f"3n+1 trapezoids in {good}/{total} (input, order) pairs")


# measured at seed 0; regressions, not theory
FROZEN_7 = {512: (8.728638671875, 0.9870063688983545, 3.9860824912333768),
            1024: (8.8431796875, 0.8794555851454134, 4.007694958368596),
            2048: (8.8957236328125, 0.7782774623113052, 4.005760614785098)}


def test_c07_delaunay_work_shape():
    res = {n: delaunay_tail_experiment(n, 1000, SEED) for n in (512, 1024, 2048)}
    big = res[2048]
    lin = 1 <= big.created_per_n <= 10
    budget = max(r.var_budget for r in res.values())
    tails = all(t.empirical <= t.bound for r in res.values() for t in r.tails if t.alpha in (2, 4))
    frozen = all(np.allclose((r.created_per_n, r.var_budget, r.c_fit), FROZEN_7[n], rtol=1e-12)
                 for n, r in res.items())
    audits = all(r.jensen_ok and r.accounting_ok for r in res.values())
    ok = lin and budget <= 20 and tails and frozen and audits
    assert record(7, ok, f"created/n {big.created_per_n:.3f}, max var budget {budget:.3f}, "
                         f"tails(2,4) ok={tails}, c_fit {big.c_fit:.3f}, regressions ok={frozen}")


def test_c08_point_location():
    segs = segment_generator("random-noncrossing", 256, SEED)
    qs = random_queries(segs, 8, np.random.default_rng(8))
    r = point_location_experiment(segs, qs, 10_000, SEED)
    rng = np.random.default_rng(9)
    exact_ok = True
    for n in (3, 4, 5, 6):
        small = random_noncrossing(n, rng, coord=128)
        q = random_queries(small, 1, rng)[0]
        exact_ok &= exact_point_location_mean(small, q) == enumerated_point_location_mean(small, q)
    ok = r.mean_changes <= r.harmonic_bound and exact_ok
    assert record(8, ok, f"mean changes {r.mean_changes:.3f} <= 4H_n {r.harmonic_bound:.3f}; "
                         f"exhaustive n<=6 equal={exact_ok}")


def test_c09_segment_intersection_work():
    rnd = segint_tail_experiment("random-noncrossing", 10_000, SEED, n=512)
    grid = segint_tail_experiment("grid", 1000, SEED, k=24)
    big = segint_tail_experiment("grid", 200, SEED, k=64)
    scale_ok = rnd.mean_ratio <= 10 and grid.mean_ratio <= 10
    cor2 = next(b for b in rnd.bounds if b.name == "noncrossing-tail")
    thm3 = next(b for b in big.bounds if b.name == "crossing-tail")
    ok = scale_ok and cor2.applicable and cor2.holds and thm3.applicable and thm3.holds
    assert record(9, ok, f"mean/(n ln n + m): random {rnd.mean_ratio:.2f}, grid24 {grid.mean_ratio:.2f}; "
                         f"noncrossing tail {cor2.empirical:.3g} <= {cor2.bound:.3g}; "
                         f"crossing tail on grid64 (m={big.m}) Pr[work>=m]={thm3.empirical:.3g} "
                         f"vs {thm3.bound:.3g}")


def test_c10_heavy_tail():
    t0 = time.time()
    rows = heavy_tail_experiment([2 ** 10, 2 ** 12, 2 ** 14], seed=SEED)
    ratios = [r.ratio for r in rows]
    growth = all(b > a for a, b in zip(ratios, ratios[1:]))
    miss = [abs(r.miss_rate - r.miss_formula) <= 3 * r.miss_se for r in rows]
    dt = time.time() - t0
    ok = growth and all(miss) and dt < 1800
    detail = "; ".join(f"n={r.n} Q/(n ln n)={r.ratio:.3f} miss {r.miss_rate:.4f} vs {r.miss_formula:.4f} "
                       f"+-{3 * r.miss_se:.4f}" for r in rows)
    assert record(10, ok, f"{detail} ({dt:.0f}s)")


@pytest.mark.parametrize("alg,kw", [("quicksort", dict(n=256, trials=200)), ("darts", dict(n=512, trials=200)),
                                    ("trapmap", dict(n=128, trials=20)),
                                    ("trapmap", dict(n=10, grid=5, generator="grid", trials=5)),
                                    ("delaunay", dict(n=256, trials=20)),
                                    ("adversary", dict(sizes=(256,))), ("bound", dict(n=1024))])
def test_c11_determinism(tmp_path, alg, kw):
    blobs = []
    for tag, jobs in (("r1", 1), ("r2", 1), ("r3", 2), ("r4", 4)):
        out = tmp_path / tag
        run_experiment(ExperimentConfig(alg, out=str(out), jobs=jobs, **kw))
        blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    ok = all(b == blobs[0] for b in blobs) and len(blobs[0]) >= 1
    name = f"{alg}{'-grid' if 'grid' in kw else ''}"
    assert record(f"11/{name}", ok, f"{name}: {len(blobs[0])} files byte-identical across reruns and jobs 1,2,4")
