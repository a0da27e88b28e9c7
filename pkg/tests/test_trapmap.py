import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riclab._fastmap import decode_trapezoid, fast_build, seg_arrays
from riclab.geometry import CoordinateCapError, DegenerateInputError, Segment, brute_intersections
from riclab.rng import InsertionOrder, make_rng
from riclab.trapmap import (BOX, Arrangement, brute_decomposition, build_trapmap, grid_segments,
                            point_location_changes, random_noncrossing, random_segments, zone_audit)


def _rng(k):
    return np.random.default_rng(1000 + k)


def test_empty_and_single():
    tm, tr, st_, _ = build_trapmap([])
    assert tm.trapezoids == {BOX} and tr.total == 0
    tm, tr, _, _ = build_trapmap([Segment.of(0, 0, 4, 1)])
    assert len(tm) == 4 and tm.area_ok()
    assert tm.trapezoids == brute_decomposition(tm.arr).trapezoids


def test_rejects_bad_input():
    with pytest.raises(DegenerateInputError):
        build_trapmap([Segment.of(0, 0, 4, 0), Segment.of(0, 0, 4, 0, id=1)])
    with pytest.raises(DegenerateInputError):
        build_trapmap([Segment.of(0, 0, 4, 0), Segment.of(4, 0, 6, 3, id=1)])
    with pytest.raises(CoordinateCapError):
        build_trapmap([Segment.of(0, 0, 2 ** 21, 0)])


@pytest.mark.parametrize("k", range(100))
def test_noncrossing_matches_brute_and_3n_plus_1(k):
    rng = _rng(k)
    n = int(rng.integers(1, 33))
    segs = random_noncrossing(n, rng, coord=1 << 10)
    arr = Arrangement(segs)
    truth = brute_decomposition(arr).trapezoids
    assert len(truth) == 3 * n + 1
    for _ in range(2):
        tm, *_ = build_trapmap(segs, InsertionOrder.of(rng.permutation(n)), arr=arr)
        assert tm.trapezoids == truth


@pytest.mark.parametrize("k", range(30))
def test_crossing_matches_brute(k):
    rng = _rng(500 + k)
    n = int(rng.integers(2, 16))
    segs = random_segments(n, rng, coord=64)
    arr = Arrangement(segs)
    order = InsertionOrder.of(rng.permutation(n))
    tm, tr, st_, log = build_trapmap(segs, order, arr=arr, verify=True)
    tm2, *_ = build_trapmap(segs, order, mode="list-free", arr=arr)
    truth = brute_decomposition(arr).trapezoids
    assert tm.trapezoids == truth == tm2.trapezoids
    m = brute_intersections(segs)[0]
    assert st_.m == m == st_.m_k[-1] == arr.m
    assert np.all(np.diff(st_.m_k) >= 0)
    assert log.created.sum() >= len(tm)
    assert 1 + log.created.sum() - log.destroyed.sum() == len(tm)
    assert tm.area_ok()


def test_grid_counts():
    segs = grid_segments(4)
    tm, tr, st_, _ = build_trapmap(segs, InsertionOrder.of(make_rng(3).permutation(8)), verify=True)
    assert st_.m == 16
    assert tm.trapezoids == brute_decomposition(tm.arr).trapezoids


def test_defining_at_most_six_and_adjacency_symmetric():
    rng = _rng(7)
    segs = random_segments(10, rng, coord=64)
    tm, *_ = build_trapmap(segs)
    assert all(len(tm.defining(t)) <= 6 for t in tm.trapezoids)
    adj = tm.adjacency()
    assert all(t in adj[u] for t in adj for u in adj[t])


def test_zone_audit():
    z = zone_audit([Segment.of(0, 0, 4, 1)])
    assert z.total == 4 and z.sq_total == 16
    # stacked horizontals: small zones, linear total
    z = zone_audit([Segment.of(0, y, 10, y, id=y) for y in range(20)])
    assert z.total <= 6 * 20
    totals = [zone_audit(grid_segments(k)).total for k in (4, 8, 16)]
    scale = [2 * k + k * k for k in (4, 8, 16)]
    ratios = [t / s for t, s in zip(totals, scale)]
    assert max(ratios) / min(ratios) < 1.5


def test_point_location_exact_small():
    from riclab.segint import enumerated_point_location_mean, exact_point_location_mean
    rng = _rng(11)
    segs = random_noncrossing(5, rng, coord=64)
    q = (31, 17)
    assert exact_point_location_mean(segs, q) == enumerated_point_location_mean(segs, q)
    assert point_location_changes([], InsertionOrder(()), (1, 1)) == 0


def test_point_location_degenerate_query():
    segs = [Segment.of(0, 0, 4, 0)]
    with pytest.raises(DegenerateInputError):
        point_location_changes(segs, InsertionOrder((0,)), (2, 0))


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_kernel_matches_reference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 30))
    segs = random_noncrossing(n, rng, coord=512)
    arr = Arrangement(segs)
    order = InsertionOrder.of(rng.permutation(n))
    qs = [(2 * int(x) + 1, 2 * int(y) + 1) for x, y in rng.integers(0, 256, (4, 2))]
    qs = [q for q in qs if all(arr.side(i, (q[0], q[1], 1)) != 0 for i in range(n))]
    tm, tr, _, log = build_trapmap(segs, order, arr=arr, queries=qs)
    fr = fast_build(seg_arrays(segs), order.as_array(), qs, checkpoints=[1, n])
    assert np.array_equal(fr.work, log.conflict_edges)
    assert np.array_equal(fr.created, log.created) and np.array_equal(fr.destroyed, log.destroyed)
    assert list(fr.query_changes) == log.query_changes
    assert {decode_trapezoid(r, segs) for r in fr.final} == tm.trapezoids
    assert fr.cp_max[-1] == 0


def test_list_free_work_definition():
    rng = _rng(21)
    segs = random_noncrossing(12, rng, coord=256)
    tm, tr, _, log = build_trapmap(segs, mode="list-free")
    assert np.array_equal(tr.per_step, log.created + log.location_steps)
    assert np.all(log.location_steps >= 2)


def test_conflict_lists_bruteforce_every_step():
    # verify=True recomputes every live conflict list after each insertion
    for k in range(10):
        rng = _rng(300 + k)
        segs = random_segments(int(rng.integers(2, 17)), rng, coord=128)
        build_trapmap(segs, InsertionOrder.of(rng.permutation(len(segs))), verify=True)
