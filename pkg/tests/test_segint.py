import math

import numpy as np
import pytest

from riclab.concentration import harmonic
from riclab.geometry import Segment
from riclab.rng import InsertionOrder
from riclab.segint import (SegintTailResult, bound_rows, conflict_size_profile, point_location_experiment,
                           random_queries, segint_tail_experiment, segment_generator)
from riclab.trapmap import build_trapmap, grid_segments, random_noncrossing


def test_generators_deterministic():
    a = segment_generator("random-noncrossing", 40, 3)
    assert [s.coords() for s in a] == [s.coords() for s in segment_generator("random-noncrossing", 40, 3)]
    assert len(segment_generator("grid", k=5)) == 10
    assert len(segment_generator("adversary", 16)) == 16
    with pytest.raises(ValueError):
        segment_generator("grid", k=0)
    with pytest.raises(ValueError):
        segment_generator("nope", 4)


def test_single_segment_constant_work():
    r = segint_tail_experiment([Segment.of(0, 0, 3, 1)], 10, 0)
    assert r.stats.var_total == 0 and r.n == 1
    assert r.stats.tail([r.stats.mean_total + 1])[0] == 0


def test_kernel_and_reference_agree_on_totals():
    segs = segment_generator("random-noncrossing", 60, 1)
    fast = segint_tail_experiment(segs, 30, 5)
    ref = []
    from riclab.rng import make_rng, trial_seed
    for t in range(30):
        order = InsertionOrder.of(make_rng(trial_seed(5, t)).permutation(60))
        ref.append(build_trapmap(segs, order)[1].total)
    assert np.array_equal(fast.stats.totals, np.array(ref, dtype=float))


def test_modes_on_crossing_input():
    segs = grid_segments(5)
    a = segint_tail_experiment(segs, 8, 2)
    b = segint_tail_experiment(segs, 8, 2, mode="list-free")
    assert a.m == b.m == 25
    assert a.mode == "conflict-graph" and b.mode == "list-free"
    assert [row.name for row in b.bounds] == ["list-free-tail"]


def test_bound_rows_regimes():
    r = segint_tail_experiment("random-noncrossing", 20, 0, n=64)
    names = {row.name: row for row in r.bounds}
    assert names["noncrossing-tail"].applicable and not names["crossing-tail"].applicable
    assert names["noncrossing-tail"].bound == pytest.approx(64 ** -1.0)
    assert names["crossing-tail"].holds          # vacuous off-regime
    assert bound_rows(r.stats, 1, 0, "conflict-graph") == []


def test_mean_work_scale_small():
    r = segint_tail_experiment("random-noncrossing", 50, 0, n=256)
    assert r.mean_ratio <= 10


def test_point_location_harmonic_bound_small():
    segs = segment_generator("random-noncrossing", 64, 4)
    qs = random_queries(segs, 4, np.random.default_rng(0))
    r = point_location_experiment(segs, qs, 400, 1)
    assert r.mean_changes <= r.harmonic_bound
    assert r.harmonic_bound == pytest.approx(4 * harmonic(64))


def test_point_location_crossing_input_reference_route():
    segs = grid_segments(3)
    qs = [(1, 1)]
    qs = random_queries(segs, 2, np.random.default_rng(1))
    r = point_location_experiment(segs, qs, 20, 0)
    assert r.mean_changes > 0


def test_conflict_profile_shape():
    segs = segment_generator("random-noncrossing", 256, 2)
    p = conflict_size_profile(segs, 20, 0, [8, 32, 128, 256])
    assert np.all(p.max_sizes[:, -1] == 0)
    assert p.measured_c <= 8
    assert np.all(np.diff(p.max_sizes.mean(axis=0)) <= 0)
