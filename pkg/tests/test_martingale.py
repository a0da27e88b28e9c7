from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riclab.darts import dart_cost
from riclab.martingale import (TrialStats, WorkTrace, check_martingale_tree, doob_tree, exact_doob,
                               martingale_property_check, trace_aggregate)
from riclab.quicksort import per_element_cost, total_comparisons
from riclab.rng import InsertionOrder, SizeLimitError, all_permutations, random_permutation

# mean comparisons of plain quicksort on 4 keys: 2 (n+1) H_n - 4n at n = 4
QS4_MEAN = Fraction(29, 6)


def test_work_trace_invariants():
    tr = WorkTrace(np.array([3, 0, 4]))
    assert tr.total == 7 and tr.max_step == 4 and tr.sq_sum == 25
    with pytest.raises(ValueError):
        WorkTrace(np.array([1, -1]))


def test_doob_trivial_cases():
    assert exact_doob(lambda o: 5, 1, InsertionOrder((0,))).y == [5, 5]
    y = exact_doob(lambda o: 7, 4, InsertionOrder((1, 3, 0, 2))).y
    assert y == [7] * 5


def test_doob_quicksort_frozen():
    o = InsertionOrder((2, 0, 3, 1))
    y = exact_doob(total_comparisons, 4, o).y
    assert y[0] == QS4_MEAN
    assert y[-1] == total_comparisons(o)
    assert y == [QS4_MEAN, 4, 4, 4, 4]


def test_doob_y0_order_independent():
    y0 = {exact_doob(total_comparisons, 5, random_permutation(5, s)).y[0] for s in range(5)}
    assert len(y0) == 1
    mean = sum(Fraction(total_comparisons(p)) for p in all_permutations(5)) / 120
    assert y0 == {mean}


def test_size_limits():
    with pytest.raises(SizeLimitError):
        exact_doob(lambda o: 0, 9, random_permutation(9, 0))
    with pytest.raises(SizeLimitError):
        martingale_property_check(lambda o: 0, 8)


def test_property_check_positive_and_negative():
    assert martingale_property_check(lambda o: 1, 4)
    cost = lambda o: per_element_cost(o, 2, circular=True)
    assert martingale_property_check(cost, 5)
    tree = doob_tree(cost, 5)
    node = (1, 3)
    tree[node] += 1
    assert not check_martingale_tree(tree, 5)


def test_dart_cost_martingale():
    assert martingale_property_check(dart_cost, 6)


def test_aggregate_hand_values():
    s = trace_aggregate([WorkTrace(np.array([1.0, 1.0])), WorkTrace(np.array([1.0, 3.0]))])
    assert s.mean_total == 3 and s.var_total == 1
    assert np.allclose(s.mean_step, [1, 2]) and np.allclose(s.mean_step_sq, [1, 5])
    single = trace_aggregate([WorkTrace(np.array([2.0, 5.0]))])
    assert single.mean_total == 7 and single.var_total == 0
    with pytest.raises(ValueError):
        trace_aggregate([])
    with pytest.raises(ValueError):
        trace_aggregate([WorkTrace(np.ones(2)), WorkTrace(np.ones(3))])


traces = st.lists(st.lists(st.integers(0, 20), min_size=4, max_size=4), min_size=1, max_size=12)


@given(traces)
def test_linearity_and_shape(rows):
    s = trace_aggregate([WorkTrace(np.array(r, dtype=float)) for r in rows])
    assert s.mean_total == pytest.approx(s.mean_step.sum(), rel=1e-12, abs=1e-12)
    q = s.quantiles([0.1, 0.5, 0.9])
    assert q == sorted(q)
    t = s.tail([0, 5, 10, 40, 80])
    assert t == sorted(t, reverse=True) and t[0] == 1.0
    assert s.count == len(rows)


@given(traces, traces)
def test_merge_order_independent(a, b):
    sa = trace_aggregate([WorkTrace(np.array(r, dtype=float)) for r in a])
    sb = trace_aggregate([WorkTrace(np.array(r, dtype=float)) for r in b])
    ab, ba = sa.merge(sb), sb.merge(sa)
    whole = trace_aggregate([WorkTrace(np.array(r, dtype=float)) for r in a + b])
    for m in (ab, ba):
        assert m.mean_total == pytest.approx(whole.mean_total, rel=1e-9)
        assert m.var_total == pytest.approx(whole.var_total, rel=1e-9, abs=1e-9)
        assert np.allclose(m.step_sq_sum, whole.step_sq_sum, rtol=1e-9)
        assert m.quantiles([0.5]) == whole.quantiles([0.5])


def test_steps_not_stored():
    s = TrialStats(3, False, np.array([1.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        s.delta_sq_proxy
