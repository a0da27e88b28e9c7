import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riclab.concentration import harmonic
from riclab.martingale import exact_doob, martingale_property_check
from riclab.quicksort import (charge_counts, expected_charge, per_element_cost, quicksort_tail_exhaustive,
                              quicksort_tail_experiment, run_quicksort, total_comparisons)
from riclab.rng import InsertionOrder, all_permutations, make_rng, random_permutation, trial_seed


def test_tiny_cases():
    out, qt, tr = run_quicksort([7], InsertionOrder((0,)))
    assert out == [7] and tr.total == 0 and qt.indicators.sum() == 0
    out, qt, tr = run_quicksort([5, 1], InsertionOrder((0, 1)), tracked=1)
    assert out == [1, 5] and tr.total == 1 and qt.charges == 1


def test_duplicates_rejected():
    with pytest.raises(ValueError):
        run_quicksort([1, 1, 2], InsertionOrder((0, 1, 2)))


@pytest.mark.parametrize("circular", [False, True])
@given(data=st.data())
def test_reference_matches_kernel(circular, data):
    n = data.draw(st.integers(1, 40))
    keys = data.draw(st.lists(st.integers(-10 ** 6, 10 ** 6), min_size=n, max_size=n, unique=True))
    order = InsertionOrder.of(data.draw(st.permutations(list(range(n)))))
    out, qt, tr = run_quicksort(keys, order, tracked=0, circular=circular)
    assert out == sorted(keys)
    ranks = np.argsort(np.argsort(keys))
    pos = ranks[order.as_array()]
    per_step, per_elem = charge_counts(pos, circular)
    assert np.array_equal(per_step, tr.per_step)
    # double counting: comparisons by step equal charges by element
    assert per_step.sum() == per_elem.sum()
    assert per_elem[ranks[0]] == qt.charges


def test_exact_expectation_n8_circular():
    # the sum over j >= 2 of 2/j, for every tracked element
    target = sum(Fraction(2, j) for j in range(2, 9))
    assert expected_charge(8) == target
    for x in (0, 3, 7):
        total = sum(per_element_cost(p, x, True) for p in all_permutations(8))
        assert Fraction(total, 40320) == target


def test_plain_convention_at_most_circular():
    for x in range(6):
        total = sum(per_element_cost(p, x, False) for p in all_permutations(6))
        assert Fraction(total, 720) <= expected_charge(6)


def test_doob_y0_equals_expected_charge():
    y = exact_doob(lambda o: per_element_cost(o, 4, True), 8, random_permutation(8, 3)).y
    assert y[0] == expected_charge(8)
    assert martingale_property_check(lambda o: per_element_cost(o, 1, True), 7)


def test_indicator_rate_two_over_j():
    n, trials = 32, 100_000
    hits = np.zeros(n)
    from riclab.quicksort import _indicator_row
    rng = make_rng(trial_seed(5, 0))
    for _ in range(trials):
        hits += _indicator_row(rng.permutation(n), 11, True)
    for j in range(2, n + 1):
        p = 2 / j
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(hits[j - 1] / trials - p) <= 4 * se


def test_tail_c_zero_vacuous():
    r = quicksort_tail_experiment(64, 20, 0, 0.0)
    assert r.pair_tail <= 1 and r.freedman == 2.0


def test_exhaustive_tail_matches_enumeration():
    r = quicksort_tail_exhaustive(6, 0.3)
    counts = [0] * 7
    for p in all_permutations(6):
        for x in range(6):
            counts[per_element_cost(p, x, True)] += 1
    assert list(r.cost_hist) == counts
    k0 = math.ceil(r.threshold - 1e-12)
    assert r.pair_tail == pytest.approx(sum(counts[k0:]) / (720 * 6), rel=1e-12)


def test_tail_monte_carlo_mean():
    r = quicksort_tail_experiment(256, 2000, 1, 1.0)
    assert abs(r.mean_per_element - (2 * harmonic(256) - 2)) <= 3 * r.se_per_element
    assert r.pair_tail <= r.freedman


def test_total_comparisons_mean_n4():
    tot = sum(total_comparisons(p) for p in all_permutations(4))
    assert Fraction(tot, 24) == Fraction(29, 6)
