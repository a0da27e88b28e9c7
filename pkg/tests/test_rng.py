import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riclab.rng import (InsertionOrder, SizeLimitError, all_permutations, make_rng, random_permutation,
                        trial_seed)


def test_empty_and_singleton():
    assert random_permutation(0, 5).items == ()
    assert random_permutation(1, 5).items == (0,)


def test_frozen_streams():
    # regression values; any change here changes every experiment in the repo
    assert trial_seed(0, 0) == 8668861027912758289
    assert trial_seed(0, 1) == 4881901421217228719
    assert trial_seed(42, 7) == 16176970332176372554
    assert random_permutation(8, 0).items == (2, 4, 3, 6, 5, 0, 1, 7)


def test_trial_streams_differ():
    seeds = {trial_seed(3, t) for t in range(1000)}
    assert len(seeds) == 1000


@pytest.mark.parametrize("n", [3, 4, 5])
def test_uniform_frequencies(n):
    samples = 1000 * math.factorial(n)
    rng = make_rng(trial_seed(11, n))
    counts = Counter(tuple(rng.permutation(n)) for _ in range(samples))
    p = 1 / math.factorial(n)
    sigma = math.sqrt(samples * p * (1 - p))
    assert len(counts) == math.factorial(n)
    assert all(abs(c - samples * p) <= 5 * sigma for c in counts.values())


def test_all_permutations_lexicographic():
    assert [o.items for o in all_permutations(1)] == [(0,)]
    perms = [o.items for o in all_permutations(3)]
    assert len(perms) == 6 and perms[0] == (0, 1, 2) and perms[-1] == (2, 1, 0)
    assert perms == sorted(perms)
    assert len({o.items for o in all_permutations(8)}) == 40320


def test_all_permutations_size_limit():
    with pytest.raises(SizeLimitError):
        next(iter(all_permutations(11)))


def test_rejects_non_permutation():
    with pytest.raises(ValueError):
        InsertionOrder((0, 0, 1))


@given(st.permutations(list(range(9))), st.integers(0, 9), st.integers(0, 9))
def test_prefix_nesting(perm, j, k):
    o = InsertionOrder.of(perm)
    k, j = min(j, k), max(j, k)
    assert o.prefix(j)[:k] == o.prefix(k)
    assert len(o.prefix(j)) == j


@given(st.permutations(list(range(7))))
def test_reverse_is_valid_order(perm):
    o = InsertionOrder.of(perm)
    r = o.reversed()
    assert sorted(r.items) == list(range(7))
    assert r.items == tuple(reversed(o.items))
    assert np.array_equal(o.rank()[o.as_array()], np.arange(7))
