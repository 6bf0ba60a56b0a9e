import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXAMPLE_REQUIRED, CountingOracle, superset_oracle
from wdd.core import CachedOracle, Element, WeightedList
from wdd.probdd import (
    EPSILON,
    get_nodes_to_remove,
    prefix_gains,
    probdd,
    select_probdd_prefix,
    should_terminate,
    update_probabilities,
    wprobdd,
)


def uniform(lst, p):
    return {e.id: p for e in lst}


def brute_force_best_gain(weights, probs):
    """Largest sum(w) * prod(1 - p) over prefixes of the w*(1-p) ordering, recomputed per prefix."""
    w = np.asarray(weights, dtype=float)
    p = np.asarray(probs, dtype=float)
    order = np.argsort(-(w * (1 - p)), kind="stable")
    return max([0.0] + [w[order[:m]].sum() * np.prod(1 - p[order[:m]]) for m in range(1, len(w) + 1)])


def gain_of(selection, probs):
    return sum(e.weight for e in selection) * math.prod(1 - probs[e.id] for e in selection)


def test_probdd_prefers_larger_prefix_on_exact_tie():
    lst = WeightedList.from_weights([1] * 8)
    gains = [m * 0.8 ** m for m in range(1, 9)]
    assert math.isclose(gains[3], gains[4])
    assert len(select_probdd_prefix(lst, uniform(lst, 0.2))) == 5


def test_example_weighted_selection(example):
    chosen = get_nodes_to_remove(example, uniform(example, 0.2))
    assert chosen.ids == (7, 6)
    assert gain_of(chosen, uniform(example, 0.2)) == pytest.approx(26.24)


def test_prefix_gain_table_of_example(example):
    probs = uniform(example, 0.2)
    ordered = sorted(example, key=lambda e: -e.weight)
    gains = [g.gain for g in prefix_gains(ordered, probs)]
    assert gains[:3] == pytest.approx([20.0, 26.24, 25.088])


def test_single_element_selection():
    lst = WeightedList.from_weights([10])
    chosen = get_nodes_to_remove(lst, {0: 0.3})
    assert chosen.ids == (0,)
    assert gain_of(chosen, {0: 0.3}) == pytest.approx(7.0)


def test_no_positive_gain_gives_empty_selection():
    lst = WeightedList.from_weights([0, 0, 3])
    assert get_nodes_to_remove(lst, {0: 0.2, 1: 0.2, 2: 1.0}) == ()


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 50), st.floats(0.0, 0.999)), min_size=1, max_size=50))
def test_selection_matches_brute_force(pairs):
    weights, ps = zip(*pairs)
    lst = WeightedList.from_weights(weights)
    probs = dict(enumerate(ps))
    chosen = get_nodes_to_remove(lst, probs)
    assert gain_of(chosen, probs) == pytest.approx(brute_force_best_gain(weights, ps), rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=40), st.integers(1, 9))
def test_uniform_weights_choose_probdd_size(ps, w):
    lst = WeightedList.from_weights([w] * len(ps))
    probs = dict(enumerate(ps))
    weighted = len(get_nodes_to_remove(lst, probs))
    plain = len(select_probdd_prefix(lst, probs))
    ordered = sorted(ps)
    gains = [m * math.prod(1 - p for p in ordered[:m]) for m in range(1, len(ps) + 1)]
    tied = [m for m, g in enumerate(gains, 1) if math.isclose(g, max(gains), rel_tol=1e-12)]
    if len(tied) == 1:
        assert weighted == plain == tied[0]
    else:
        # exact tie: the weighted scan keeps the first maximum, ProbDD takes the longest
        assert plain == tied[-1]
        assert weighted == tied[0]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 50), st.floats(0.0, 0.99)), min_size=1, max_size=40),
       st.sampled_from([2, 3, 7]))
def test_scaling_weights_keeps_the_selection(pairs, c):
    weights, ps = zip(*pairs)
    probs = dict(enumerate(ps))
    a = get_nodes_to_remove(WeightedList.from_weights(weights), probs)
    b = get_nodes_to_remove(WeightedList.from_weights([c * w for w in weights]), probs)
    assert a.ids == b.ids


def test_rounding_ties_do_not_depend_on_weight_scale():
    probs = {0: 0.0, 1: 0.0, 2: 1 / 3}
    for c in (1, 2, 3, 7):
        assert get_nodes_to_remove(WeightedList.from_weights([c, c, c]), probs).ids == (0, 1)


def test_sort_is_stable_on_equal_keys():
    lst = WeightedList.from_weights([4, 2, 4, 2])
    assert get_nodes_to_remove(lst, uniform(lst, 0.1)).ids == (0, 2, 1, 3)


@pytest.mark.parametrize(
    "ps, expected",
    [((0.2, 0.2), (0.2 / 0.36, 0.2 / 0.36)), ((0.7,), (1.0,)), ((0.5, 0.0), (1.0, 0.0))],
)
def test_bayes_update(ps, expected):
    lst = WeightedList.from_weights([1] * len(ps))
    probs = dict(enumerate(ps))
    probs[99] = 0.3  # outside pre, must not move
    out = update_probabilities(lst, probs)
    for i, want in enumerate(expected):
        assert out[i] == pytest.approx(want, abs=1e-12)
    assert out[99] == 0.3
    assert probs[0] == ps[0]


def test_pair_update_value():
    lst = WeightedList.from_weights([1, 1])
    out = update_probabilities(lst, {0: 0.2, 1: 0.2})
    assert abs(out[0] - 0.5556) < 1e-4
    assert abs(out[0] - 0.2 / 0.36) <= 1e-12


def test_singleton_update_is_exactly_one():
    for p in (1e-9, 0.2, 0.5, 0.999):
        assert update_probabilities(WeightedList.from_weights([1]), {0: p})[0] == 1.0


def test_update_with_all_zero_probabilities_is_rejected():
    with pytest.raises(ValueError):
        update_probabilities(WeightedList.from_weights([1, 1]), {0: 0.0, 1: 0.0})


@pytest.mark.parametrize(
    "probs, weights, expected",
    [({0: 1.0, 1: 1.0}, None, True), ({0: 1.0, 1: 0.4}, None, False), ({}, None, True),
     ({0: 1.0 - EPSILON / 2}, None, True), ({0: 1.0, 1: 0.4}, {0: 3, 1: 0}, True)],
)
def test_should_terminate(probs, weights, expected):
    assert should_terminate(probs, weights) is expected


@pytest.mark.parametrize("algorithm", [probdd, wprobdd])
def test_all_settled_at_entry_costs_nothing(algorithm):
    lst = WeightedList.from_weights([1, 2, 3])
    oracle = CountingOracle(lambda c: True)
    assert algorithm(lst, oracle, initial_probs={0: 1.0, 1: 1.0, 2: 1.0}) == lst
    assert oracle.calls == 0


@pytest.mark.parametrize("algorithm", [probdd, wprobdd])
def test_singleton_that_must_stay(algorithm):
    lst = WeightedList.from_weights([4])
    oracle = CountingOracle(superset_oracle({0}))
    history = []
    assert algorithm(lst, oracle, 0.5, history=history).ids == (0,)
    assert oracle.calls == 1 and history[-1] == {0: 1.0}


@pytest.mark.parametrize("algorithm", [probdd, wprobdd])
def test_everything_removable(algorithm):
    lst = WeightedList.from_weights([3, 1, 4, 1, 5, 9, 2, 6])
    assert algorithm(lst, lambda c: True) == ()


def test_heavy_element_is_tried_first():
    lst = WeightedList.from_weights([100, 1])
    seen = []

    def oracle(c):
        seen.append(c.ids)
        return 1 in c.ids

    assert wprobdd(lst, oracle).ids == (1,)
    assert seen[0] == (1,)


@pytest.mark.parametrize("algorithm, tests", [(probdd, 12), (wprobdd, 11)])
def test_example_result_and_frozen_test_counts(example, algorithm, tests):
    oracle = CachedOracle(superset_oracle(EXAMPLE_REQUIRED))
    assert algorithm(example, oracle, 0.2).ids == (1, 3, 6, 7, 8)
    assert oracle.tests == tests


@pytest.mark.parametrize("p0", [0.0, 1.0, -0.1, 1.5])
@pytest.mark.parametrize("algorithm", [probdd, wprobdd])
def test_p0_must_be_open_unit_interval(algorithm, p0):
    with pytest.raises(ValueError):
        algorithm(WeightedList.from_weights([1]), lambda c: True, p0)


@pytest.mark.parametrize("algorithm", [probdd, wprobdd])
def test_probabilities_never_decrease(algorithm):
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randint(1, 40)
        lst = WeightedList.from_weights([rng.randint(0, 9) for _ in range(n)])
        required = set(rng.sample(range(n), rng.randint(0, n)))
        history = []
        result = algorithm(lst, superset_oracle(required), rng.uniform(0.05, 0.6), history=history)
        assert required.issubset(result.ids)
        for before, after in zip(history, history[1:]):
            for k, p in after.items():
                assert p >= before.get(k, 0.0)


@pytest.mark.parametrize("algorithm", [probdd, wprobdd])
def test_random_tie_breaking_still_reaches_result(example, algorithm):
    for seed in range(10):
        out = algorithm(example, superset_oracle(EXAMPLE_REQUIRED), 0.2, rng=random.Random(seed))
        assert out.ids == (1, 3, 6, 7, 8)


def test_weightless_elements_are_never_selected():
    lst = WeightedList([Element(0, 0), Element(1, 5)])
    assert wprobdd(lst, lambda c: True).ids == (0,)
