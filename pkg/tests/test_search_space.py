import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lassobo.gp import ContractError
from lassobo.search_space import (
    BEST_SO_FAR,
    RANDOM,
    SearchSpaceSpec,
    build_search_space,
    mt_schedule,
)


@pytest.mark.parametrize("t,want", [(1, 1), (8, 2), (9, 3), (27, 3), (28, 4), (300, 7)])
def test_mt_schedule_values(t, want):
    assert mt_schedule(t, 3) == want


def test_mt_schedule_square_root():
    assert [mt_schedule(t, 2) for t in (1, 2, 4, 5, 9, 10)] == [1, 2, 2, 3, 3, 4]


@given(t=st.integers(1, 10**6), n=st.integers(2, 6))
def test_mt_schedule_boundaries(t, n):
    m = mt_schedule(t, n)
    assert (m - 1) ** n < t <= m ** n
    nxt = mt_schedule(t + 1, n)
    assert m <= nxt <= m + 1


def test_first_iteration_shape():
    best = np.array([0.1, 0.2, 0.3])
    spec = build_search_space([0], best, t=1, n=3, rng=0)
    assert len(spec.imputations) == 2
    assert all(imp.shape == (2,) for imp in spec.imputations)
    assert np.array_equal(spec.imputations[0], best[[1, 2]])
    assert spec.source_tags == (BEST_SO_FAR, RANDOM)


def test_all_important_gives_single_empty_imputation():
    spec = build_search_space([0, 1, 2], np.full(3, 0.5), t=50, rng=0)
    assert len(spec.imputations) == 1 and spec.imputations[0].size == 0
    assert spec.source_tags == (BEST_SO_FAR,)


def test_t27_has_four_imputations():
    spec = build_search_space([1], np.full(5, 0.5), t=27, n=3, rng=0)
    assert len(spec) == 4 and spec.source_tags.count(BEST_SO_FAR) == 1


def test_assemble_point_scatter_and_roundtrip():
    spec = SearchSpaceSpec(4, np.array([1, 3]), (np.array([0.2, 0.9]),), (BEST_SO_FAR,))
    x = spec.assemble_point(0, [0.5, 0.7])
    assert x.tolist() == [0.2, 0.5, 0.9, 0.7]
    assert x[spec.important].tolist() == [0.5, 0.7]
    assert x[spec.unimportant].tolist() == [0.2, 0.9]


def test_assemble_zero_v_differs_only_on_important():
    rng = np.random.default_rng(0)
    best = rng.random(6)
    spec = build_search_space([0, 4], best, t=3, rng=rng)
    x = spec.assemble_point(0, np.zeros(2))
    assert np.array_equal(x[spec.unimportant], best[spec.unimportant])
    assert np.all(x[spec.important] == 0)


def test_incumbent_reachable_and_points_in_cube():
    rng = np.random.default_rng(1)
    best = rng.random(10)
    for t in (1, 5, 64):
        spec = build_search_space([2, 3, 7], best, t=t, rng=rng)
        assert np.array_equal(spec.assemble_point(0, best[spec.important]), best)
        for k in range(len(spec)):
            x = spec.assemble_point(k, rng.random(3))
            assert np.all((x >= 0) & (x <= 1))


def test_random_imputations_are_uniform():
    best = np.full(6, 0.5)
    spec = build_search_space([0], best, t=10**12, n=3, rng=7)
    # M_t = 10^4 random imputations
    Z = np.array(spec.imputations[1:])
    assert Z.shape == (10**4, 5)
    assert np.all(np.abs(Z.mean(axis=0) - 0.5) < 0.02)


def test_deterministic_given_rng():
    a = build_search_space([1], np.full(4, 0.3), t=9, rng=5)
    b = build_search_space([1], np.full(4, 0.3), t=9, rng=5)
    assert all(np.array_equal(u, v) for u, v in zip(a.imputations, b.imputations))


def test_contract_errors():
    with pytest.raises(ContractError):
        build_search_space([], np.full(3, 0.5), t=1)
    with pytest.raises(ContractError):
        build_search_space([5], np.full(3, 0.5), t=1)
    with pytest.raises(ContractError):
        mt_schedule(0, 3)
    spec = build_search_space([0], np.full(3, 0.5), t=1, rng=0)
    with pytest.raises(ContractError):
        spec.assemble_point(5, [0.1])
    with pytest.raises(ContractError):
        spec.assemble_point(0, [0.1, 0.2])
