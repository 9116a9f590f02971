import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lru_radial.core import ModelParams, PopularityVector, ray_point, validate_popularity
from lru_radial.errors import BadLength, TooManyItems, TooManyItemsForOracle
from lru_radial.exact import (
    brute_force_hit_rate,
    brute_force_occupancy,
    brute_force_search_cost,
    expected_cost_functional,
    hit_rate_exact,
    hit_rate_per_item,
    hit_rate_residual,
    occupancy_per_item,
    ordering_law,
    search_cost_distribution,
    subset_terms,
)

from conftest import oracle_hit_rate, oracle_occupancy, popularity_strategy

P3 = [0.5, 0.3, 0.2]


def test_two_items_single_slot():
    # C = 1 caches the last request: H = p1**2 + p2**2
    h = hit_rate_residual([0.7, 0.3], ModelParams(2, 1))
    assert h.value == pytest.approx(0.58, abs=1e-15)
    assert h.method == "residual" and not h.trivial


def test_three_items_against_rational_oracle():
    expect = oracle_hit_rate([Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)], 2)
    assert expect == Fraction(1007, 1400)
    params = ModelParams(3, 2)
    assert hit_rate_residual(P3, params).value == pytest.approx(float(expect), abs=1e-15)
    assert hit_rate_per_item(P3, params).value == pytest.approx(float(expect), abs=1e-15)
    assert brute_force_hit_rate(P3, params).value == pytest.approx(float(expect), abs=1e-15)


def test_occupancy_against_rational_oracle():
    expect = [float(x) for x in oracle_occupancy([Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)], 2)]
    assert np.allclose(expect, [47 / 56, 27 / 40, 17 / 35], atol=1e-16)
    prof = occupancy_per_item(P3, ModelParams(3, 2))
    assert np.allclose(prof.pi, expect, rtol=0, atol=1e-14)
    assert np.allclose(brute_force_occupancy(P3, ModelParams(3, 2)).pi, expect, rtol=0, atol=1e-14)
    assert prof.pi.sum() == pytest.approx(2.0, abs=1e-14)


def test_full_capacity_is_trivial():
    h = hit_rate_residual(P3, ModelParams(3, 3))
    assert h.value == 1.0 and h.trivial
    assert np.all(occupancy_per_item(P3, ModelParams(3, 3)).pi == 1.0)
    assert hit_rate_exact(P3, ModelParams(3, 3)) == 1


def test_length_mismatch_and_caps():
    with pytest.raises(BadLength):
        hit_rate_residual(P3, ModelParams(4, 2))
    big = PopularityVector.uniform(10)
    with pytest.raises(TooManyItemsForOracle):
        brute_force_hit_rate(big, ModelParams(10, 3))
    with pytest.raises(TooManyItems):
        hit_rate_residual(big, ModelParams(10, 3), max_items=8)
    with pytest.raises(TooManyItems):
        hit_rate_exact(PopularityVector.uniform(13), ModelParams(13, 2))


def test_rational_mode_matches_oracle_exactly():
    # dyadic inputs are represented exactly, so the two rationals must coincide
    w = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)]
    p = [float(x) for x in w]
    for c in range(1, 4):
        assert hit_rate_exact(p, ModelParams(4, c)) == oracle_hit_rate(w, c)


@pytest.mark.parametrize("n", [2, 5, 9, 12])
def test_uniform_rate(n):
    u = PopularityVector.uniform(n)
    for c in range(1, n):
        assert hit_rate_residual(u, ModelParams(n, c)).value == pytest.approx(c / n, abs=1e-12)


def test_search_cost_small_case():
    dist = search_cost_distribution([0.7, 0.3])
    assert np.allclose(dist.cdf, [0.58, 1.0], atol=1e-15)
    assert np.allclose(dist.pmf, [0.58, 0.42], atol=1e-15)
    assert dist.mean() == pytest.approx(1.42, abs=1e-15)
    assert expected_cost_functional([0.7, 0.3], [1.0, 2.0]) == pytest.approx(1.42, abs=1e-15)


@pytest.mark.parametrize("n", [2, 4, 7])
def test_uniform_search_cost_is_uniform(n):
    dist = search_cost_distribution(PopularityVector.uniform(n))
    assert np.allclose(dist.pmf, 1 / n, atol=1e-13)
    assert dist.mean() == pytest.approx((n + 1) / 2, abs=1e-12)


def test_search_cost_matches_enumeration(rng):
    for n in range(2, 8):
        p = validate_popularity(rng.dirichlet(np.ones(n)))
        a, b = search_cost_distribution(p), brute_force_search_cost(p)
        assert np.allclose(a.cdf, b.cdf, rtol=0, atol=1e-12)


def test_second_moment_through_tail_sums(rng):
    p = validate_popularity(rng.dirichlet(np.ones(6)))
    dist = search_cost_distribution(p)
    d = np.arange(1, 7)
    direct = float(dist.pmf @ d ** 2)
    assert expected_cost_functional(p, d ** 2, dist=dist) == pytest.approx(direct, abs=1e-12)


def test_ordering_law_sums_to_one():
    perms, prob = ordering_law(np.array([3.0, 2.0, 1.0, 0.5]))
    assert perms.shape == (24, 4)
    assert prob.sum() == pytest.approx(1.0, abs=1e-15)
    # first pick proportional to rate
    first = np.array([prob[perms[:, 0] == k].sum() for k in range(4)])
    assert np.allclose(first, np.array([3.0, 2.0, 1.0, 0.5]) / 6.5, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(popularity_strategy(2, 6), st.data())
def test_residual_matches_fraction_oracle(w, data):
    n = len(w)
    c = data.draw(st.integers(1, n - 1))
    params = ModelParams(n, c)
    p = validate_popularity(w)
    expect = float(oracle_hit_rate([Fraction(float(x)) for x in p.probs], c))
    assert hit_rate_residual(p, params).value == pytest.approx(expect, abs=1e-12)
    assert occupancy_per_item(p, params).pi.sum() == pytest.approx(c, abs=1e-11)


@settings(max_examples=40, deadline=None)
@given(popularity_strategy(2, 9))
def test_hit_rate_monotone_in_capacity_and_above_uniform(w):
    p = validate_popularity(w)
    dist = search_cost_distribution(p)
    assert np.all(np.diff(dist.cdf) >= -1e-15)
    n = p.n
    # a popular-first cache never does worse than uniform
    assert np.all(dist.cdf[:-1] >= np.arange(1, n) / n - 1e-12)


@settings(max_examples=30, deadline=None)
@given(popularity_strategy(3, 8), st.data())
def test_more_popular_items_are_cached_more_often(w, data):
    p = validate_popularity(w)
    c = data.draw(st.integers(1, p.n - 1))
    pi = occupancy_per_item(p, ModelParams(p.n, c)).pi
    order = np.argsort(p.probs)
    assert np.all(np.diff(pi[order]) >= -1e-12)


def test_along_a_ray_the_law_improves():
    q = validate_popularity([0.6, 0.25, 0.1, 0.05])
    lo = search_cost_distribution(ray_point(q, 0.3)).cdf
    hi = search_cost_distribution(ray_point(q, 0.8)).cdf
    assert np.all(hi[:-1] > lo[:-1])
    assert math.isclose(hi[-1], 1.0) and math.isclose(lo[-1], 1.0)


def test_subset_terms():
    p = validate_popularity([0.5, 0.3, 0.2])
    terms = list(subset_terms(p))
    assert [t.mask for t in terms] == list(range(1, 8))
    for t in terms:
        members = [i for i in range(3) if t.mask >> i & 1]
        assert t.cardinality == len(members)
        assert t.subset_mass == pytest.approx(sum(p.probs[members]), abs=1e-12)
        assert 0 < t.subset_mass <= 1 + 1e-15
    assert [t.mask for t in subset_terms(p, min_size=2)] == [3, 5, 6, 7]
