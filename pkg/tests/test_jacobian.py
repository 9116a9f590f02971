import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lru_radial.core import ModelParams, validate_popularity
from lru_radial.errors import (
    BadLength,
    MOutOfRange,
    NonPositiveRate,
    NotAPermutation,
    ProbOutOfRange,
    ThetaOutOfRange,
    TooManyItems,
)
from lru_radial.exact import brute_force_occupancy
from lru_radial.jacobian import (
    RateVector,
    master_identity_derivative,
    occupancy_from_rates,
    occupancy_jacobian,
    ordering_probability,
    poisson_binomial_pmf,
    search_negative_minor,
    sensitivity_G,
    sensitivity_form,
    sensitivity_matrix,
)
from lru_radial.kernel import radial_derivative


def enumerate_count_pmf(probs, m):
    total = 0.0
    for outcome in itertools.product([0, 1], repeat=len(probs)):
        if sum(outcome) == m:
            total += math.prod(p if o else 1 - p for p, o in zip(probs, outcome))
    return total


def test_poisson_binomial_small():
    assert poisson_binomial_pmf([0.1, 0.2], 1) == pytest.approx(0.26, abs=1e-16)
    assert poisson_binomial_pmf([0.1, 0.2], 2) == pytest.approx(0.02, abs=1e-16)
    assert poisson_binomial_pmf([], 0) == 1.0
    with pytest.raises(MOutOfRange):
        poisson_binomial_pmf([0.5], 2)
    with pytest.raises(ProbOutOfRange):
        poisson_binomial_pmf([1.5], 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=0, max_size=8), st.data())
def test_poisson_binomial_matches_enumeration(probs, data):
    m = data.draw(st.integers(0, len(probs)))
    assert poisson_binomial_pmf(probs, m) == pytest.approx(enumerate_count_pmf(probs, m), abs=1e-14)


def test_two_equal_rates():
    params = ModelParams(2, 1)
    assert sensitivity_G([1.0, 1.0], params, 0, 1) == pytest.approx(0.25, rel=1e-12)
    jac = occupancy_jacobian([1.0, 1.0], params).jacobian
    assert np.allclose(jac, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-12)


def test_single_slot_closed_form(rng):
    # C = 1: pi_k = lambda_k / S, so G_ik = 1 / S**2
    lam = rng.uniform(0.1, 2.0, size=5)
    g = sensitivity_matrix(lam, ModelParams(5, 1)).g_values
    off = ~np.eye(5, dtype=bool)
    assert np.allclose(g[off], 1 / lam.sum() ** 2, rtol=1e-12)


def test_symmetry_is_exact(rng):
    lam = rng.uniform(0.1, 1.0, size=6)
    params = ModelParams(6, 3)
    g = sensitivity_matrix(lam, params).g_values
    assert np.array_equal(g, g.T)
    assert sensitivity_G(lam, params, 4, 1) == sensitivity_G(lam, params, 1, 4)


def test_jacobian_against_enumerated_occupancy(rng):
    # independent route: N! enumeration of pi, central differences in the raw rates
    lam = rng.uniform(0.1, 1.0, size=5)
    params = ModelParams(5, 2)
    jac = occupancy_jacobian(lam, params).jacobian
    h = 1e-6
    for i in range(5):
        e = np.zeros(5)
        e[i] = h
        hi = brute_force_occupancy((lam + e) / (lam + e).sum(), params).pi
        lo = brute_force_occupancy((lam - e) / (lam - e).sum(), params).pi
        assert np.allclose((hi - lo) / (2 * h), jac[i], atol=1e-8)
    assert np.allclose(jac.sum(axis=1), 0.0, atol=1e-12)
    assert np.all(jac[~np.eye(5, dtype=bool)] < 0)


def test_occupancy_is_scale_free():
    lam = np.array([3.0, 1.0, 0.5, 0.5])
    params = ModelParams(4, 2)
    assert np.allclose(occupancy_from_rates(lam, params), occupancy_from_rates(7 * lam, params), atol=1e-15)


def test_ordering_probability():
    assert ordering_probability([0.5, 0.3, 0.2], [0, 1, 2]) == pytest.approx(0.3, abs=1e-16)
    assert ordering_probability([2.0, 1.0], [0, 1]) == pytest.approx(2 / 3, abs=1e-16)
    total = sum(ordering_probability([0.4, 1.0, 2.5, 0.1], s) for s in itertools.permutations(range(4)))
    assert total == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(NotAPermutation):
        ordering_probability([0.5, 0.5], [0, 0])


def test_master_identity_two_items():
    q = validate_popularity([0.7, 0.3])
    rep = master_identity_derivative(q, 0.5, ModelParams(2, 1))
    assert rep.t1 == pytest.approx(0.04, abs=1e-13)
    assert rep.t2 == pytest.approx(0.04, abs=1e-11)
    assert rep.derivative == pytest.approx(0.08, abs=1e-11)


def test_master_identity_matches_kernel(rng):
    for n in range(3, 7):
        q = validate_popularity(rng.dirichlet(np.ones(n)))
        for c in range(1, n):
            params = ModelParams(n, c)
            theta = float(rng.uniform(0.05, 1.0))
            rep = master_identity_derivative(q, theta, params)
            assert rep.t1 >= 0 and rep.t2 > 0
            assert rep.derivative == pytest.approx(radial_derivative(q, theta, params).derivative, abs=1e-9)


def test_master_identity_at_uniform_and_bad_theta():
    u = np.full(4, 0.25)
    rep = master_identity_derivative(u, 0.5, ModelParams(4, 2))
    assert rep.derivative == 0.0
    with pytest.raises(ThetaOutOfRange):
        master_identity_derivative(u, 0.0, ModelParams(4, 2))


def test_rate_validation():
    with pytest.raises(NonPositiveRate):
        RateVector([1.0, 0.0])
    with pytest.raises(BadLength):
        sensitivity_matrix([1.0, 1.0, 1.0], ModelParams(4, 2))
    with pytest.raises(TooManyItems):
        sensitivity_matrix(np.ones(13), ModelParams(13, 2))
    with pytest.raises(MOutOfRange):
        sensitivity_G([1.0, 2.0, 3.0], ModelParams(3, 1), 1, 1)


def test_negative_minor_witness_is_reproducible():
    witness = search_negative_minor(np.random.default_rng(0))
    assert witness is not None and witness.value < 0
    again = sensitivity_form(witness.rates, witness.direction,
                             ModelParams(len(witness.rates), witness.capacity))
    assert again == witness.value
    assert abs(witness.direction.sum()) < 1e-12
