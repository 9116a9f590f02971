import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st


def ordered_stack_probability(weights, order):
    """Sequential rate-proportional pick, written out with Fractions."""
    left = sum(weights)
    prob = Fraction(1)
    for i in order:
        prob *= Fraction(weights[i]) / left
        left -= weights[i]
    return prob


def oracle_hit_rate(weights, c):
    """Stationary LRU hit rate from every ordered top-C prefix (rational)."""
    weights = [Fraction(w) for w in weights]
    total = sum(weights)
    weights = [w / total for w in weights]
    n = len(weights)
    out = Fraction(0)
    for prefix in itertools.permutations(range(n), c):
        out += ordered_stack_probability(weights, prefix) * sum(weights[i] for i in prefix)
    return out


def oracle_occupancy(weights, c):
    weights = [Fraction(w) for w in weights]
    total = sum(weights)
    weights = [w / total for w in weights]
    n = len(weights)
    pi = [Fraction(0)] * n
    for prefix in itertools.permutations(range(n), c):
        pr = ordered_stack_probability(weights, prefix)
        for i in prefix:
            pi[i] += pr
    return pi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def popularity_strategy(min_n=2, max_n=7):
    """Interior simplex points with a bounded spread (ratios under 1e3)."""
    return st.lists(st.floats(0.001, 1.0), min_size=min_n, max_size=max_n).map(
        lambda w: np.asarray(w) / np.sum(w))
