"""Exact stationary LRU / move-to-front quantities under independent requests.

Everything here is a finite sum over item subsets (bitmask enumeration) or,
for the brute-force oracle, over all orderings of the items.  Subset masks
use bit ``i`` for item ``i`` (0-based).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterator, Sequence

import numpy as np

from .core import ModelParams, PopularityVector, as_popularity, residual_coefficient
from .errors import BadLength, TooManyItems, TooManyItemsForOracle

#: default largest N accepted by the subset enumerations (2**20 masks)
ENGINE_CAP = 20
#: largest N for exact rational evaluation
EXACT_CAP = 12
#: largest N for the N! permutation oracle
ORACLE_CAP = 9

SANITY_SLACK = 1e-9
PMF_FLOOR = -1e-12


@dataclass(frozen=True)
class SubsetTerm:
    """One nonempty subset ``R`` of the items: its bitmask, ``p_R`` and ``|R|``."""

    mask: int
    subset_mass: float
    cardinality: int


@dataclass(frozen=True)
class HitRateResult:
    value: float
    capacity: int
    method: str  # "residual", "pair_square", "brute_force" or "per_item"
    trivial: bool = False  # set for C = N, where the hit rate is identically 1


@dataclass(frozen=True)
class OccupancyProfile:
    pi: np.ndarray
    capacity: int


@dataclass(frozen=True)
class SearchCostDistribution:
    """Law of the stationary stack depth D; ``cdf[c-1] = P(D <= c)``."""

    cdf: np.ndarray

    @property
    def pmf(self) -> np.ndarray:
        pmf = np.diff(self.cdf, prepend=0.0)
        if pmf.min() < PMF_FLOOR:
            raise ArithmeticError(f"search-cost pmf has entry {pmf.min()!r} < 0")
        return np.clip(pmf, 0.0, None)

    @property
    def n(self) -> int:
        return len(self.cdf)

    def miss_probabilities(self) -> np.ndarray:
        """``P(D > c)`` for ``c = 1..N-1``."""
        return 1.0 - self.cdf[:-1]

    def mean(self) -> float:
        return 1.0 + math.fsum(self.miss_probabilities().tolist())


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise TooManyItems(f"N = {n} exceeds the enumeration cap of {cap}")


def subset_tables(probs: np.ndarray):
    """Per-mask subset mass, sum of squares and cardinality.

    Built by doubling: masks with the top bit set are the previous table
    shifted by that item's probability.
    """
    mass = np.zeros(1)
    sq = np.zeros(1)
    card = np.zeros(1, dtype=np.int64)
    for x in probs:
        mass = np.concatenate([mass, mass + x])
        sq = np.concatenate([sq, sq + x * x])
        card = np.concatenate([card, card + 1])
    return mass, sq, card


def subset_terms(p, *, min_size: int = 1, max_items: int = ENGINE_CAP) -> Iterator[SubsetTerm]:
    """Nonempty subsets with at least ``min_size`` members, in mask order."""
    p = as_popularity(p)
    _check_cap(p.n, max_items)
    mass, _, card = subset_tables(p.probs)
    for mask in np.flatnonzero(card >= max(min_size, 1)):
        yield SubsetTerm(int(mask), float(mass[mask]), int(card[mask]))


@lru_cache(maxsize=32)
def _cardinality_order(n: int):
    """Masks sorted by popcount, plus the slice boundaries per popcount."""
    card = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        card = np.concatenate([card, card + 1])
    order = np.argsort(card, kind="stable")
    bounds = np.concatenate([[0], np.cumsum([math.comb(n, m) for m in range(n + 1)])])
    order.setflags(write=False)
    return order, bounds


def cardinality_sums(p: PopularityVector) -> np.ndarray:
    """``S[m] = sum over |R| = m of (sum_{i in R} p_i**2) / p_R``, each summed exactly.

    Index 0 is unused.  These are the only p-dependent pieces of the
    residual expansion, so all capacities share one table.
    """
    probs = p.probs
    n = len(probs)
    mass, sq, _ = subset_tables(probs)
    order, bounds = _cardinality_order(n)
    out = np.zeros(n + 1)
    for m in range(1, n + 1):
        idx = order[bounds[m]:bounds[m + 1]]
        out[m] = math.fsum((sq[idx] / mass[idx]).tolist())
    return out


def _sane_probability(value: float, what: str) -> float:
    if not -SANITY_SLACK <= value <= 1.0 + SANITY_SLACK:
        raise ArithmeticError(f"{what} evaluated to {value!r}, outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def _combine(sums: np.ndarray, params: ModelParams) -> float:
    terms = [
        residual_coefficient(m, params) * float(sums[m])
        for m in range(params.residual_order, params.n_items + 1)
    ]
    return _sane_probability(math.fsum(terms), "hit rate")


def _resolve(p, params: ModelParams) -> PopularityVector:
    p = as_popularity(p)
    if p.n != params.n_items:
        raise BadLength(f"popularity has {p.n} entries but n_items = {params.n_items}")
    return p


def hit_rate_residual(p, params: ModelParams, *, max_items: int = ENGINE_CAP,
                      exact: bool = False) -> HitRateResult:
    """Stationary LRU hit rate via the alternating residual-subset expansion.

    With ``exact=True`` the expansion is evaluated in rational arithmetic on
    the exact binary values of ``p`` (N <= ``EXACT_CAP``).
    """
    p = _resolve(p, params)
    if params.is_full:
        return HitRateResult(1.0, params.capacity, "residual", trivial=True)
    if exact:
        return HitRateResult(float(hit_rate_exact(p, params)), params.capacity, "residual")
    _check_cap(p.n, max_items)
    return HitRateResult(_combine(cardinality_sums(p), params), params.capacity, "residual")


def hit_rate_exact(p, params: ModelParams) -> Fraction:
    """Rational value of the residual expansion (no rounding anywhere)."""
    p = _resolve(p, params)
    if params.is_full:
        return Fraction(1)
    _check_cap(p.n, EXACT_CAP)
    probs = [Fraction(float(x)) for x in p.probs]
    total = sum(probs)
    probs = [x / total for x in probs]
    mass, sq, card = [Fraction(0)], [Fraction(0)], [0]
    for x in probs:
        mass += [v + x for v in mass]
        sq += [v + x * x for v in sq]
        card += [c + 1 for c in card]
    L = params.residual_order
    groups = {m: Fraction(0) for m in range(L, p.n + 1)}
    for mask in range(1, len(mass)):
        if card[mask] >= L:
            groups[card[mask]] += sq[mask] / mass[mask]
    return sum(residual_coefficient(m, params) * g for m, g in groups.items())


def occupancy_per_item(p, params: ModelParams, *, max_items: int = ENGINE_CAP) -> OccupancyProfile:
    """Stationary probabilities that each item is cached.

    ``pi_i = p_i * sum over R containing i with |R| >= L of alpha_|R| / p_R``.
    """
    p = _resolve(p, params)
    n = p.n
    if params.is_full:
        return OccupancyProfile(np.ones(n), params.capacity)
    _check_cap(n, max_items)
    mass, _, card = subset_tables(p.probs)
    alpha = np.zeros(n + 1)
    for m in range(params.residual_order, n + 1):
        alpha[m] = residual_coefficient(m, params)
    keep = card >= params.residual_order
    masks = np.flatnonzero(keep)
    coeff = alpha[card[masks]] / mass[masks]
    pi = np.empty(n)
    for i in range(n):
        mine = ((masks >> i) & 1).astype(bool)
        pi[i] = _sane_probability(p.probs[i] * math.fsum(coeff[mine].tolist()),
                                  f"occupancy of item {i}")
    return OccupancyProfile(pi, params.capacity)


def hit_rate_per_item(p, params: ModelParams, **kw) -> HitRateResult:
    p = _resolve(p, params)
    prof = occupancy_per_item(p, params, **kw)
    value = math.fsum((p.probs * prof.pi).tolist())
    return HitRateResult(_sane_probability(value, "hit rate"), params.capacity, "per_item",
                         trivial=params.is_full)


def search_cost_distribution(p, *, max_items: int = ENGINE_CAP) -> SearchCostDistribution:
    """Stationary move-to-front search cost: ``P(D <= C) = H_C(p)``."""
    p = as_popularity(p)
    _check_cap(p.n, max_items)
    sums = cardinality_sums(p)
    cdf = np.ones(p.n)
    for c in range(1, p.n):
        cdf[c - 1] = _combine(sums, ModelParams(p.n, c))
    return SearchCostDistribution(cdf)


def expected_cost_functional(p, g: Sequence[float], *,
                             dist: SearchCostDistribution | None = None) -> float:
    """``E g(D)`` through the tail-sum form ``g(1) + sum (g(c+1)-g(c)) P(D > c)``."""
    p = as_popularity(p)
    g = np.asarray(g, dtype=float)
    if g.shape != (p.n,):
        raise BadLength(f"g must have {p.n} entries, got {g.size}", "g")
    if dist is None:
        dist = search_cost_distribution(p)
    tails = dist.miss_probabilities()
    return math.fsum([g[0], *(np.diff(g) * tails).tolist()])


# -- permutation oracle ---------------------------------------------------


@lru_cache(maxsize=16)
def permutation_table(n: int) -> np.ndarray:
    """All ``n!`` orderings of ``range(n)`` as rows (lexicographic)."""
    table = np.array(list(permutations(range(n))), dtype=np.int64).reshape(-1, n)
    table.setflags(write=False)
    return table


def ordering_law(rates: np.ndarray):
    """Probability of every ordering under the rate-proportional sequential pick.

    Returns ``(orderings, probabilities)``; row ``j`` of ``orderings`` lists
    items from first (smallest exponential age) to last.
    """
    rates = np.asarray(rates, dtype=float)
    n = len(rates)
    if n > ORACLE_CAP:
        raise TooManyItemsForOracle(f"N = {n} exceeds the permutation oracle cap of {ORACLE_CAP}")
    perms = permutation_table(n)
    r = rates[perms]
    remaining = np.cumsum(r[:, ::-1], axis=1)[:, ::-1]
    return perms, np.prod(r / remaining, axis=1)


def brute_force_occupancy(p, params: ModelParams) -> OccupancyProfile:
    """Occupancy probabilities from explicit enumeration of orderings."""
    p = _resolve(p, params)
    perms, prob = ordering_law(p.probs)
    top = perms[:, : params.capacity]
    pi = np.array([prob[(top == k).any(axis=1)].sum() for k in range(p.n)])
    return OccupancyProfile(pi, params.capacity)


def brute_force_hit_rate(p, params: ModelParams) -> HitRateResult:
    """Ground truth: average cached popularity over all ``N!`` stack orders."""
    p = _resolve(p, params)
    perms, prob = ordering_law(p.probs)
    cached = p.probs[perms][:, : params.capacity].sum(axis=1)
    return HitRateResult(float(prob @ cached), params.capacity, "brute_force",
                         trivial=params.is_full)


def brute_force_search_cost(p) -> SearchCostDistribution:
    """Stack-depth law by enumeration: ``P(D = d) = E p_{sigma_d}``."""
    p = as_popularity(p)
    perms, prob = ordering_law(p.probs)
    pmf = prob @ p.probs[perms]
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    return SearchCostDistribution(cdf)
