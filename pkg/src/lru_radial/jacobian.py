"""Occupancy probabilities as functions of raw exponential rates.

Here item ``k`` has rate ``lambda_k`` (no normalization) and ``pi_k`` is the
probability that its exponential age is among the ``C`` smallest.  The
off-diagonal sensitivities are ``d pi_k / d lambda_i = -lambda_k G_ik`` with
a symmetric positive kernel ``G``; along a ray from the uniform vector they
give a second, independent formula for the hit-rate derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ModelParams, PopularityVector, as_popularity, ray_point
from .errors import (
    BadLength,
    MOutOfRange,
    NonPositiveRate,
    NotAPermutation,
    ProbOutOfRange,
    ThetaOutOfRange,
    TooManyItems,
)
from .exact import hit_rate_residual, occupancy_per_item
from .quadrature import QuadratureConfig, integrate_half_line

JACOBIAN_CAP = 12


@dataclass(frozen=True, eq=False)
class RateVector:
    rates: np.ndarray

    def __post_init__(self):
        arr = np.array(self.rates, dtype=float).ravel()
        if arr.size < 2:
            raise BadLength(f"need at least 2 rates, got {arr.size}", "rates")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise NonPositiveRate("rates must be finite and strictly positive")
        arr.setflags(write=False)
        object.__setattr__(self, "rates", arr)

    @property
    def n(self) -> int:
        return len(self.rates)

    def normalized(self) -> PopularityVector:
        return PopularityVector(self.rates / self.rates.sum())


@dataclass(frozen=True)
class SensitivityKernel:
    g_values: np.ndarray  # symmetric, zero diagonal
    quad_config: QuadratureConfig


@dataclass(frozen=True)
class JacobianReport:
    jacobian: np.ndarray  # jacobian[i, k] = d pi_k / d lambda_i
    t1: Optional[float] = None
    t2: Optional[float] = None
    derivative: Optional[float] = None


def _as_rates(lam) -> RateVector:
    if isinstance(lam, RateVector):
        return lam
    if isinstance(lam, PopularityVector):
        return RateVector(lam.probs)
    return RateVector(lam)


def poisson_binomial_pmf(success_probs: Sequence[float], m: int) -> float:
    """Probability that exactly ``m`` of independent Bernoulli trials succeed."""
    probs = np.asarray(success_probs, dtype=float).ravel()
    if np.any((probs < 0) | (probs > 1)) or not np.all(np.isfinite(probs)):
        raise ProbOutOfRange("success probabilities must lie in [0, 1]")
    if not 0 <= m <= probs.size:
        raise MOutOfRange(f"m must lie in [0, {probs.size}], got {m}")
    return float(_exact_count_mass(probs[None, :], m)[0])


def _exact_count_mass(x: np.ndarray, m: int) -> np.ndarray:
    """Row-wise ``P(exactly m successes)``; ``x`` has one trial per column.

    Forward recurrence over trials, truncated at ``m`` successes.
    """
    dist = np.zeros((x.shape[0], m + 1))
    dist[:, 0] = 1.0
    for j in range(x.shape[1]):
        pj = x[:, j:j + 1]
        nxt = dist * (1.0 - pj)
        nxt[:, 1:] += dist[:, :-1] * pj
        dist = nxt
    return dist[:, m]


def _check(lam: RateVector, params: ModelParams, cap: int) -> None:
    if lam.n != params.n_items:
        raise BadLength(f"got {lam.n} rates but n_items = {params.n_items}", "rates")
    params.require_partial()
    if lam.n > cap:
        raise TooManyItems(f"N = {lam.n} exceeds the Jacobian cap of {cap}")


def _g_integral(rates: np.ndarray, capacity: int, i: int, k: int, quad: QuadratureConfig) -> float:
    rest = np.delete(rates, [i, k])
    target = capacity - 1

    def integrand(t):
        fired = -np.expm1(-np.multiply.outer(t, rest))
        return t * _exact_count_mass(fired, target)

    return integrate_half_line(integrand, rates[i] + rates[k], float(rates.sum()), quad)


def sensitivity_G(lam, params: ModelParams, i: int, k: int,
                  quad: QuadratureConfig = QuadratureConfig(), *,
                  max_items: int = JACOBIAN_CAP) -> float:
    """``G_ik = int_0^inf t exp(-(lambda_i + lambda_k) t) P(M_ik(t) = C - 1) dt``.

    ``M_ik(t)`` counts the other items whose ages are below ``t``.  The
    integral is evaluated with ``(i, k)`` sorted, so ``G_ik`` and ``G_ki``
    are bit-identical.
    """
    lam = _as_rates(lam)
    _check(lam, params, max_items)
    if i == k or not (0 <= i < lam.n and 0 <= k < lam.n):
        raise MOutOfRange(f"need two distinct item indices, got ({i}, {k})", "pair")
    a, b = min(i, k), max(i, k)
    return _g_integral(lam.rates, params.capacity, a, b, quad)


def sensitivity_matrix(lam, params: ModelParams, quad: QuadratureConfig = QuadratureConfig(),
                       *, max_items: int = JACOBIAN_CAP) -> SensitivityKernel:
    lam = _as_rates(lam)
    _check(lam, params, max_items)
    n = lam.n
    g = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            g[a, b] = g[b, a] = _g_integral(lam.rates, params.capacity, a, b, quad)
    return SensitivityKernel(g, quad)


def _jacobian_from_kernel(rates: np.ndarray, g: np.ndarray) -> np.ndarray:
    jac = -g * rates[None, :]
    np.fill_diagonal(jac, 0.0)
    np.fill_diagonal(jac, -jac.sum(axis=1))
    return jac


def occupancy_jacobian(lam, params: ModelParams, quad: QuadratureConfig = QuadratureConfig(),
                       *, max_items: int = JACOBIAN_CAP) -> JacobianReport:
    """Matrix of ``d pi_k / d lambda_i`` (row ``i``, column ``k``).

    Off the diagonal the entries are ``-lambda_k G_ik``; the diagonal makes
    every row sum vanish.
    """
    lam = _as_rates(lam)
    kern = sensitivity_matrix(lam, params, quad, max_items=max_items)
    return JacobianReport(_jacobian_from_kernel(lam.rates, kern.g_values))


def occupancy_from_rates(lam, params: ModelParams) -> np.ndarray:
    """``pi(lambda)``; degree-zero homogeneity lets us normalize first."""
    lam = _as_rates(lam)
    return occupancy_per_item(lam.normalized(), params).pi


def ordering_probability(lam, sigma: Sequence[int]) -> float:
    """Probability that the ages come out in the order ``sigma`` (smallest first)."""
    lam = _as_rates(lam)
    sigma = [int(s) for s in sigma]
    if sorted(sigma) != list(range(lam.n)):
        raise NotAPermutation(f"{sigma} is not a permutation of 0..{lam.n - 1}")
    r = lam.rates[sigma]
    remaining = np.cumsum(r[::-1])[::-1]
    return float(np.prod(r / remaining))


def master_identity_derivative(q, theta: float, params: ModelParams,
                               quad: QuadratureConfig = QuadratureConfig(), *,
                               max_items: int = JACOBIAN_CAP) -> JacobianReport:
    """Radial hit-rate derivative as a uniform-gap term plus a sensitivity square.

    ``t1 = (H_C(x) - C/N) / theta`` and
    ``t2 = sum_{i<k} G_ik (x_i - x_k)**2 / (N theta)`` at ``x = u + theta (q - u)``.
    """
    q = as_popularity(q)
    if not 0.0 < theta <= 1.0:
        raise ThetaOutOfRange(f"theta must lie in (0, 1], got {theta!r}")
    x = ray_point(q, theta)
    lam = RateVector(x.probs)
    _check(lam, params, max_items)
    n = x.n
    if x.is_uniform():
        return JacobianReport(np.zeros((n, n)), 0.0, 0.0, 0.0)
    g = sensitivity_matrix(lam, params, quad, max_items=max_items).g_values
    t1 = (hit_rate_residual(x, params).value - params.capacity / n) / theta
    diff = x.probs[:, None] - x.probs[None, :]
    upper = np.triu_indices(n, 1)
    t2 = math.fsum((g[upper] * diff[upper] ** 2).tolist()) / (n * theta)
    return JacobianReport(_jacobian_from_kernel(x.probs, g), t1, t2, t1 + t2)


@dataclass(frozen=True)
class MinorWitness:
    """A point and zero-sum direction where the sensitivity part is negative."""

    rates: np.ndarray
    direction: np.ndarray
    capacity: int
    value: float


def sensitivity_form(lam, delta: Sequence[float], params: ModelParams,
                     quad: QuadratureConfig = QuadratureConfig()) -> float:
    """``sum_{i<k} G_ik (lambda_i - lambda_k)(lambda_k delta_i - lambda_i delta_k)``."""
    lam = _as_rates(lam)
    delta = np.asarray(delta, dtype=float)
    g = sensitivity_matrix(lam, params, quad).g_values
    x = lam.rates
    minor = np.outer(delta, x) - np.outer(x, delta)  # [i, k] = lambda_k d_i - lambda_i d_k
    upper = np.triu_indices(lam.n, 1)
    return math.fsum((g * np.subtract.outer(x, x) * minor)[upper].tolist())


def search_negative_minor(rng: np.random.Generator, *, max_n: int = 6, trials: int = 200,
                          quad: QuadratureConfig = QuadratureConfig()) -> Optional[MinorWitness]:
    """Random search for a direction where the sensitivity form is negative.

    A demonstrator only: rates are uniform on [0.1, 1], directions are
    random with zero sum.  Returns ``None`` if nothing negative turns up.
    """
    for _ in range(trials):
        n = int(rng.integers(3, max_n + 1))
        c = int(rng.integers(1, n))
        lam = rng.uniform(0.1, 1.0, size=n)
        delta = rng.normal(size=n)
        delta -= delta.mean()
        value = sensitivity_form(lam, delta, ModelParams(n, c), quad)
        if value < 0:
            return MinorWitness(lam, delta, c, value)
    return None
