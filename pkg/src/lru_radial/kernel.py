"""Pair-square decomposition of the hit rate and the radial pair kernels.

For a pair ``a < b`` the coefficient ``J_ab`` and kernel ``K_ab`` are sums
over the residual subsets ``R`` that contain both items:

    J_ab = sum alpha_|R| / (|R| p_R)
    K_ab = N sum alpha_|R| (1 / (|R| p_R) + 1 / (N p_R**2))

Writing ``R = {a, b} + U`` with ``U`` inside the complement ``T`` turns the
two parts of ``K_ab / N`` into ``phi`` (equal to ``J_ab``) and ``psi / N``.
Both have positive integral representations through ``B_r(y, t)``, which
is what :func:`phi_psi_quadrature` evaluates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ModelParams, PopularityVector, as_popularity, ray_point, residual_coefficients
from .errors import (
    BadLength,
    BadPair,
    ConditioningWarning,
    ModelError,
    NonPositiveKernel,
    RankOutOfRange,
    ThetaOutOfRange,
    TooManyItems,
)
from .exact import HitRateResult, subset_tables
from .quadrature import QuadratureConfig, integrate_half_line, unit_interval_rule

KERNEL_CAP = 18
CONDITIONING_THRESHOLD = 1e-6


@dataclass(frozen=True)
class PairKernelMatrix:
    """Strictly upper triangular ``J``, ``K`` and ``psi`` over item pairs."""

    j_values: np.ndarray
    k_values: np.ndarray
    psi_values: np.ndarray
    params: ModelParams

    def pairs(self):
        n = self.params.n_items
        return [(a, b) for a in range(n) for b in range(a + 1, n)]


@dataclass(frozen=True)
class KernelSplit:
    phi: float
    psi: float
    pair_mass: float
    residual_rank: int
    complement: tuple

    def kernel(self, n_items: int) -> float:
        return n_items * self.phi + self.psi


@dataclass(frozen=True)
class RadialDerivativeReport:
    theta: float
    derivative: float
    pair_terms: np.ndarray  # upper triangular (x_a - x_b)**2 K_ab / (N theta)


def _prepare(p, params: ModelParams, max_items: int) -> PopularityVector:
    p = as_popularity(p)
    if p.n != params.n_items:
        raise BadLength(f"popularity has {p.n} entries but n_items = {params.n_items}")
    params.require_partial()
    if p.n > max_items:
        raise TooManyItems(f"N = {p.n} exceeds the kernel cap of {max_items}")
    if p.probs.min() < CONDITIONING_THRESHOLD:
        warnings.warn(
            f"smallest probability {p.probs.min():.3g} is below {CONDITIONING_THRESHOLD:g}; "
            "kernel values may be poorly conditioned",
            ConditioningWarning,
            stacklevel=3,
        )
    return p


def _check_pair(a: int, b: int, n: int) -> None:
    if not (0 <= a < b < n):
        raise BadPair(f"need 0 <= a < b < {n}, got ({a}, {b})")


def _pair_subsets(p: PopularityVector, params: ModelParams, a: int, b: int):
    """Masses ``p_{a,b} + p_U``, sizes ``|U|+2`` and coefficients over ``U`` in ``T``."""
    _check_pair(a, b, p.n)
    rest = [j for j in range(p.n) if j not in (a, b)]
    mass_u, _, card_u = subset_tables(p.probs[rest])
    size = card_u + 2
    alpha = residual_coefficients(params).astype(float)
    coeff = alpha[size]
    keep = coeff != 0
    s = p.probs[a] + p.probs[b]
    return s + mass_u[keep], size[keep], coeff[keep]


def pair_coeff_J(p, params: ModelParams, a: int, b: int, *, max_items: int = KERNEL_CAP) -> float:
    """Pair-square coefficient ``J_ab`` by enumerating subsets of the complement."""
    p = _prepare(p, params, max_items)
    mass, size, coeff = _pair_subsets(p, params, a, b)
    return math.fsum((coeff / (size * mass)).tolist())


def pair_kernel_K(p, params: ModelParams, a: int, b: int, *, max_items: int = KERNEL_CAP) -> float:
    p = _prepare(p, params, max_items)
    mass, size, coeff = _pair_subsets(p, params, a, b)
    n = p.n
    value = n * math.fsum((coeff * (1.0 / (size * mass) + 1.0 / (n * mass * mass))).tolist())
    if not value > 0:
        raise NonPositiveKernel(f"K[{a},{b}] = {value!r} at {p}")
    return value


def kernel_split(p, params: ModelParams, a: int, b: int, *, max_items: int = KERNEL_CAP) -> KernelSplit:
    """``phi`` and ``psi`` with ``K_ab = N phi + psi``, summed over ``U`` in ``T``."""
    p = _prepare(p, params, max_items)
    mass, size, coeff = _pair_subsets(p, params, a, b)
    phi = math.fsum((coeff / (size * mass)).tolist())
    psi = math.fsum((coeff / (mass * mass)).tolist())
    rest = tuple(j for j in range(p.n) if j not in (a, b))
    return KernelSplit(phi, psi, float(p.probs[a] + p.probs[b]),
                       params.residual_order - 2, rest)


def _superset_sums(values: np.ndarray, n: int) -> np.ndarray:
    """``out[S] = sum of values[R] over masks R containing S`` (last axis)."""
    out = values.copy()
    lead = out.shape[:-1]
    for i in range(n):
        view = out.reshape(*lead, -1, 2, 1 << i)
        view[..., 0, :] += view[..., 1, :]
    return out


def kernel_matrix(p, params: ModelParams, *, max_items: int = KERNEL_CAP) -> PairKernelMatrix:
    """All ``J_ab``, ``K_ab`` and ``psi_ab`` from one sweep over the subset masks."""
    p = _prepare(p, params, max_items)
    n = p.n
    mass, _, card = subset_tables(p.probs)
    alpha = residual_coefficients(params).astype(float)[card]
    live = alpha != 0
    inv = np.zeros_like(mass)
    inv[live] = 1.0 / mass[live]
    size = np.maximum(card, 1)
    table = np.stack([alpha * inv / size, alpha * inv * inv])
    sums = _superset_sums(table, n)
    j_values = np.zeros((n, n))
    psi_values = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            mask = (1 << a) | (1 << b)
            j_values[a, b] = sums[0, mask]
            psi_values[a, b] = sums[1, mask]
    k_values = n * j_values + psi_values
    upper = np.triu_indices(n, 1)
    if not np.all(k_values[upper] > 0):
        raise NonPositiveKernel(f"nonpositive pair kernel at {p}")
    return PairKernelMatrix(j_values, k_values, psi_values, params)


def hit_rate_pair_square(p, params: ModelParams, *, max_items: int = KERNEL_CAP):
    """``C/N + sum_{a<b} (p_a - p_b)**2 J_ab``."""
    p = as_popularity(p)
    if params.is_full:
        return HitRateResult(1.0, params.capacity, "pair_square", trivial=True)
    mat = kernel_matrix(p, params, max_items=max_items)
    diff = p.probs[:, None] - p.probs[None, :]
    upper = np.triu_indices(p.n, 1)
    fluct = math.fsum((diff[upper] ** 2 * mat.j_values[upper]).tolist())
    return HitRateResult(params.capacity / params.n_items + fluct, params.capacity, "pair_square")


def radial_derivative(q, theta: float, params: ModelParams, *,
                      max_items: int = KERNEL_CAP) -> RadialDerivativeReport:
    """d/dtheta of the hit rate along ``u + theta (q - u)``.

    At ``theta = 0`` the pair differences vanish like ``theta``, so the
    derivative is 0 by continuity.
    """
    q = as_popularity(q)
    if not 0.0 <= theta <= 1.0:
        raise ThetaOutOfRange(f"theta must lie in [0, 1], got {theta!r}")
    params.require_partial()
    n = q.n
    if theta == 0.0:
        return RadialDerivativeReport(0.0, 0.0, np.zeros((n, n)))
    x = ray_point(q, theta)
    mat = kernel_matrix(x, params, max_items=max_items)
    diff = x.probs[:, None] - x.probs[None, :]
    terms = np.triu(diff ** 2 * mat.k_values, 1) / (n * theta)
    upper = np.triu_indices(n, 1)
    return RadialDerivativeReport(theta, math.fsum(terms[upper].tolist()), terms)


# -- positive integral representation ---------------------------------------


def _check_rank(r: int, size: int) -> None:
    if not 0 <= r <= size:
        raise RankOutOfRange(f"rank r must lie in [0, {size}], got {r}")


def b_alternating(y, t, r: int, rates: Sequence[float]):
    """``sum_U (-1)**(|U|-r) C(|U|, r) y**|U| exp(-p_U t)`` by subset enumeration."""
    rates = np.asarray(rates, dtype=float)
    _check_rank(r, len(rates))
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    mass, _, card = subset_tables(rates)
    coeff = np.array([(-1) ** (k - r) * math.comb(k, r) for k in range(len(rates) + 1)],
                     dtype=float)[card]
    keep = coeff != 0
    mass, card, coeff = mass[keep], card[keep], coeff[keep]
    terms = coeff * y[..., None] ** card * np.exp(-np.multiply.outer(t, mass))
    return terms.sum(axis=-1)


def b_positive_form(y, t, r: int, rates: Sequence[float]):
    """``y**r sum_{|W|=r} exp(-p_W t) prod_{j not in W} (1 - y exp(-p_j t))``.

    The sum over ``W`` is the ``X**r`` coefficient of
    ``prod_j ((1 - y z_j) + X z_j)`` with ``z_j = exp(-p_j t)``; every
    partial product is nonnegative, so no cancellation occurs.
    """
    rates = np.asarray(rates, dtype=float)
    _check_rank(r, len(rates))
    y, t = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(t, dtype=float))
    coef = np.zeros(y.shape + (r + 1,))
    coef[..., 0] = 1.0
    for rate in rates:
        z = np.exp(-rate * t)[..., None]
        stay = 1.0 - y[..., None] * z
        nxt = coef * stay
        nxt[..., 1:] += coef[..., :-1] * z
        coef = nxt
    return y ** r * coef[..., r]


def b_polynomial(y: float, t: float, r: int, rates: Sequence[float]):
    """Both forms of ``B_r(y, t)``: ``(alternating, product_form)``."""
    if not 0.0 <= y <= 1.0:
        raise ModelError(f"y must lie in [0, 1], got {y!r}", "y")
    if not t >= 0.0:
        raise ModelError(f"t must be nonnegative, got {t!r}", "t")
    return float(b_alternating(y, t, r, rates)), float(b_positive_form(y, t, r, rates))


def phi_psi_quadrature(p, params: ModelParams, a: int, b: int,
                       quad: QuadratureConfig = QuadratureConfig(), *,
                       max_items: int = KERNEL_CAP):
    """``phi`` and ``psi`` from their integral forms over the positive ``B_r``.

    ``phi = int_0^inf exp(-s t) int_0^1 y B_r(y, t) dy dt`` and
    ``psi = int_0^inf t exp(-s t) B_r(1, t) dt`` with ``s = p_a + p_b``.
    """
    p = _prepare(p, params, max_items)
    _check_pair(a, b, p.n)
    rest = np.array([p.probs[j] for j in range(p.n) if j not in (a, b)])
    r = params.residual_order - 2
    s = float(p.probs[a] + p.probs[b])
    fastest = s + float(rest.sum())
    y, wy = unit_interval_rule(quad.y_order)

    def phi_integrand(t):
        vals = b_positive_form(y[None, :], t[:, None], r, rest)
        return vals @ (wy * y)

    def psi_integrand(t):
        return t * b_positive_form(1.0, t, r, rest)

    phi = integrate_half_line(phi_integrand, s, fastest, quad)
    psi = integrate_half_line(psi_integrand, s, fastest, quad)
    return phi, psi
