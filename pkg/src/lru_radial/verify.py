"""Randomized property checks tying every formula to an independent route.

Each check takes its sample sizes and tolerances explicitly and returns a
:class:`CheckResult`; :func:`run_suite` bundles them at two desk-scale
tiers for the ``verify`` command.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .core import ModelParams, PopularityVector, ray_point, validate_popularity
from .exact import (
    ORACLE_CAP,
    brute_force_hit_rate,
    brute_force_occupancy,
    expected_cost_functional,
    hit_rate_exact,
    hit_rate_residual,
    occupancy_per_item,
    search_cost_distribution,
)
from .jacobian import (
    master_identity_derivative,
    occupancy_from_rates,
    occupancy_jacobian,
    search_negative_minor,
    sensitivity_matrix,
)
from .kernel import (
    b_alternating,
    b_positive_form,
    hit_rate_pair_square,
    kernel_matrix,
    kernel_split,
    pair_kernel_K,
    phi_psi_quadrature,
    radial_derivative,
)
from .quadrature import QuadratureConfig
from .simulate import SimConfig, estimate_hit_rate_stationary, simulate_mtf_chain


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def random_popularity(rng: np.random.Generator, n: int) -> PopularityVector:
    """Uniformly distributed point of the open simplex."""
    return validate_popularity(rng.dirichlet(np.ones(n)))


def random_instance(rng: np.random.Generator, min_n: int, max_n: int):
    n = int(rng.integers(min_n, max_n + 1))
    return random_popularity(rng, n), ModelParams(n, int(rng.integers(1, n)))


def off_ray(q: PopularityVector, theta: float) -> PopularityVector:
    """``u + theta (q - u)`` without the ``theta <= 1`` restriction."""
    u = 1.0 / q.n
    return validate_popularity(u + theta * (q.probs - u))


def _timed(name: str, fn: Callable[[], tuple]) -> CheckResult:
    start = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, bool(passed), detail, time.perf_counter() - start)


# -- individual checks --------------------------------------------------------


def check_uniform_baseline(max_n: int = 12, tol: float = 1e-12) -> CheckResult:
    def run():
        worst = 0.0
        for n in range(2, max_n + 1):
            u = PopularityVector.uniform(n)
            for c in range(1, n):
                worst = max(worst, abs(hit_rate_residual(u, ModelParams(n, c)).value - c / n))
        return worst <= tol, f"max |H_C(u) - C/N| = {worst:.2e} (tol {tol:g}, N <= {max_n})"
    return _timed("uniform baseline", run)


def check_endpoint_identity(rng, count: int = 500, max_n: int = 12, tol: float = 1e-12) -> CheckResult:
    def run():
        worst = 0.0
        for _ in range(count):
            p = random_popularity(rng, int(rng.integers(2, max_n + 1)))
            h1 = hit_rate_residual(p, ModelParams(p.n, 1)).value
            worst = max(worst, abs(h1 - math.fsum((p.probs ** 2).tolist())))
        return worst <= tol, f"max |H_1 - sum p^2| = {worst:.2e} over {count} vectors (tol {tol:g})"
    return _timed("endpoint identity", run)


def check_oracle_equivalence(rng, count: int = 200, max_n: int = 7, tol: float = 1e-10) -> CheckResult:
    max_n = min(max_n, ORACLE_CAP)

    def run():
        worst = 0.0
        for k in range(count):
            n = 2 + k % (max_n - 1)
            p = random_popularity(rng, n)
            for c in range(1, n):
                params = ModelParams(n, c)
                diff = hit_rate_residual(p, params).value - brute_force_hit_rate(p, params).value
                worst = max(worst, abs(diff))
        return worst <= tol, f"max |residual - permutation oracle| = {worst:.2e} over {count} vectors, all C (tol {tol:g})"
    return _timed("oracle equivalence", run)


def check_decomposition_identity(rng, count: int = 500, max_n: int = 12, tol: float = 1e-10) -> CheckResult:
    def run():
        worst = 0.0
        for _ in range(count):
            p, params = random_instance(rng, 2, max_n)
            diff = hit_rate_pair_square(p, params).value - hit_rate_residual(p, params).value
            worst = max(worst, abs(diff))
        return worst <= tol, f"max |pair-square - residual| = {worst:.2e} over {count} instances (tol {tol:g})"
    return _timed("decomposition identity", run)


def check_kernel_positivity(rng, count: int = 1000, max_n: int = 12, split_tol: float = 1e-10,
                            quad_count: int = 40, quad_max_n: int = 6, quad_tol: float = 1e-8,
                            quad: QuadratureConfig = QuadratureConfig()) -> CheckResult:
    def run():
        min_k, worst_split, worst_quad, min_node = math.inf, 0.0, 0.0, math.inf
        for k in range(count):
            n = 2 + k % (max_n - 1)
            p = random_popularity(rng, n)
            params = ModelParams(n, int(rng.integers(1, n)))
            mat = kernel_matrix(p, params)
            upper = np.triu_indices(n, 1)
            min_k = min(min_k, float(mat.k_values[upper].min()))
            a, b = sorted(int(i) for i in rng.choice(n, 2, replace=False))
            kab = pair_kernel_K(p, params, a, b)
            split = kernel_split(p, params, a, b)
            min_k = min(min_k, kab, split.phi, split.psi)
            worst_split = max(worst_split, abs(kab - split.kernel(n)))
        for _ in range(quad_count):
            p, params = random_instance(rng, 2, quad_max_n)
            a, b = sorted(int(i) for i in rng.choice(p.n, 2, replace=False))
            split = kernel_split(p, params, a, b)
            phi, psi = phi_psi_quadrature(p, params, a, b, quad)
            worst_quad = max(worst_quad, abs(phi - split.phi), abs(psi - split.psi))
            rest = np.delete(p.probs, [a, b])
            t = rng.exponential(5.0, size=64)
            y = rng.uniform(0.0, 1.0, size=64)
            min_node = min(min_node, float(b_positive_form(y, t, params.residual_order - 2, rest).min()))
        ok = min_k > 0 and worst_split <= split_tol and worst_quad <= quad_tol and min_node >= 0
        return ok, (f"min K/phi/psi = {min_k:.3e}; max split error {worst_split:.2e} (tol {split_tol:g}); "
                    f"max quadrature error {worst_quad:.2e} (tol {quad_tol:g}); min B_r {min_node:.2e}")
    return _timed("kernel positivity", run)


def check_b_forms(rng, count: int = 200, max_t: int = 8, tol: float = 1e-12) -> CheckResult:
    def run():
        worst = 0.0
        for _ in range(count):
            size = int(rng.integers(0, max_t + 1))
            rates = rng.dirichlet(np.ones(size + 2))[:size]
            r = int(rng.integers(0, size + 1))
            y, t = rng.uniform(), rng.exponential(3.0)
            worst = max(worst, abs(b_alternating(y, t, r, rates) - b_positive_form(y, t, r, rates)))
        return worst <= tol, f"max |alternating - product form| = {worst:.2e} (tol {tol:g})"
    return _timed("B_r forms", run)


def check_radial_derivative(rng, rays: int = 50, grid_points: int = 100, max_n: int = 10,
                            rel_tol: float = 1e-6, h: float = 1e-5) -> CheckResult:
    grid = np.arange(1, grid_points + 1) / grid_points

    def run():
        worst, min_d, nonincreasing = 0.0, math.inf, 0
        for _ in range(rays):
            q, params = random_instance(rng, 2, max_n)
            prev = hit_rate_residual(ray_point(q, 0.0), params).value
            for theta in grid:
                d = radial_derivative(q, float(theta), params).derivative
                hi = hit_rate_residual(off_ray(q, theta + h), params).value
                lo = hit_rate_residual(off_ray(q, theta - h), params).value
                fd = (hi - lo) / (2 * h)
                worst = max(worst, abs(fd - d) / abs(d))
                min_d = min(min_d, d)
                cur = hit_rate_residual(ray_point(q, float(theta)), params).value
                nonincreasing += cur <= prev
                prev = cur
        ok = worst <= rel_tol and min_d > 0 and nonincreasing == 0
        return ok, (f"max relative FD error {worst:.2e} (tol {rel_tol:g}); min derivative {min_d:.3e}; "
                    f"{nonincreasing} non-increasing steps over {rays} rays x {grid_points} points")
    return _timed("radial derivative", run)


def check_two_proofs(rng, count: int = 100, max_n: int = 8, tol: float = 1e-7,
                     quad: QuadratureConfig = QuadratureConfig()) -> CheckResult:
    def run():
        worst, min_t1, min_t2 = 0.0, math.inf, math.inf
        for _ in range(count):
            q, params = random_instance(rng, 2, max_n)
            theta = float(rng.uniform(0.01, 1.0))
            rep = master_identity_derivative(q, theta, params, quad)
            d = radial_derivative(q, theta, params).derivative
            worst = max(worst, abs(rep.derivative - d))
            min_t1, min_t2 = min(min_t1, rep.t1), min(min_t2, rep.t2)
        ok = worst <= tol and min_t1 >= 0 and min_t2 > 0
        return ok, f"max |master - kernel| = {worst:.2e} (tol {tol:g}); min T1 {min_t1:.2e}; min T2 {min_t2:.2e}"
    return _timed("two-proof consistency", run)


def check_jacobian(rng, count: int = 30, max_n: int = 8, row_tol: float = 1e-9,
                   fd_tol: float = 1e-5, h: float = 1e-5,
                   quad: QuadratureConfig = QuadratureConfig()) -> CheckResult:
    def run():
        worst_row, worst_fd, max_off, min_diag, asym = 0.0, 0.0, -math.inf, math.inf, 0.0
        for _ in range(count):
            n = int(rng.integers(2, max_n + 1))
            params = ModelParams(n, int(rng.integers(1, n)))
            lam = rng.uniform(0.1, 1.0, size=n)
            g = sensitivity_matrix(lam, params, quad).g_values
            asym = max(asym, float(np.abs(g - g.T).max()))
            jac = occupancy_jacobian(lam, params, quad).jacobian
            worst_row = max(worst_row, float(np.abs(jac.sum(axis=1)).max()))
            off = jac[~np.eye(n, dtype=bool)]
            max_off = max(max_off, float(off.max()))
            min_diag = min(min_diag, float(np.diag(jac).min()))
            for i in range(n):
                e = np.zeros(n)
                e[i] = h
                fd = (occupancy_from_rates(lam + e, params) - occupancy_from_rates(lam - e, params)) / (2 * h)
                worst_fd = max(worst_fd, float(np.abs(fd - jac[i]).max()))
        ok = worst_row <= row_tol and max_off <= 0 and min_diag >= 0 and asym == 0 and worst_fd <= fd_tol
        return ok, (f"max row sum {worst_row:.2e} (tol {row_tol:g}); max off-diagonal {max_off:.2e}; "
                    f"min diagonal {min_diag:.2e}; G asymmetry {asym:.1e}; max FD error {worst_fd:.2e} (tol {fd_tol:g})")
    return _timed("Jacobian structure", run)


def check_stochastic_order(rng, rays: int = 20, pairs: int = 5, max_n: int = 12,
                           margin: float = 1e-12) -> CheckResult:
    def run():
        worst = math.inf
        for _ in range(rays):
            q = random_popularity(rng, int(rng.integers(2, max_n + 1)))
            for _ in range(pairs):
                t1, t2 = sorted(rng.uniform(0.0, 1.0, size=2))
                if t1 == 0.0 or t1 == t2:
                    continue
                lo = search_cost_distribution(ray_point(q, float(t1))).cdf[:-1]
                hi = search_cost_distribution(ray_point(q, float(t2))).cdf[:-1]
                worst = min(worst, float((hi - lo).min()))
        return worst > margin, f"min cdf gain {worst:.3e} over {rays} rays x {pairs} pairs (must exceed {margin:g})"
    return _timed("stochastic order along rays", run)


def check_simulation(rng, count: int = 10, max_n: int = 6, samples: int = 100_000,
                     steps: int = 1_000_000, z: float = 4.0) -> CheckResult:
    def run():
        worst = 0.0
        for _ in range(count):
            p, params = random_instance(rng, 2, max_n)
            seed = int(rng.integers(0, 2 ** 63))
            exact_h = hit_rate_residual(p, params).value
            exact_pmf = search_cost_distribution(p).pmf
            for res in (estimate_hit_rate_stationary(p, params, SimConfig(seed=seed, samples=samples)),
                        simulate_mtf_chain(p, params, SimConfig(seed=seed, steps=steps))):
                worst = max(worst, abs(res.hit_rate_estimate - exact_h) / res.std_error)
                se = res.pmf_std_error
                live = se > 0
                zs = np.abs(res.empirical_pmf() - exact_pmf)[live] / se[live]
                worst = max(worst, float(zs.max()) if zs.size else 0.0)
        return worst <= z, f"max |z| = {worst:.2f} over hit rates and pmf bins (limit {z:g})"
    return _timed("simulation agreement", run)


def random_nondecreasing(rng, n: int) -> np.ndarray:
    steps = rng.exponential(size=n - 1) * (rng.uniform(size=n - 1) < 0.7)
    if not steps.any():
        steps[rng.integers(0, n - 1)] = 1.0
    return rng.normal() + np.concatenate([[0.0], np.cumsum(steps)])


def check_monotone_functionals(rng, rays: int = 10, functionals: int = 20, max_n: int = 10) -> CheckResult:
    def run():
        worst, const_err = math.inf, 0.0
        for _ in range(rays):
            q = random_popularity(rng, int(rng.integers(2, max_n + 1)))
            thetas = np.sort(rng.uniform(0.05, 1.0, size=4))
            dists = [search_cost_distribution(ray_point(q, float(t))) for t in thetas]
            for _ in range(functionals):
                g = random_nondecreasing(rng, q.n)
                vals = [expected_cost_functional(q, g, dist=d) for d in dists]
                worst = min(worst, float(-np.diff(vals).min()))
            const = [expected_cost_functional(q, np.full(q.n, 3.5), dist=d) for d in dists]
            const_err = max(const_err, max(abs(v - 3.5) for v in const))
        ok = worst > 0 and const_err <= 1e-12
        return ok, f"min decrease of E g(D) {worst:.3e}; constant-g error {const_err:.1e}"
    return _timed("monotone functionals", run)


def check_occupancy(rng, count: int = 100, max_n: int = 7, tol: float = 1e-10) -> CheckResult:
    max_n = min(max_n, ORACLE_CAP)

    def run():
        worst_sum, worst_h, worst_bf, order_viol, below = 0.0, 0.0, 0.0, 0.0, math.inf
        for _ in range(count):
            p, params = random_instance(rng, 2, max_n)
            pi = occupancy_per_item(p, params).pi
            h = hit_rate_residual(p, params).value
            worst_sum = max(worst_sum, abs(pi.sum() - params.capacity))
            worst_h = max(worst_h, abs(float(p.probs @ pi) - h))
            worst_bf = max(worst_bf, float(np.abs(pi - brute_force_occupancy(p, params).pi).max()))
            srt = pi[np.argsort(-p.probs, kind="stable")]
            order_viol = max(order_viol, float(np.diff(srt).max(initial=0.0)))
            below = min(below, h - params.capacity / p.n)
        ok = max(worst_sum, worst_h, worst_bf) <= tol and order_viol <= 1e-12 and below >= 0
        return ok, (f"sum pi error {worst_sum:.1e}; sum p pi error {worst_h:.1e}; brute-force pi error "
                    f"{worst_bf:.1e} (tol {tol:g}); ordering violation {order_viol:.1e}; min H_C - C/N {below:.2e}")
    return _timed("occupancy consistency", run)


def check_rational_mode(rng, count: int = 20, max_n: int = 12, tol: float = 1e-10) -> CheckResult:
    def run():
        worst = 0.0
        for _ in range(count):
            p, params = random_instance(rng, 2, max_n)
            exact = float(hit_rate_exact(p, params))
            worst = max(worst, abs(hit_rate_residual(p, params).value - exact))
        return worst <= tol, f"max |float - rational| = {worst:.2e} over {count} instances (tol {tol:g})"
    return _timed("exact rational mode", run)


def check_negative_minor(rng, trials: int = 200, max_n: int = 6) -> CheckResult:
    def run():
        found = search_negative_minor(rng, max_n=max_n, trials=trials)
        if found is None:
            return False, f"no negative sensitivity form in {trials} random tries"
        return True, (f"demonstrator: N={found.rates.size}, C={found.capacity}, "
                      f"sensitivity form {found.value:.3e} < 0")
    return _timed("sign-indefinite minor (demonstrator)", run)


# -- suite ----------------------------------------------------------------------


def run_suite(seed: int = 0, max_n: int = 6, full: bool = False) -> List[CheckResult]:
    """Run every check; ``full`` switches from seconds-scale to minutes-scale sizes."""
    rng = np.random.default_rng(seed)
    oracle_n = min(max_n, ORACLE_CAP) if not full else ORACLE_CAP
    n = max(max_n, 12) if full else max_n
    scale = 1 if full else 0
    pick = (lambda quick, big: big) if scale else (lambda quick, big: quick)
    return [
        check_uniform_baseline(max_n=n),
        check_endpoint_identity(rng, count=pick(100, 500), max_n=n),
        check_oracle_equivalence(rng, count=pick(40, 200), max_n=max(oracle_n, 3)),
        check_decomposition_identity(rng, count=pick(100, 500), max_n=n),
        check_kernel_positivity(rng, count=pick(200, 1000), max_n=n,
                                quad_count=pick(10, 40), quad_max_n=min(n, 6)),
        check_b_forms(rng, count=pick(100, 300)),
        check_radial_derivative(rng, rays=pick(5, 50), grid_points=pick(20, 100), max_n=min(n, 10)),
        check_two_proofs(rng, count=pick(15, 100), max_n=min(n, 8)),
        check_jacobian(rng, count=pick(5, 30), max_n=min(n, 8)),
        check_stochastic_order(rng, rays=20, max_n=n),
        check_simulation(rng, count=pick(3, 10), max_n=min(n, 6), samples=pick(20_000, 100_000),
                         steps=pick(200_000, 1_000_000)),
        check_monotone_functionals(rng, rays=pick(5, 20), max_n=min(n, 10)),
        check_occupancy(rng, count=pick(50, 200), max_n=max(oracle_n, 3)),
        check_rational_mode(rng, count=pick(5, 30), max_n=min(n, 12)),
        check_negative_minor(rng),
    ]
