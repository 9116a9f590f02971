"""Acceptance criteria at their stated sizes and tolerances.

Each test prints one ``[PASS]`` / ``[FAIL]`` line (visible under ``pytest -v``
and when the module is run directly) and also checks its runtime budget.
"""

import sys

import numpy as np
import pytest

from lru_radial import verify

SEED = 20240601


def _rng(k):
    return np.random.default_rng([SEED, k])


CRITERIA = [
    ("1 uniform baseline", 1.0,
     lambda: verify.check_uniform_baseline(max_n=12, tol=1e-12)),
    ("2 endpoint identity", 1.0,
     lambda: verify.check_endpoint_identity(_rng(2), count=500, max_n=12, tol=1e-12)),
    ("3 oracle equivalence", 30.0,
     lambda: verify.check_oracle_equivalence(_rng(3), count=200, max_n=7, tol=1e-10)),
    ("4 decomposition identity", 60.0,
     lambda: verify.check_decomposition_identity(_rng(4), count=500, max_n=12, tol=1e-10)),
    ("5 kernel positivity", 120.0,
     lambda: verify.check_kernel_positivity(_rng(5), count=1000, max_n=12, split_tol=1e-10,
                                            quad_count=40, quad_max_n=6, quad_tol=1e-8)),
    ("6 radial derivative", 120.0,
     lambda: verify.check_radial_derivative(_rng(6), rays=50, grid_points=100, max_n=10,
                                            rel_tol=1e-6, h=1e-5)),
    ("7 two-proof consistency", 300.0,
     lambda: verify.check_two_proofs(_rng(7), count=100, max_n=8, tol=1e-7)),
    ("8 Jacobian structure", 120.0,
     lambda: verify.check_jacobian(_rng(8), count=30, max_n=8, row_tol=1e-9, fd_tol=1e-5, h=1e-5)),
    ("9 stochastic order along rays", 10.0,
     lambda: verify.check_stochastic_order(_rng(9), rays=20, pairs=5, max_n=12, margin=1e-12)),
    ("10 simulation agreement", 120.0,
     lambda: verify.check_simulation(_rng(10), count=10, max_n=6, samples=100_000,
                                     steps=1_000_000, z=4.0)),
    ("11 monotone functionals", 10.0,
     lambda: verify.check_monotone_functionals(_rng(11), rays=20, functionals=20, max_n=10)),
]


def run_criterion(label, budget, check):
    res = check()
    in_time = res.seconds <= budget
    ok = res.passed and in_time
    line = (f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {res.detail}; "
            f"{res.seconds:.2f}s (budget {budget:g}s)")
    return ok, res, in_time, line


@pytest.mark.parametrize("label, budget, check", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(label, budget, check, capsys):
    ok, res, in_time, line = run_criterion(label, budget, check)
    with capsys.disabled():
        print("\n" + line)
    assert res.passed, line
    assert in_time, line


if __name__ == "__main__":
    results = [run_criterion(*c) for c in CRITERIA]
    for ok, _, _, line in results:
        print(line)
    sys.exit(0 if all(r[0] for r in results) else 1)
