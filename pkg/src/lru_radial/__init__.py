"""Exact stationary LRU / move-to-front analysis under independent requests.

Hit rates, occupancy probabilities and stack-depth laws from subset
expansions, the positive pair kernels behind radial monotonicity, the
occupancy Jacobian, and Monte Carlo cross-checks.
"""

from .core import (
    ModelParams,
    PopularityVector,
    RayPath,
    ray_point,
    residual_coefficient,
    uniform,
    validate_popularity,
    zipf_vector,
)
from .errors import ConditioningWarning, ModelError, NonPositiveKernel, QuadratureNotConverged
from .exact import (
    HitRateResult,
    OccupancyProfile,
    SearchCostDistribution,
    brute_force_hit_rate,
    expected_cost_functional,
    hit_rate_exact,
    hit_rate_residual,
    occupancy_per_item,
    search_cost_distribution,
    SubsetTerm,
    subset_terms,
)
from .jacobian import (
    RateVector,
    master_identity_derivative,
    occupancy_jacobian,
    poisson_binomial_pmf,
    sensitivity_G,
)
from .kernel import (
    b_polynomial,
    hit_rate_pair_square,
    kernel_matrix,
    kernel_split,
    pair_coeff_J,
    pair_kernel_K,
    radial_derivative,
)
from .quadrature import QuadratureConfig
from .simulate import SimConfig, SimResult, estimate_hit_rate_stationary, simulate_mtf_chain

__version__ = "0.1.0"
