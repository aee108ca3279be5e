"""Absorption probabilities of obliquely reflected Brownian motion in a wedge."""

from .absorption import (
    AffineExponentialSum,
    ExponentialSum,
    ab_chain,
    absorption_function,
    absorption_probability,
    boundary_marginals,
    c_coefficients,
    double_root_alpha2,
    double_root_sum,
    exponential_sum,
    residual_suite,
)
from .config import DEFAULT, Tolerances
from .decoupling import DecouplingPair, decoupling_pair, eval_P, eval_Q, simple_root_check
from .errors import *  # noqa: F401,F403
from .kernel import KernelGeometry, K, branch_points, k1, k1star, k2, k2star, special_points, uniform_xy
from .laplace import LaplaceSolution, build_L, build_S, gluing_function, laplace_solution
from .mcoracle import McEstimate, SimConfig, estimate, estimate_halfline, run_path, step
from .model import (
    QuadrantModel,
    TransformClass,
    WedgeModel,
    classify,
    find_dr,
    model_from_dict,
    quadrant_to_wedge,
    wedge_to_quadrant,
)

__version__ = "0.1.0"
