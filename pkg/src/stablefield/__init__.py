"""stablefield: linear random fields with heavy-tailed innovations.

Builds weight fields over lattice regions, solves for the tail-energy
normalizer, and validates stable weak-convergence and local-limit behavior
by Monte Carlo against quadrature oracles.
"""

__version__ = "0.1.0"

from .coeffs import (
    Anisotropic,
    CoefficientModel,
    DoublyGeometric,
    Farima,
    Finite,
    Isotropic,
    summability_report,
)
from .innovations import ExactStable, InnovationModel, ParetoMix, estimate_c_alpha
from .lattice import Rect, RegionUnion, anisotropic_box, cube, explicit, scattered, symmetric_box
from .montecarlo import SimPlan, SimResult, interval_prob, ks_against, llt_estimate, simulate
from .normalizer import NormalizerResult, check_conditions, limit_law, solve_Bn
from .slowvary import SlowVary, constant, log_power, pareto_canonical, tabulated, weighted_term
from .stable import StableLaw, StableLimitLaw
from .weights import WeightField, build_weights, delta_bound_check, diagnostics, increment

__all__ = [
    "Anisotropic", "CoefficientModel", "DoublyGeometric", "Farima", "Finite",
    "Isotropic", "summability_report", "ExactStable", "InnovationModel",
    "ParetoMix", "estimate_c_alpha", "Rect", "RegionUnion", "anisotropic_box",
    "cube", "explicit", "scattered", "symmetric_box", "SimPlan", "SimResult",
    "interval_prob", "ks_against", "llt_estimate", "simulate",
    "NormalizerResult", "check_conditions", "limit_law", "solve_Bn",
    "SlowVary", "constant", "log_power", "pareto_canonical", "tabulated",
    "weighted_term", "StableLaw", "StableLimitLaw", "WeightField",
    "build_weights", "delta_bound_check", "diagnostics", "increment",
]
