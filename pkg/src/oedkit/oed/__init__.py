"""Experimental-design representation, criteria, penalties, and solvers."""

from .design import DesignVector, round_design
from .weighting import (
    WeightedNoiseModel,
    weighted_precision_binary,
    weighted_precision_relaxed,
)
from .penalties import Penalty, penalty_gradient, penalty_value
from .result import OEDResult
from .criteria import (
    Criterion,
    criterion_gradient,
    criterion_value,
    fisher_information,
    make_design_utility,
)
from .brute import brute_force
from .relaxed import solve_relaxed
from .stochastic import optimal_baseline, solve_stochastic

__all__ = [
    "DesignVector",
    "round_design",
    "WeightedNoiseModel",
    "weighted_precision_binary",
    "weighted_precision_relaxed",
    "Penalty",
    "penalty_value",
    "penalty_gradient",
    "Criterion",
    "criterion_value",
    "criterion_gradient",
    "fisher_information",
    "make_design_utility",
    "OEDResult",
    "brute_force",
    "solve_relaxed",
    "solve_stochastic",
    "optimal_baseline",
]
