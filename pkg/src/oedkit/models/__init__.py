"""Simulation models, observation operators, and probabilistic error models."""

from .core import ObservationVector, StateVector, TimeGrid, integrate
from .linear import LinearTimeDependentModel, toy_linear
from .observation import PointObservationOperator
from .gaussian import GaussianMeasure, bilaplacian_prior, neumann_laplacian
from .advection_diffusion import AdvectionDiffusionModel

__all__ = [
    "StateVector",
    "ObservationVector",
    "TimeGrid",
    "integrate",
    "LinearTimeDependentModel",
    "toy_linear",
    "PointObservationOperator",
    "GaussianMeasure",
    "bilaplacian_prior",
    "neumann_laplacian",
    "AdvectionDiffusionModel",
]
