"""Optimal experimental design for Bayesian inverse problems.

Building blocks for sensor-placement experiments: simulation models with
adjoints, Gaussian error models, variational (4DVar-style) and closed-form
inversion, and three design solvers (continuous relaxation, stochastic
binary optimization, brute-force enumeration), plus a config-driven CLI.
"""

__version__ = "0.1.0"
