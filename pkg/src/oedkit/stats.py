"""Multivariate Bernoulli policy for sampling binary sensor activations."""

from __future__ import annotations

import numpy as np

from .exceptions import NonBinaryDesign

__all__ = ["BernoulliPolicy"]


class BernoulliPolicy:
    """Independent per-coordinate Bernoulli distribution with parameter ``theta``.

    Each ``theta[i]`` is the probability that coordinate ``i`` comes out
    active (1). Parameters must be strictly interior, ``0 < theta_i < 1``:
    the score function divides by both ``theta_i`` and ``1 - theta_i``, so
    boundary values are rejected at construction instead of being patched
    downstream.
    """

    def __init__(self, theta: np.ndarray):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.ndim != 1 or theta.size < 1:
            raise ValueError("theta must be a non-empty vector")
        if np.any(theta <= 0.0) or np.any(theta >= 1.0):
            raise ValueError("theta entries must lie strictly inside (0, 1)")
        self.theta = theta

    @property
    def n(self) -> int:
        return self.theta.size

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One binary draw: coordinate i is 1 iff a uniform draw falls below theta[i]."""
        return (rng.random(self.n) < self.theta).astype(float)

    def log_pmf(self, d: np.ndarray) -> float:
        """log p(d) = sum_i d_i log(theta_i) + (1 - d_i) log(1 - theta_i)."""
        d = self._check_binary(d)
        return float(d @ np.log(self.theta) + (1.0 - d) @ np.log(1.0 - self.theta))

    def log_pmf_gradient(self, d: np.ndarray) -> np.ndarray:
        """Score function: component i is d_i/theta_i + (d_i - 1)/(1 - theta_i)."""
        d = self._check_binary(d)
        return d / self.theta + (d - 1.0) / (1.0 - self.theta)

    def _check_binary(self, d: np.ndarray) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        if d.shape != self.theta.shape:
            raise ValueError(f"design of shape {d.shape} does not match theta {self.theta.shape}")
        if not np.all((d == 0.0) | (d == 1.0)):
            raise NonBinaryDesign("Bernoulli pmf is defined on binary vectors only")
        return d
