"""Gaussian error models and Laplacian-squared (smoothness) priors."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .. import linalg
from .core import values_of

__all__ = ["GaussianMeasure", "neumann_laplacian", "bilaplacian_prior"]


class GaussianMeasure:
    """Gaussian measure with dense SPD covariance.

    Serves as prior, observation noise model, and posterior. The covariance
    may be passed either as a full matrix or as a vector of per-coordinate
    variances. Construction validates SPD-ness by factorizing once; the
    factor is reused by sampling, log-density, and precision applications.

    A measure built with an explicit ``seed`` owns a private generator and
    reproduces the same sample stream in every process; ``sample`` also
    accepts an external generator, which leaves the private stream untouched.
    """

    def __init__(self, mean, covariance, seed: int | None = None):
        self.mean = values_of(mean)
        cov = np.asarray(covariance, dtype=float)
        if cov.ndim == 1:
            cov = np.diag(cov)
        cov = linalg.symmetrize(cov)
        if cov.shape[0] != self.mean.size:
            raise ValueError(
                f"covariance of size {cov.shape[0]} does not match mean of size {self.mean.size}"
            )
        self.covariance = cov
        self._chol = linalg.cholesky_factor(cov)
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self._precision: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.mean.size

    def sample(self, rng: np.random.Generator | None = None) -> np.ndarray:
        """Draw mean + L z with z standard normal and L the Cholesky factor."""
        gen = self._rng if rng is None else rng
        z = gen.standard_normal(self.dim)
        return self.mean + self._chol @ z

    def log_pdf_unnormalized(self, v) -> float:
        """-1/2 (v - mean)^T C^{-1} (v - mean), without the normalizing constant."""
        r = values_of(v) - self.mean
        w = scipy.linalg.solve_triangular(self._chol, r, lower=True)
        return -0.5 * float(w @ w)

    def precision_apply(self, v) -> np.ndarray:
        """C^{-1} v through the cached factorization."""
        return scipy.linalg.cho_solve((self._chol, True), values_of(v))

    def precision_matrix(self) -> np.ndarray:
        """Dense C^{-1}; assembled on first use and cached."""
        if self._precision is None:
            inv = scipy.linalg.cho_solve((self._chol, True), np.eye(self.dim))
            self._precision = 0.5 * (inv + inv.T)
        return self._precision


def neumann_laplacian(grid) -> np.ndarray:
    """Negative discrete Laplacian with no-flux boundaries, unit spacing.

    ``grid`` is either an int n (3-point stencil on a line) or an
    ``(nx, ny)`` pair (5-point stencil on a rectangle). Rows and columns sum
    to zero, the matrix is symmetric positive semidefinite, and the constant
    vector spans its null space.
    """
    if np.isscalar(grid):
        n = int(grid)
        if n < 1:
            raise ValueError("grid size must be >= 1")
        lap = np.zeros((n, n))
        for i in range(n - 1):
            lap[i, i] += 1.0
            lap[i + 1, i + 1] += 1.0
            lap[i, i + 1] -= 1.0
            lap[i + 1, i] -= 1.0
        return lap
    nx, ny = (int(v) for v in grid)
    if nx < 1 or ny < 1:
        raise ValueError("grid sizes must be >= 1")
    n = nx * ny
    lap = np.zeros((n, n))
    for j in range(ny):
        for i in range(nx):
            p = j * nx + i
            for q in (p + 1 if i + 1 < nx else None, p + nx if j + 1 < ny else None):
                if q is None:
                    continue
                lap[p, p] += 1.0
                lap[q, q] += 1.0
                lap[p, q] -= 1.0
                lap[q, p] -= 1.0
    return lap


def bilaplacian_prior(
    grid,
    delta: float = 0.5,
    scale: float = 1.0,
    mean=None,
    seed: int | None = None,
) -> GaussianMeasure:
    """Smoothness prior with covariance ``scale * (L + delta I)^{-2}``.

    L is the Neumann negative Laplacian of :func:`neumann_laplacian`; the
    positive shift ``delta`` makes it invertible despite the constant null
    vector, so the covariance is SPD by construction. Its eigenvalues are
    ``scale / (lambda_i + delta)^2`` over the Laplacian eigenvalues.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if scale <= 0:
        raise ValueError("scale must be positive")
    lap = neumann_laplacian(grid)
    n = lap.shape[0]
    shifted_inv = linalg.spd_inverse(lap + delta * np.eye(n))
    cov = linalg.symmetrize(scale * (shifted_inv @ shifted_inv), rtol=1e-10)
    if mean is None:
        mean = np.zeros(n)
    return GaussianMeasure(mean, cov, seed=seed)
