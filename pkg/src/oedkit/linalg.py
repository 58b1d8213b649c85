"""Dense kernels for symmetric matrices plus randomized trace estimation.

Everything here works on plain ``numpy`` arrays. Matrices that carry an
SPD contract are validated through their Cholesky factorization rather
than through eigenvalues; failures raise :class:`NotPositiveDefinite`.
All functions are pure: none of them mutate their arguments, and the
randomized estimator takes its generator explicitly.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

from .exceptions import NotPositiveDefinite

__all__ = [
    "symmetrize",
    "cholesky_factor",
    "logdet_spd",
    "trace",
    "solve_spd",
    "spd_inverse",
    "masked_spd_pseudo_inverse",
    "hutchinson_trace",
    "finite_difference_gradient",
]

#: Relative asymmetry above which a matrix is rejected instead of symmetrized.
SYMMETRY_RTOL = 1e-12


def symmetrize(m: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Return the symmetric part ``(m + m.T) / 2`` of a nearly symmetric matrix.

    Asymmetry beyond ``rtol`` (relative to the largest entry) is treated as a
    caller bug and raises ``ValueError`` rather than being silently averaged
    away.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    gap = float(np.abs(m - m.T).max())
    if gap > rtol * scale:
        raise ValueError(
            f"matrix is asymmetric beyond tolerance: |m - m.T| = {gap:.3e} "
            f"(relative {gap / scale:.3e} > {rtol:.1e})"
        )
    return 0.5 * (m + m.T)


def cholesky_factor(m: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == m``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is non-positive, i.e. ``m`` is not SPD.
    """
    m = np.asarray(m, dtype=float)
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(f"matrix of size {m.shape[0]} is not SPD: {err}") from err


def logdet_spd(m: np.ndarray) -> float:
    """log(det(m)) for SPD ``m``, computed as twice the log-sum of Cholesky pivots."""
    diag = np.diagonal(cholesky_factor(m))
    return 2.0 * float(np.log(diag).sum())


def trace(m: np.ndarray) -> float:
    """Sum of diagonal entries, accumulated left to right."""
    m = np.asarray(m, dtype=float)
    total = 0.0
    for value in np.diagonal(m):
        total += float(value)
    return total


def solve_spd(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``m @ x = b`` for SPD ``m`` via Cholesky."""
    lower = cholesky_factor(m)
    return scipy.linalg.cho_solve((lower, True), np.asarray(b, dtype=float))


def spd_inverse(m: np.ndarray) -> np.ndarray:
    """Dense inverse of an SPD matrix, symmetrized to kill rounding skew."""
    inv = solve_spd(m, np.eye(np.asarray(m).shape[0]))
    return 0.5 * (inv + inv.T)


def masked_spd_pseudo_inverse(m: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of ``m`` restricted to the active rows/columns of ``mask``.

    Returns the full-size matrix whose active block is the inverse of
    ``m[active, active]`` and whose inactive rows and columns are exactly
    zero. An all-false mask yields the zero matrix: with no active entries
    the weighted data misfit vanishes, so the weighting operator is the
    zero operator rather than an error.

    Parameters
    ----------
    m : (n, n) array
        Symmetric matrix whose active submatrix must be SPD.
    mask : (n,) boolean array
        Active entries.
    """
    m = np.asarray(m, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    n = m.shape[0]
    if mask.shape != (n,):
        raise ValueError(f"mask of shape {mask.shape} does not match matrix size {n}")
    out = np.zeros_like(m)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return out
    block_inv = spd_inverse(m[np.ix_(idx, idx)])
    out[np.ix_(idx, idx)] = block_inv
    return out


def hutchinson_trace(
    apply: Callable[[np.ndarray], np.ndarray],
    n: int,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Randomized trace estimate ``mean(z.T @ apply(z))`` over Rademacher probes.

    ``apply`` must be a linear matrix action. Rademacher (+-1) probes are
    used instead of Gaussian ones; they have lower variance whenever the
    diagonal dominates, and make the estimate exact for the identity. The
    result is deterministic for a fixed generator state.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    total = 0.0
    for _ in range(samples):
        z = 2.0 * rng.integers(0, 2, size=n).astype(float) - 1.0
        total += float(z @ np.asarray(apply(z), dtype=float))
    return total / samples


def finite_difference_gradient(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    h: float = 1e-6,
) -> np.ndarray:
    """Central-difference gradient ``(f(x + h e_i) - f(x - h e_i)) / 2h``."""
    if h <= 0:
        raise ValueError("step h must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad
