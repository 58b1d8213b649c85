"""Linear time-dependent model x_{n+1} = A x_n with a dense system matrix."""

from __future__ import annotations

import numpy as np

from .core import values_of

__all__ = ["LinearTimeDependentModel", "toy_linear"]

#: Spectral radius cap applied when generating random toy systems. Mild
#: growth (> 1) is allowed so the dynamics are not forced to be dissipative,
#: but unbounded growth over long windows is prevented.
TOY_SPECTRAL_RADIUS_CAP = 1.05


class LinearTimeDependentModel:
    """Dense linear dynamics advanced one fixed step at a time.

    The system matrix need not be symmetric. The spectral radius is computed
    once at construction purely as a diagnostic.
    """

    is_linear = True

    def __init__(self, a_matrix: np.ndarray, dt: float, seed: int | None = None):
        a = np.asarray(a_matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"system matrix must be square, got shape {a.shape}")
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.a_matrix = a
        self.n_state = a.shape[0]
        self.dt = float(dt)
        self.seed = seed
        self.spectral_radius = float(np.abs(np.linalg.eigvals(a)).max())

    def step(self, x) -> np.ndarray:
        x = values_of(x)
        if x.shape[0] != self.n_state:
            raise ValueError(f"state has size {x.shape[0]}, expected {self.n_state}")
        return self.a_matrix @ x

    def adjoint_step(self, lam) -> np.ndarray:
        """Transpose action A^T lam; accepts a vector or a column block."""
        lam = values_of(lam)
        if lam.shape[0] != self.n_state:
            raise ValueError(f"adjoint state has size {lam.shape[0]}, expected {self.n_state}")
        return self.a_matrix.T @ lam

    def dense_operator(self) -> np.ndarray:
        """The one-step propagator as a dense matrix."""
        return self.a_matrix.copy()


def toy_linear(n_state: int, dt: float, seed: int) -> LinearTimeDependentModel:
    """Reproducible random linear model for twin experiments.

    Entries of A are drawn i.i.d. uniform on [-1, 1] from the given seed and
    the matrix is rescaled, when needed, so its spectral radius does not
    exceed :data:`TOY_SPECTRAL_RADIUS_CAP`. The same seed always yields the
    same matrix.
    """
    if n_state < 1:
        raise ValueError("n_state must be >= 1")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(n_state, n_state))
    rho = float(np.abs(np.linalg.eigvals(a)).max())
    if rho > TOY_SPECTRAL_RADIUS_CAP:
        a *= TOY_SPECTRAL_RADIUS_CAP / rho
    return LinearTimeDependentModel(a, dt=dt, seed=seed)
