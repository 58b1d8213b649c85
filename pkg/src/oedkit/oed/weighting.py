"""Design-weighted observation precision operators.

Activating or deactivating sensors reshapes the observation noise model.
Two equivalent constructions are provided:

* binary designs: the precision is the pseudo-inverse of ``D R D`` with
  ``D = diag(design)``, i.e. the inverse of the noise covariance restricted
  to the active sensors, padded with zero rows/columns elsewhere;
* relaxed designs in [0, 1]: a Hadamard weighting of ``R`` whose diagonal is
  inflated like ``R_ii / w_i^2`` as a weight shrinks, so the corresponding
  precision fades out continuously and matches the binary construction in
  the limit of binary weights.

The two paths agree exactly (to rounding) whenever the design is binary.
"""

from __future__ import annotations

import numpy as np

from .. import linalg
from ..exceptions import NonBinaryDesign
from .design import DesignVector

__all__ = [
    "weighted_precision_binary",
    "weighted_precision_relaxed",
    "WeightedNoiseModel",
    "WEIGHTING_MODES",
]

WEIGHTING_MODES = ("binary-pseudoinverse", "hadamard-relaxed")


def weighted_precision_binary(base_cov: np.ndarray, design: DesignVector) -> np.ndarray:
    """Precision of the active-sensor block of ``base_cov``, zero elsewhere."""
    base_cov = np.asarray(base_cov, dtype=float)
    _check_sizes(base_cov, design)
    if not design.is_binary:
        raise NonBinaryDesign("pseudo-inverse weighting requires a binary design")
    d = np.diag(design.weights)
    return linalg.masked_spd_pseudo_inverse(d @ base_cov @ d, design.weights == 1.0)


def weighted_precision_relaxed(base_cov: np.ndarray, design: DesignVector) -> np.ndarray:
    """Hadamard-weighted precision, continuous over relaxed designs.

    On the block of sensors with nonzero weight w, the weighted covariance is
    ``C_ij = w_i w_j R_ij`` off the diagonal and ``C_ii = R_ii / w_i^2`` on
    it; the returned matrix is ``C^{-1}`` embedded at full size with exact
    zeros at zero-weight sensors. The diagonal inflation is what drives a
    sensor's precision to zero as its weight approaches zero.
    """
    base_cov = np.asarray(base_cov, dtype=float)
    _check_sizes(base_cov, design)
    w = design.weights
    active = np.flatnonzero(w > 0.0)
    out = np.zeros_like(base_cov)
    if active.size == 0:
        return out
    wa = w[active]
    hadamard = np.outer(wa, wa)
    np.fill_diagonal(hadamard, 1.0 / wa**2)
    weighted_cov = hadamard * base_cov[np.ix_(active, active)]
    out[np.ix_(active, active)] = linalg.spd_inverse(weighted_cov)
    return out


def _check_sizes(base_cov: np.ndarray, design: DesignVector) -> None:
    if base_cov.shape[0] != design.n_s:
        raise ValueError(
            f"design has {design.n_s} weights but the noise covariance is "
            f"{base_cov.shape[0]}x{base_cov.shape[1]}"
        )


class WeightedNoiseModel:
    """Gaussian observation noise with a design-controlled precision.

    Wraps a base Gaussian measure (covariance R) together with the current
    design and the weighting mode. One weight is attached to each
    observation-space entry and applies identically at every observation
    time, so the space-time weighting stays block diagonal over times.

    The design can be swapped at any point of a study; doing so invalidates
    the cached precision. An all-ones design reproduces ``R^{-1}`` exactly in
    both modes.
    """

    def __init__(self, base, design: DesignVector | None = None, mode: str = "binary-pseudoinverse"):
        if mode not in WEIGHTING_MODES:
            raise ValueError(f"unknown weighting mode {mode!r}, options: {WEIGHTING_MODES}")
        self.base = base
        self.mode = mode
        self._design = design if design is not None else DesignVector.ones(base.dim)
        if self._design.n_s != base.dim:
            raise ValueError(
                f"design has {self._design.n_s} weights, base noise dimension is {base.dim}"
            )
        self._precision: np.ndarray | None = None

    @property
    def n_s(self) -> int:
        return self.base.dim

    @property
    def design(self) -> DesignVector:
        return self._design

    def set_design(self, design: DesignVector) -> None:
        if design.n_s != self.base.dim:
            raise ValueError(f"design has {design.n_s} weights, expected {self.base.dim}")
        self._design = design
        self._precision = None

    def with_design(self, design: DesignVector, mode: str | None = None) -> "WeightedNoiseModel":
        """New model sharing the base measure but holding a different design."""
        return WeightedNoiseModel(self.base, design, mode or self.mode)

    def precision(self) -> np.ndarray:
        if self._precision is None:
            if self.mode == "binary-pseudoinverse":
                self._precision = weighted_precision_binary(self.base.covariance, self._design)
            else:
                self._precision = weighted_precision_relaxed(self.base.covariance, self._design)
        return self._precision

    def sample(self, rng=None) -> np.ndarray:
        """Draw from the base (unweighted) noise measure."""
        return self.base.sample(rng)
