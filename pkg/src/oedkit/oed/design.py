"""Sensor activation vectors: binary designs and their [0, 1] relaxation."""

from __future__ import annotations

import numpy as np

__all__ = ["DesignVector", "round_design"]


class DesignVector:
    """Per-sensor activation weights in [0, 1].

    A design is *binary* when every weight is exactly 0 or 1; several
    operations (pseudo-inverse weighting, Bernoulli pmf) require that and
    reject relaxed designs.
    """

    def __init__(self, weights):
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if w.ndim != 1 or w.size < 1:
            raise ValueError("design weights must form a non-empty vector")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise ValueError("design weights must lie in [0, 1]")
        self.weights = w

    @property
    def n_s(self) -> int:
        return self.weights.size

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.weights == 0.0) | (self.weights == 1.0)))

    @property
    def active_mask(self) -> np.ndarray:
        """Boolean mask of sensors with nonzero weight."""
        return self.weights > 0.0

    @classmethod
    def ones(cls, n_s: int) -> "DesignVector":
        return cls(np.ones(n_s))

    @classmethod
    def zeros(cls, n_s: int) -> "DesignVector":
        return cls(np.zeros(n_s))

    @classmethod
    def from_index(cls, index: int, n_s: int) -> "DesignVector":
        """Design whose bit j is bit j of ``index`` (sensor j active iff set)."""
        if not 0 <= index < 2**n_s:
            raise ValueError(f"design index {index} out of range for {n_s} sensors")
        return cls([(index >> j) & 1 for j in range(n_s)])

    def to_index(self) -> int:
        """Inverse of :meth:`from_index`; requires a binary design."""
        if not self.is_binary:
            raise ValueError("only binary designs have an enumeration index")
        return int(sum(1 << j for j in range(self.n_s) if self.weights[j] == 1.0))

    def copy(self) -> "DesignVector":
        return DesignVector(self.weights.copy())

    def __repr__(self) -> str:
        return f"DesignVector({self.weights.tolist()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, DesignVector) and np.array_equal(self.weights, other.weights)


def round_design(design: DesignVector, rule: str = "threshold-half", k: int | None = None) -> DesignVector:
    """Binarize a relaxed design.

    ``threshold-half`` activates every weight >= 0.5. ``top-k`` activates the
    k largest weights, breaking ties towards the lowest sensor index.
    """
    if design.is_binary:
        return design.copy()
    if rule == "threshold-half":
        return DesignVector((design.weights >= 0.5).astype(float))
    if rule == "top-k":
        if k is None:
            raise ValueError("top-k rounding needs k")
        if not 0 <= k <= design.n_s:
            raise ValueError(f"k={k} out of range for {design.n_s} sensors")
        # Stable sort on descending weight keeps the lowest index first on ties.
        order = np.argsort(-design.weights, kind="stable")
        out = np.zeros(design.n_s)
        out[order[:k]] = 1.0
        return DesignVector(out)
    raise ValueError(f"unknown rounding rule {rule!r}")
