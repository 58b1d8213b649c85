"""Point observation operators: selection and interpolation stencils."""

from __future__ import annotations

import numpy as np

from .core import ObservationVector, values_of

__all__ = ["PointObservationOperator"]


class PointObservationOperator:
    """Linear restriction of a state onto sensor locations.

    Each sensor is a stencil: a list of ``(state_index, weight)`` pairs whose
    weights sum to one. A sensor sitting on a grid node is the unit stencil
    ``[(node, 1.0)]``, which makes observation a pure selection.
    """

    is_linear = True

    def __init__(self, stencils: list[list[tuple[int, float]]], n_state: int):
        if n_state < 1:
            raise ValueError("n_state must be >= 1")
        matrix = np.zeros((len(stencils), n_state))
        for row, stencil in enumerate(stencils):
            if not stencil:
                raise ValueError(f"sensor {row} has an empty stencil")
            for index, weight in stencil:
                if not 0 <= index < n_state:
                    raise ValueError(f"sensor {row} references state index {index} >= {n_state}")
                matrix[row, index] += weight
            total = matrix[row].sum()
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"sensor {row} stencil weights sum to {total}, expected 1")
        self.matrix = matrix
        self.stencils = [list(s) for s in stencils]
        self.n_state = n_state
        self.n_obs = len(stencils)

    @classmethod
    def identity(cls, n_state: int) -> "PointObservationOperator":
        """Observe every state entry directly."""
        return cls([[(i, 1.0)] for i in range(n_state)], n_state)

    @classmethod
    def from_indices(cls, indices, n_state: int) -> "PointObservationOperator":
        """Pure selection of the given state indices, one sensor each."""
        return cls([[(int(i), 1.0)] for i in indices], n_state)

    @classmethod
    def from_points(cls, points, grid) -> "PointObservationOperator":
        """Sensors at physical coordinates, interpolated on a model grid.

        ``grid`` must provide ``interpolation_stencil(point)`` (bilinear on
        2-D grids) and ``n_state``.
        """
        stencils = [grid.interpolation_stencil(p) for p in points]
        return cls(stencils, grid.n_state)

    def observe(self, x) -> ObservationVector:
        time = getattr(x, "time", None)
        values = values_of(x)
        if values.size != self.n_state:
            raise ValueError(f"state has size {values.size}, expected {self.n_state}")
        return ObservationVector(self.matrix @ values, time)

    def observe_adjoint(self, d) -> np.ndarray:
        values = values_of(d)
        if values.size != self.n_obs:
            raise ValueError(f"observation has size {values.size}, expected {self.n_obs}")
        return self.matrix.T @ values
