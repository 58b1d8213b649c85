"""State and observation containers plus the shared time-stepping loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import TimeOffLattice

__all__ = ["StateVector", "ObservationVector", "TimeGrid", "integrate", "values_of"]


def _finite_vector(values) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"expected a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector contains non-finite entries")
    return arr


@dataclass
class StateVector:
    """Discretized model state, optionally tagged with the simulation time."""

    values: np.ndarray
    time: float | None = None

    def __post_init__(self):
        self.values = _finite_vector(self.values)

    @property
    def size(self) -> int:
        return self.values.size

    def copy(self) -> "StateVector":
        return StateVector(self.values.copy(), self.time)


@dataclass
class ObservationVector:
    """Values observed at one time instance."""

    values: np.ndarray
    time: float | None = None

    def __post_init__(self):
        self.values = _finite_vector(self.values)

    @property
    def size(self) -> int:
        return self.values.size

    def copy(self) -> "ObservationVector":
        return ObservationVector(self.values.copy(), self.time)


def values_of(x) -> np.ndarray:
    """Raw array behind a StateVector/ObservationVector, or the array itself."""
    if isinstance(x, (StateVector, ObservationVector)):
        return x.values
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time lattice t0, t0 + dt, ..., t0 + n_steps * dt."""

    t0: float
    dt: float
    n_steps: int
    lattice_tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be non-negative")

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * self.n_steps

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    def index_of(self, t: float) -> int:
        """Lattice index of ``t``; raises TimeOffLattice when it misses the lattice."""
        i = int(round((t - self.t0) / self.dt))
        if i < 0 or i > self.n_steps or abs(self.t0 + i * self.dt - t) > self.lattice_tol:
            raise TimeOffLattice(
                f"time {t!r} is not on the lattice t0={self.t0}, dt={self.dt}, "
                f"n_steps={self.n_steps}"
            )
        return i


def integrate(model, x0, window: TimeGrid) -> list[StateVector]:
    """March ``model`` forward from ``x0`` over ``window``.

    Returns the full trajectory, ``trajectory[k]`` holding the state after k
    steps with its time stamp; ``trajectory[0]`` is a copy of the initial
    state at ``window.t0``.
    """
    x = values_of(x0)
    if x.size != model.n_state:
        raise ValueError(f"initial state has size {x.size}, model expects {model.n_state}")
    times = window.times()
    trajectory = [StateVector(x.copy(), float(times[0]))]
    for k in range(1, window.n_steps + 1):
        x = model.step(x)
        trajectory.append(StateVector(x, float(times[k])))
    return trajectory
