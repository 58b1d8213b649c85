"""Container for the outcome of a design optimization run."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .design import DesignVector

__all__ = ["OEDResult"]


@dataclass
class OEDResult:
    """Optimal design plus the solver's full audit trail.

    ``trajectory`` holds one ``(iteration, iterate, utility)`` triple per
    iteration, where the iterate is the design (relaxed solver) or the
    Bernoulli parameter vector (stochastic solver). ``optimal_value`` is the
    utility re-evaluated at the returned design. For the stochastic solver,
    ``sampled_designs`` holds the final ``(design, utility)`` sample and the
    ``best_iterate_*`` fields record the best design seen across the whole
    run, which may differ from the contractual final-sample winner.
    """

    optimal_design: DesignVector
    optimal_value: float
    solver: str
    trajectory: list[tuple[int, np.ndarray, float]] = field(default_factory=list)
    sampled_designs: list[tuple[DesignVector, float]] | None = None
    brute_force_table: list[tuple[int, float]] | None = None
    relaxed_design: DesignVector | None = None
    best_iterate_design: DesignVector | None = None
    best_iterate_value: float | None = None
    converged: bool = True

    def to_dict(self) -> dict:
        """JSON-friendly view used by the CLI result bundle."""
        out = {
            "solver": self.solver,
            "optimal_design": self.optimal_design.weights.tolist(),
            "optimal_value": self.optimal_value,
            "converged": self.converged,
            "n_iterations": len(self.trajectory),
        }
        if self.relaxed_design is not None:
            out["relaxed_design"] = self.relaxed_design.weights.tolist()
        if self.best_iterate_design is not None:
            out["best_iterate_design"] = self.best_iterate_design.weights.tolist()
            out["best_iterate_value"] = self.best_iterate_value
        return out
