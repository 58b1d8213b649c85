"""Projected-gradient solver on the [0, 1] relaxation of the design space."""

from __future__ import annotations

import numpy as np

from ..exceptions import NonConvergence, NonDifferentiablePenalty
from .criteria import Criterion, make_relaxed_utility
from .design import DesignVector, round_design
from .penalties import Penalty
from .result import OEDResult

__all__ = ["solve_relaxed"]


def solve_relaxed(
    criterion: Criterion,
    penalty: Penalty | None,
    ip,
    step0: float = 0.1,
    tau: float = 50.0,
    max_iter: int = 500,
    tol: float = 1e-6,
    init=None,
    rounding: str = "threshold-half",
    k: int | None = None,
) -> OEDResult:
    """Maximize the penalized criterion over relaxed designs in [0, 1]^n_s.

    Plain projected gradient ascent with the decaying step schedule
    ``step0 / (1 + n / tau)``. Stationarity is measured by the projected
    unit-step residual ``max |clip(w + grad) - w|``; iterations stop once it
    falls below ``tol``. The final relaxed design is rounded to a binary one
    (``threshold-half`` by default, ``top-k`` with ``k``) and the reported
    optimum is the utility of that binary design; the raw relaxed iterate is
    kept on the result as ``relaxed_design``.

    Raises
    ------
    NonDifferentiablePenalty
        For the plain l0 penalty, which has no gradient. Use smoothed-l0.
    NonConvergence
        When the residual never meets ``tol``; carries the best iterate.
    """
    if penalty is not None and not penalty.differentiable:
        raise NonDifferentiablePenalty(
            "the relaxation solver needs a differentiable objective; "
            f"penalty kind {penalty.kind!r} has no gradient"
        )
    n_s = ip.noise.n_s
    value, gradient = make_relaxed_utility(criterion, penalty, ip)

    if init is not None:
        weights = np.clip(np.asarray(init, dtype=float).copy(), 0.0, 1.0)
    else:
        weights = 0.5 * np.ones(n_s)

    trajectory: list[tuple[int, np.ndarray, float]] = []
    best_weights, best_value = weights.copy(), -np.inf
    converged = False
    for n in range(max_iter):
        grad = gradient(weights)
        current = value(weights)
        trajectory.append((n, weights.copy(), current))
        if current > best_value:
            best_weights, best_value = weights.copy(), current
        residual = float(np.max(np.abs(np.clip(weights + grad, 0.0, 1.0) - weights)))
        if residual <= tol:
            converged = True
            break
        step = step0 / (1.0 + n / tau)
        weights = np.clip(weights + step * grad, 0.0, 1.0)

    if not converged:
        relaxed = DesignVector(best_weights)
        rounded = round_design(relaxed, rounding, k)
        partial = OEDResult(
            optimal_design=rounded,
            optimal_value=float(value(rounded.weights)),
            solver="relaxed",
            trajectory=trajectory,
            relaxed_design=relaxed,
            best_iterate_design=relaxed,
            best_iterate_value=best_value,
            converged=False,
        )
        raise NonConvergence(
            f"projected gradient made residual {residual:.3e} > tol {tol:.1e} "
            f"after {max_iter} iterations",
            result=partial,
        )

    relaxed = DesignVector(weights)
    rounded = round_design(relaxed, rounding, k)
    return OEDResult(
        optimal_design=rounded,
        optimal_value=float(value(rounded.weights)),
        solver="relaxed",
        trajectory=trajectory,
        relaxed_design=relaxed,
        best_iterate_design=DesignVector(best_weights),
        best_iterate_value=best_value,
        converged=True,
    )
