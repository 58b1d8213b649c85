"""Sparsity and budget penalties on designs.

``penalty_value`` returns the bare penalty term; solvers subtract it from
the criterion scaled by the penalty's own ``alpha``, so the weight enters
the utility exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import NotDifferentiable
from .design import DesignVector

__all__ = ["Penalty", "penalty_value", "penalty_gradient", "PENALTY_KINDS"]

PENALTY_KINDS = ("l0", "l1", "smoothed-l0", "budget-equality")


@dataclass(frozen=True)
class Penalty:
    """Penalty term of kind ``kind`` with weight ``alpha``.

    ``budget`` is the target sensor count for ``budget-equality``;
    ``epsilon`` the smoothing width for ``smoothed-l0``. The plain ``l0``
    count is usable by sampling-based solvers only: it has no gradient.
    """

    kind: str
    alpha: float = 0.0
    budget: int | None = None
    epsilon: float = 1e-2

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}, options: {PENALTY_KINDS}")
        if self.alpha < 0:
            raise ValueError("penalty weight alpha must be >= 0")
        if self.kind == "budget-equality":
            if self.budget is None or self.budget < 0:
                raise ValueError("budget-equality penalty needs a non-negative budget")
        if self.kind == "smoothed-l0" and self.epsilon <= 0:
            raise ValueError("smoothed-l0 needs a positive smoothing epsilon")

    @property
    def differentiable(self) -> bool:
        return self.kind != "l0"


def penalty_value(p: Penalty, design: DesignVector) -> float:
    w = design.weights
    if p.kind == "l0":
        return float(np.count_nonzero(w))
    if p.kind == "l1":
        return float(w.sum())
    if p.kind == "smoothed-l0":
        return float(np.sum(w**2 / (w**2 + p.epsilon)))
    _check_budget(p, design)
    return float((w.sum() - p.budget) ** 2)


def penalty_gradient(p: Penalty, design: DesignVector) -> np.ndarray:
    w = design.weights
    if p.kind == "l0":
        raise NotDifferentiable("the l0 count has no gradient; use smoothed-l0")
    if p.kind == "l1":
        return np.ones_like(w)
    if p.kind == "smoothed-l0":
        return 2.0 * p.epsilon * w / (w**2 + p.epsilon) ** 2
    _check_budget(p, design)
    return 2.0 * (w.sum() - p.budget) * np.ones_like(w)


def _check_budget(p: Penalty, design: DesignVector) -> None:
    if p.budget is not None and p.budget > design.n_s:
        raise ValueError(f"budget {p.budget} exceeds the sensor count {design.n_s}")
