"""Design optimality criteria over the information matrix.

For linear dynamics and Gaussian models, the information matrix for a
design zeta is

    FIM(zeta) = C_pr^{-1} + sum_n F_n^T W(zeta) F_n,

the inverse of the posterior covariance. Four scalar criteria are provided:
the trace and log-determinant of the FIM itself (to be maximized), and the
trace and log-determinant of the goal-projected posterior covariance
``P FIM^{-1} P^T`` (to be minimized). Every solver in this package maximizes
a utility, so minimization criteria enter utilities with their sign flipped;
:func:`make_design_utility` applies that orientation together with the
penalty term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import linalg
from .design import DesignVector
from .penalties import Penalty, penalty_gradient, penalty_value
from .weighting import weighted_precision_binary, weighted_precision_relaxed

__all__ = [
    "Criterion",
    "CRITERION_KINDS",
    "fisher_information",
    "criterion_value",
    "criterion_gradient",
    "make_design_utility",
    "make_relaxed_utility",
]

CRITERION_KINDS = ("a-fim", "d-fim", "a-posterior-goal", "d-posterior-goal")


@dataclass(frozen=True)
class Criterion:
    """Optimality criterion of kind ``kind`` with an optional goal operator.

    The goal operator applies to the posterior-covariance kinds only; when
    absent those criteria act on the full posterior covariance (identity
    goal).
    """

    kind: str
    goal_operator: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in CRITERION_KINDS:
            raise ValueError(f"unknown criterion kind {self.kind!r}, options: {CRITERION_KINDS}")
        if self.goal_operator is not None:
            object.__setattr__(
                self, "goal_operator", np.atleast_2d(np.asarray(self.goal_operator, dtype=float))
            )

    @property
    def orientation(self) -> str:
        """'max' for information criteria, 'min' for posterior-covariance ones."""
        return "max" if self.kind in ("a-fim", "d-fim") else "min"

    def goal_matrix(self, n_state: int) -> np.ndarray:
        if self.goal_operator is None:
            return np.eye(n_state)
        if self.goal_operator.shape[1] != n_state:
            raise ValueError(
                f"goal operator has {self.goal_operator.shape[1]} columns, "
                f"parameter dimension is {n_state}"
            )
        return self.goal_operator


def _weighted_precision(ip, design: DesignVector, mode: str) -> np.ndarray:
    base_cov = ip.noise.base.covariance
    if mode == "auto":
        mode = "binary-pseudoinverse" if design.is_binary else "hadamard-relaxed"
    if mode == "binary-pseudoinverse":
        return weighted_precision_binary(base_cov, design)
    if mode == "hadamard-relaxed":
        return weighted_precision_relaxed(base_cov, design)
    raise ValueError(f"unknown weighting mode {mode!r}")


def fisher_information(ip, design: DesignVector, mode: str = "auto") -> np.ndarray:
    """Information matrix of the inverse problem under the given design."""
    ip.require("model", "obs_op", "prior", "noise", "window")
    return ip.information_matrix(_weighted_precision(ip, design, mode))


def criterion_value(c: Criterion, ip, design: DesignVector, mode: str = "auto") -> float:
    """Scalar criterion at a design; see :class:`Criterion` for orientation."""
    fim = fisher_information(ip, design, mode)
    if c.kind == "a-fim":
        return linalg.trace(fim)
    if c.kind == "d-fim":
        return linalg.logdet_spd(fim)
    p = c.goal_matrix(fim.shape[0])
    goal_cov = p @ linalg.spd_inverse(fim) @ p.T
    goal_cov = linalg.symmetrize(goal_cov, rtol=1e-8)
    if c.kind == "a-posterior-goal":
        return linalg.trace(goal_cov)
    return linalg.logdet_spd(goal_cov)


def criterion_gradient(c: Criterion, ip, design: DesignVector) -> np.ndarray:
    """Analytic gradient of :func:`criterion_value` under the relaxed weighting.

    Derivation: with C(w) the Hadamard-weighted covariance on the active
    block and W = C^{-1}, a perturbation of weight k gives
    dW = -W dC_k W, and for a criterion with matrix sensitivity
    S = dPsi/dFIM the chain rule collapses to traces of dC_k against
    M = W (sum_n F_n S F_n^T) W. dC_k has row/column k entries w_j R_kj and
    diagonal entry -2 R_kk / w_k^3, hence per active sensor k

        dPsi/dw_k = -2 [ sum_{j != k} M_kj R_kj w_j - M_kk R_kk / w_k^3 ].

    At w_k = 0 exactly the sensor sits outside the active block; the
    one-sided limit of the derivative along the active-block restriction is
    zero (the sensor's precision contribution enters at second order), and
    zero is what this function returns for such components.
    """
    ip.require("model", "obs_op", "prior", "noise", "window")
    w = design.weights
    n_s = design.n_s
    base_cov = ip.noise.base.covariance
    weight = weighted_precision_relaxed(base_cov, design)
    fim = ip.information_matrix(weight)

    if c.kind == "a-fim":
        sens = np.eye(fim.shape[0])
    elif c.kind == "d-fim":
        sens = linalg.spd_inverse(fim)
    else:
        cov = linalg.spd_inverse(fim)
        p = c.goal_matrix(fim.shape[0])
        if c.kind == "a-posterior-goal":
            sens = -cov @ p.T @ p @ cov
        else:
            goal_cov = linalg.symmetrize(p @ cov @ p.T, rtol=1e-8)
            middle = linalg.solve_spd(goal_cov, p @ cov)
            sens = -(p @ cov).T @ middle

    t_matrix = np.zeros((n_s, n_s))
    for _, ft in ip.forward_operator_transposes():
        t_matrix += ft.T @ sens @ ft
    m_matrix = weight @ t_matrix @ weight
    q_matrix = m_matrix * base_cov

    active = w > 0.0
    grad = np.zeros(n_s)
    cross = q_matrix @ w - np.diagonal(q_matrix) * w
    grad[active] = -2.0 * (
        cross[active]
        - np.diagonal(m_matrix)[active] * np.diagonal(base_cov)[active] / w[active] ** 3
    )
    return grad


def make_design_utility(c: Criterion, p: Penalty | None, ip, mode: str = "auto"):
    """Black-box utility ``U(design) = orient * Psi(design) - alpha * Phi(design)``.

    Criteria with 'min' orientation contribute their negative so that every
    solver can maximize. The returned callable accepts a DesignVector.
    """
    sign = 1.0 if c.orientation == "max" else -1.0
    alpha = 0.0 if p is None else p.alpha

    def utility(design: DesignVector) -> float:
        value = sign * criterion_value(c, ip, design, mode)
        if p is not None and alpha != 0.0:
            value -= alpha * penalty_value(p, design)
        return value

    return utility


def make_relaxed_utility(c: Criterion, p: Penalty | None, ip):
    """Utility and gradient over raw weight vectors, for the relaxed solver."""
    sign = 1.0 if c.orientation == "max" else -1.0
    alpha = 0.0 if p is None else p.alpha

    def value(weights: np.ndarray) -> float:
        design = DesignVector(weights)
        out = sign * criterion_value(c, ip, design, mode="hadamard-relaxed")
        if p is not None and alpha != 0.0:
            out -= alpha * penalty_value(p, design)
        return out

    def gradient(weights: np.ndarray) -> np.ndarray:
        design = DesignVector(weights)
        out = sign * criterion_gradient(c, ip, design)
        if p is not None and alpha != 0.0:
            out -= alpha * penalty_gradient(p, design)
        return out

    return value, gradient
