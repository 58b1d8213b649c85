"""Inverse problem assembly and solution.

An :class:`InverseProblem` bundles a simulation model, an observation
operator, a Gaussian prior on the initial state, a design-weighted noise
model, and a set of time-stamped observations on a uniform window. It
exposes the regularized misfit

    J(theta) = 1/2 sum_n || O x_n(theta) - y_n ||^2_W
             + 1/2 || theta - theta_pr ||^2_{C_pr^{-1}}

with its adjoint gradient, an iterative MAP solver, and, for linear models,
the exact Gaussian posterior assembled from dense parameter-to-observable
operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import linalg
from .exceptions import MissingComponent, NonConvergence, NotLinear
from .models.core import ObservationVector, StateVector, TimeGrid, values_of
from .oed.weighting import WeightedNoiseModel

__all__ = [
    "InverseProblem",
    "PosteriorResult",
    "goal_posterior",
    "goal_gaussian",
    "rmse",
]


@dataclass
class PosteriorResult:
    """MAP estimate with optional covariance and the optimizer's trace."""

    map_point: StateVector
    covariance: np.ndarray | None = None
    objective_trace: list[tuple[int, float]] = field(default_factory=list)
    converged: bool = True

    def __post_init__(self):
        if self.covariance is not None:
            self.covariance = np.asarray(self.covariance, dtype=float)
            linalg.cholesky_factor(self.covariance)  # SPD contract


class InverseProblem:
    """Mutable bundle of inversion components.

    Components may be passed at construction or registered afterwards;
    re-registering a component replaces it and drops any cached operators.
    Once every piece is in place the instance is treated as frozen by the
    solvers, which makes concurrent solves on one instance safe.
    """

    _COMPONENTS = ("model", "obs_op", "prior", "noise", "window")

    def __init__(self, model=None, obs_op=None, prior=None, noise=None, window=None,
                 observations=None):
        self.model = model
        self.obs_op = obs_op
        self.prior = prior
        self.noise = None
        self.window = window
        self.observations: list[tuple[float, ObservationVector]] = []
        if noise is not None:
            self.register_noise_model(noise)
        if observations is not None:
            for t, y in observations:
                self.register_observation(t, y)
        self._operator_cache: dict = {}

    # -- registration ------------------------------------------------------

    def register_model(self, model) -> None:
        self.model = model
        self._invalidate()

    def register_observation_operator(self, obs_op) -> None:
        self.obs_op = obs_op
        self._invalidate()

    def register_prior(self, prior) -> None:
        self.prior = prior
        self._invalidate()

    def register_noise_model(self, noise) -> None:
        """Accepts a WeightedNoiseModel or a plain Gaussian measure.

        A plain measure is wrapped with the all-active design, under which
        the weighted precision is exactly the measure's own precision.
        """
        if not isinstance(noise, WeightedNoiseModel):
            noise = WeightedNoiseModel(noise)
        self.noise = noise
        self._invalidate()

    def register_window(self, window: TimeGrid) -> None:
        self.window = window
        self._invalidate()

    def register_observation(self, t: float, y) -> None:
        """Attach one observation; its time must sit on the window lattice."""
        self.require("window", "obs_op")
        index = self.window.index_of(t)
        values = values_of(y)
        if values.size != self.obs_op.n_obs:
            raise ValueError(
                f"observation at t={t} has size {values.size}, operator expects {self.obs_op.n_obs}"
            )
        del index  # registration only validates lattice membership
        self.observations.append((float(t), ObservationVector(values, float(t))))
        self.observations.sort(key=lambda pair: pair[0])
        self._invalidate()

    def clear_observations(self) -> None:
        self.observations = []
        self._invalidate()

    def set_design(self, design) -> None:
        """Swap the experimental design on the noise model."""
        self.require("noise")
        self.noise.set_design(design)
        self._invalidate()

    def _invalidate(self) -> None:
        self._operator_cache = {}

    def require(self, *components: str) -> None:
        for name in components:
            if getattr(self, name, None) is None:
                raise MissingComponent(name)

    # -- misfit and gradient -------------------------------------------------

    def observation_indices(self) -> list[tuple[int, np.ndarray]]:
        """Observations as (lattice index, values), ascending in time."""
        self.require("window")
        return [(self.window.index_of(t), y.values) for t, y in self.observations]

    def objective(self, theta) -> float:
        """Design-weighted data misfit plus the prior penalty at ``theta``."""
        self.require(*self._COMPONENTS)
        theta = values_of(theta)
        dev = theta - self.prior.mean
        value = 0.5 * float(dev @ self.prior.precision_apply(dev))
        obs = self.observation_indices()
        if not obs:
            return value
        weight = self.noise.precision()
        x = theta.copy()
        k = 0
        for index, y in obs:
            while k < index:
                x = self.model.step(x)
                k += 1
            r = self.obs_op.observe(x).values - y
            value += 0.5 * float(r @ weight @ r)
        return value

    def gradient(self, theta) -> np.ndarray:
        """Adjoint gradient of :meth:`objective`: one forward sweep to collect
        residuals, one backward sweep accumulating per-time increments."""
        self.require(*self._COMPONENTS)
        theta = values_of(theta)
        grad = self.prior.precision_apply(theta - self.prior.mean)
        obs = self.observation_indices()
        if not obs:
            return grad
        weight = self.noise.precision()
        # Forward: residual increments O^T W (O x_n - y_n) keyed by index.
        increments: dict[int, np.ndarray] = {}
        x = theta.copy()
        k = 0
        for index, y in obs:
            while k < index:
                x = self.model.step(x)
                k += 1
            r = self.obs_op.observe(x).values - y
            inc = self.obs_op.observe_adjoint(weight @ r)
            increments[index] = increments.get(index, 0.0) + inc
        # Backward: lambda_{i} = A^T lambda_{i+1} + increment_i.
        lam = np.zeros_like(theta)
        for i in range(max(increments), 0, -1):
            if i in increments:
                lam = lam + increments[i]
            lam = self.model.adjoint_step(lam)
        if 0 in increments:
            lam = lam + increments[0]
        return grad + lam

    # -- linear-Gaussian machinery -------------------------------------------

    def _require_linear(self) -> None:
        if not getattr(self.model, "is_linear", False) or not hasattr(self.model, "adjoint_step"):
            raise NotLinear("model has no dense linear-operator representation")
        if not getattr(self.obs_op, "is_linear", False):
            raise NotLinear("observation operator has no dense linear-operator representation")

    def forward_operator_transposes(self) -> list[tuple[int, np.ndarray]]:
        """Dense transposed parameter-to-observable maps per observation time.

        Entry (n, F_n^T) satisfies F_n = O A^n, assembled by pushing the
        operator's adjoint columns backward through the model; cached until a
        component changes.
        """
        self.require("model", "obs_op", "window")
        self._require_linear()
        key = "forward_ops"
        if key not in self._operator_cache:
            indices = sorted({index for index, _ in self.observation_indices()})
            block = self.obs_op.matrix.T.copy()
            ops: list[tuple[int, np.ndarray]] = []
            current = 0
            for index in indices:
                for _ in range(index - current):
                    block = self.model.adjoint_step(block)
                current = index
                ops.append((index, block.copy()))
            self._operator_cache[key] = ops
        return self._operator_cache[key]

    def information_matrix(self, weight: np.ndarray) -> np.ndarray:
        """Prior precision plus sum_n F_n^T W F_n for the given W."""
        self.require("prior")
        fim = self.prior.precision_matrix().copy()
        for _, ft in self.forward_operator_transposes():
            fim += ft @ weight @ ft.T
        return linalg.symmetrize(fim, rtol=1e-8)

    def closed_form_posterior(self) -> PosteriorResult:
        """Exact Gaussian posterior for linear dynamics and observations.

        The precision sums one term per registered observation time with the
        per-time propagator powers baked into F_n, consistent with the
        multi-time misfit; with no observations the posterior is the prior.
        """
        self.require(*self._COMPONENTS)
        self._require_linear()
        weight = self.noise.precision()
        fim = self.information_matrix(weight)
        cov = linalg.spd_inverse(fim)
        rhs = self.prior.precision_apply(self.prior.mean)
        lookup: dict[int, np.ndarray] = dict(self.forward_operator_transposes())
        for index, y in self.observation_indices():
            rhs = rhs + lookup[index] @ (weight @ y)
        mean = linalg.solve_spd(fim, rhs)
        t0 = self.window.t0 if self.window is not None else None
        return PosteriorResult(StateVector(mean, t0), covariance=cov)

    # -- solving ---------------------------------------------------------------

    def solve(
        self,
        update_posterior_covariance: bool = False,
        skip_map: bool = False,
        init=None,
        max_iter: int = 200,
        grad_tol: float = 1e-8,
    ) -> PosteriorResult:
        """MAP estimation by limited-memory quasi-Newton descent.

        The search starts from the prior mean unless ``init`` is given.
        ``skip_map`` bypasses the optimization entirely (useful when only the
        posterior covariance is wanted); the reported point is then just the
        starting point and no iterations are recorded.

        Raises
        ------
        NonConvergence
            If the final gradient max-norm has not dropped below ``grad_tol``
            times the problem scale (the larger of one and the starting
            gradient's max-norm); the exception carries the best iterate as
            ``result``.
        """
        self.require(*self._COMPONENTS)
        theta0 = values_of(init) if init is not None else self.prior.mean.copy()
        t0 = self.window.t0
        trace: list[tuple[int, float]] = []

        if skip_map:
            result = PosteriorResult(StateVector(theta0, t0), objective_trace=[], converged=True)
        else:
            counter = {"k": 0}

            def record(xk):
                counter["k"] += 1
                trace.append((counter["k"], float(self.objective(xk))))

            scale = max(1.0, float(np.max(np.abs(self.gradient(theta0)))))
            opt = scipy.optimize.minimize(
                self.objective,
                theta0,
                jac=self.gradient,
                method="L-BFGS-B",
                callback=record,
                options={"maxiter": max_iter, "gtol": 1e-12, "ftol": 1e-18},
            )
            grad_norm = float(np.max(np.abs(self.gradient(opt.x))))
            converged = grad_norm <= grad_tol * scale
            result = PosteriorResult(
                StateVector(opt.x, t0), objective_trace=trace, converged=converged
            )
        if update_posterior_covariance:
            result.covariance = linalg.spd_inverse(
                self.information_matrix(self.noise.precision())
            )
        if not result.converged:
            raise NonConvergence(
                f"MAP solver stopped with gradient max-norm {grad_norm:.3e} "
                f"above tolerance {grad_tol:.1e} (relative to iterate scale)",
                result=result,
            )
        return result

    # -- twin-experiment helpers ------------------------------------------------

    def synthesize_observations(self, truth, times, rng) -> list[tuple[float, ObservationVector]]:
        """Noisy synthetic data y(t) = O x_t(truth) + noise, for twin experiments.

        Noise draws come from the base (unweighted) noise measure through the
        supplied generator. The returned pairs are not registered; pass them
        to :meth:`register_observation` to attach them.
        """
        self.require("model", "obs_op", "noise", "window")
        indices = [self.window.index_of(t) for t in times]
        x = values_of(truth).copy()
        k = 0
        data = []
        for t, index in sorted(zip(times, indices), key=lambda p: p[1]):
            while k < index:
                x = self.model.step(x)
                k += 1
            y = self.obs_op.observe(x).values + self.noise.sample(rng)
            data.append((float(t), ObservationVector(y, float(t))))
        return data


def goal_gaussian(measure, p_matrix: np.ndarray):
    """Push a Gaussian measure through a linear prediction operator."""
    from .models.gaussian import GaussianMeasure

    p = np.atleast_2d(np.asarray(p_matrix, dtype=float))
    cov = linalg.symmetrize(p @ measure.covariance @ p.T, rtol=1e-8)
    return GaussianMeasure(p @ measure.mean, cov)


def goal_posterior(pr: PosteriorResult, p_matrix: np.ndarray) -> PosteriorResult:
    """Posterior of a linear goal quantity rho = P theta.

    The identity operator returns an equivalent result, falling back to the
    plain formulation.
    """
    if pr.covariance is None:
        raise ValueError("goal posterior needs a posterior covariance; solve with "
                         "update_posterior_covariance=True")
    p = np.atleast_2d(np.asarray(p_matrix, dtype=float))
    if p.shape[1] != pr.map_point.size:
        raise ValueError(
            f"goal operator has {p.shape[1]} columns, parameter dimension is {pr.map_point.size}"
        )
    mean = p @ pr.map_point.values
    cov = linalg.symmetrize(p @ pr.covariance @ p.T, rtol=1e-8)
    return PosteriorResult(
        StateVector(mean, pr.map_point.time),
        covariance=cov,
        objective_trace=list(pr.objective_trace),
        converged=pr.converged,
    )


def rmse(a, b) -> float:
    """Root mean squared difference of two equal-length vectors."""
    a, b = values_of(a), values_of(b)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return math.sqrt(float(np.mean((a - b) ** 2)))
