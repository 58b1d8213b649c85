"""Stochastic binary design optimization with an optimal control-variate baseline.

The binary design is never relaxed. Instead, designs are sampled from a
multivariate Bernoulli policy with parameter vector theta, and theta is
driven by a score-function (policy-gradient) estimate of the expected
utility's gradient:

    g = mean_j (U(d_j) - b) * score(d_j),
    score(d)_i = d_i / theta_i + (d_i - 1) / (1 - theta_i).

The baseline b is a control variate that damps the estimator's variance; it
is estimated each iteration from independent batches (see
:func:`optimal_baseline`). Iterates are projected onto
[eps, 1 - eps]^n_s so the score never divides by zero. The utility is a
black box: it only ever sees binary designs, and since it must be
deterministic it is memoized inside the solver.

Everything is maximization. A criterion that should be minimized enters the
utility as its negative, and the final sample keeps the design with the
largest utility.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import InvalidBounds
from ..stats import BernoulliPolicy
from .brute import evaluate_designs
from .design import DesignVector
from .result import OEDResult

__all__ = ["solve_stochastic", "optimal_baseline"]


class _MemoizedUtility:
    """Caches a deterministic design utility and tracks the best design seen."""

    def __init__(self, utility):
        self._utility = utility
        self._cache: dict[bytes, float] = {}
        self.best_design: DesignVector | None = None
        self.best_value = -np.inf

    def __call__(self, design: DesignVector) -> float:
        key = design.weights.tobytes()
        if key not in self._cache:
            self._cache[key] = float(self._utility(design))
        value = self._cache[key]
        if value > self.best_value:
            self.best_design, self.best_value = design.copy(), value
        return value


def optimal_baseline(theta: np.ndarray, utility, n_ensemble: int, baseline_batches: int,
                     rng: np.random.Generator) -> float:
    """Variance-minimizing baseline estimate at the policy parameter ``theta``.

    Per batch e, draw ``n_ensemble`` designs, form the per-sample scores
    r[j], their batch mean d[e], and the utility-weighted mean
    g[e] = mean_j U(d_j) r[j]; accumulate b += g[e] . d[e]. The accumulated
    value is finally rescaled by

        n_ensemble / (baseline_batches * sum_i 1 / (theta_i - theta_i^2)),

    which normalizes by the score variance so that a constant utility
    U = c yields a baseline with expectation c.
    """
    if n_ensemble < 1 or baseline_batches < 1:
        raise ValueError("n_ensemble and baseline_batches must be >= 1")
    policy = BernoulliPolicy(theta)
    b = 0.0
    for _ in range(baseline_batches):
        score_mean = np.zeros(policy.n)
        weighted_mean = np.zeros(policy.n)
        for _ in range(n_ensemble):
            draw = policy.sample(rng)
            score = policy.log_pmf_gradient(draw)
            score_mean += score
            weighted_mean += utility(DesignVector(draw)) * score
        score_mean /= n_ensemble
        weighted_mean /= n_ensemble
        b += float(weighted_mean @ score_mean)
    variance_sum = float(np.sum(1.0 / (theta - theta**2)))
    return b * n_ensemble / (baseline_batches * variance_sum)


def solve_stochastic(
    utility,
    n_s: int,
    rng: np.random.Generator,
    theta0=None,
    step0: float = 0.1,
    tau: float = 50.0,
    n_ensemble: int = 32,
    baseline_batches: int = 4,
    final_samples: int = 64,
    max_iter: int = 300,
    bounds_epsilon: float = 1e-3,
    workers: int = 1,
) -> OEDResult:
    """Maximize a black-box utility over binary designs of ``n_s`` sensors.

    Each iteration samples ``n_ensemble`` designs from the current Bernoulli
    policy, estimates the baseline from ``baseline_batches`` independent
    batches, takes a projected ascent step with schedule
    ``step0 / (1 + n / tau)``, and records ``(iteration, theta, mean sampled
    utility)`` on the trajectory. After ``max_iter`` iterations,
    ``final_samples`` designs are drawn from the final policy and the one
    with the largest utility is returned; the full final sample is kept on
    ``sampled_designs`` and the best design seen anywhere during the run on
    ``best_iterate_design``.

    All sampling is drawn sequentially from ``rng``, so results are
    reproducible for a fixed generator seed regardless of ``workers``, which
    only parallelizes utility evaluations.
    """
    if not 0.0 < bounds_epsilon < 0.5:
        raise InvalidBounds(f"bounds_epsilon must lie in (0, 0.5), got {bounds_epsilon}")
    if n_s < 1:
        raise ValueError("need at least one sensor")
    if final_samples < 1:
        raise ValueError("final_samples must be >= 1")

    cached = _MemoizedUtility(utility)
    if theta0 is None:
        theta = 0.5 * np.ones(n_s)
    else:
        theta = np.asarray(theta0, dtype=float).copy()
        if theta.shape != (n_s,):
            raise ValueError(f"theta0 must have shape ({n_s},)")
        if np.any(theta <= 0.0) or np.any(theta >= 1.0):
            raise InvalidBounds("theta0 must be strictly interior to (0, 1)")
    theta = np.clip(theta, bounds_epsilon, 1.0 - bounds_epsilon)

    trajectory: list[tuple[int, np.ndarray, float]] = []
    for n in range(max_iter):
        policy = BernoulliPolicy(theta)
        draws = [policy.sample(rng) for _ in range(n_ensemble)]
        designs = [DesignVector(d) for d in draws]
        values = evaluate_designs(cached, designs, workers)
        baseline = optimal_baseline(theta, cached, n_ensemble, baseline_batches, rng)
        grad = np.zeros(n_s)
        for draw, value in zip(draws, values):
            grad += (value - baseline) * policy.log_pmf_gradient(draw)
        grad /= n_ensemble
        step = step0 / (1.0 + n / tau)
        theta = np.clip(theta + step * grad, bounds_epsilon, 1.0 - bounds_epsilon)
        trajectory.append((n, theta.copy(), float(np.mean(values))))

    final_policy = BernoulliPolicy(theta)
    final_designs = [DesignVector(final_policy.sample(rng)) for _ in range(final_samples)]
    final_values = evaluate_designs(cached, final_designs, workers)
    winner = max(range(final_samples), key=lambda i: (final_values[i], -i))

    return OEDResult(
        optimal_design=final_designs[winner],
        optimal_value=final_values[winner],
        solver="stochastic",
        trajectory=trajectory,
        sampled_designs=list(zip(final_designs, final_values)),
        best_iterate_design=cached.best_design,
        best_iterate_value=cached.best_value,
    )
