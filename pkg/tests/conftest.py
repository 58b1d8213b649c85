"""Shared problem builders and independent dense-assembly oracles.

The oracles deliberately use a different computational route than the
library (explicit matrix powers, `np.linalg.inv` / `np.linalg.pinv`) so
that agreement is meaningful.
"""

import numpy as np

from oedkit.assimilation import InverseProblem
from oedkit.models import GaussianMeasure, PointObservationOperator, TimeGrid, toy_linear


def make_toy_problem(
    n_state=5,
    model_seed=1011,
    dt=0.1,
    obs_times=(0.1, 0.2, 0.3),
    noise_var=0.01,
    prior_var=1.0,
    data_seed=3,
    truth=None,
):
    """Linear-Gaussian twin experiment with identity observations."""
    model = toy_linear(n_state, dt, model_seed)
    obs_op = PointObservationOperator.identity(n_state)
    prior = GaussianMeasure(np.zeros(n_state), prior_var * np.eye(n_state), seed=model_seed + 1)
    noise = GaussianMeasure(np.zeros(n_state), noise_var * np.eye(n_state), seed=model_seed + 2)
    n_steps = int(round(max(obs_times) / dt))
    ip = InverseProblem(
        model=model, obs_op=obs_op, prior=prior, noise=noise,
        window=TimeGrid(0.0, dt, n_steps),
    )
    rng = np.random.default_rng(data_seed)
    if truth is None:
        truth = prior.sample(rng)
    for t, y in ip.synthesize_observations(truth, list(obs_times), rng):
        ip.register_observation(t, y)
    return ip, truth


def dense_posterior_oracle(a, o, noise_cov, prior_mean, prior_cov, obs):
    """Closed-form Gaussian posterior assembled from explicit matrix powers.

    ``obs`` is a list of (lattice index, data vector) pairs.
    """
    r_inv = np.linalg.inv(noise_cov)
    gpr_inv = np.linalg.inv(prior_cov)
    fim = gpr_inv.copy()
    rhs = gpr_inv @ prior_mean
    for index, y in obs:
        f = o @ np.linalg.matrix_power(a, index)
        fim += f.T @ r_inv @ f
        rhs += f.T @ r_inv @ y
    cov = np.linalg.inv(fim)
    return cov @ rhs, cov


def dense_objective_oracle(a, o, weight, prior_mean, prior_cov, obs, theta):
    """Misfit-plus-prior objective from explicit matrix powers."""
    gpr_inv = np.linalg.inv(prior_cov)
    dev = theta - prior_mean
    value = 0.5 * dev @ gpr_inv @ dev
    for index, y in obs:
        r = o @ np.linalg.matrix_power(a, index) @ theta - y
        value += 0.5 * r @ weight @ r
    return float(value)
