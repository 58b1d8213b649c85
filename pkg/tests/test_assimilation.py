import numpy as np
import pytest
from conftest import dense_objective_oracle, dense_posterior_oracle, make_toy_problem

from oedkit.assimilation import InverseProblem, goal_posterior, rmse
from oedkit.exceptions import (
    MissingComponent,
    NonConvergence,
    NotLinear,
    TimeOffLattice,
)
from oedkit.linalg import finite_difference_gradient
from oedkit.models import (
    GaussianMeasure,
    LinearTimeDependentModel,
    PointObservationOperator,
    TimeGrid,
    integrate,
    toy_linear,
)


class TestRegistration:
    def test_missing_prior_reported_by_name(self):
        ip, _ = make_toy_problem()
        ip.prior = None
        with pytest.raises(MissingComponent, match="prior") as exc:
            ip.solve()
        assert exc.value.component == "prior"

    def test_observation_needs_window_first(self):
        ip = InverseProblem(obs_op=PointObservationOperator.identity(2))
        with pytest.raises(MissingComponent, match="window"):
            ip.register_observation(0.1, np.zeros(2))

    def test_off_lattice_time_rejected(self):
        ip, _ = make_toy_problem()
        with pytest.raises(TimeOffLattice):
            ip.register_observation(0.1234, np.zeros(5))

    def test_observation_length_checked(self):
        ip, _ = make_toy_problem()
        with pytest.raises(ValueError):
            ip.register_observation(0.1, np.zeros(4))

    def test_reregistration_replaces_and_invalidates(self):
        ip, _ = make_toy_problem()
        before = ip.closed_form_posterior().covariance
        ip.register_noise_model(GaussianMeasure(np.zeros(5), 0.5 * np.eye(5)))
        after = ip.closed_form_posterior().covariance
        assert np.abs(before - after).max() > 1e-6


class TestObjective:
    def test_zero_model_zero_data_at_prior_mean(self):
        model = LinearTimeDependentModel(np.zeros((3, 3)), dt=0.1)
        ip = InverseProblem(
            model=model,
            obs_op=PointObservationOperator.identity(3),
            prior=GaussianMeasure(np.zeros(3), np.eye(3)),
            noise=GaussianMeasure(np.zeros(3), np.eye(3)),
            window=TimeGrid(0.0, 0.1, 2),
        )
        ip.register_observation(0.1, np.zeros(3))
        ip.register_observation(0.2, np.zeros(3))
        assert ip.objective(np.zeros(3)) == 0.0

    def test_no_observations_pure_prior_term(self):
        ip, _ = make_toy_problem()
        ip.clear_observations()
        theta = np.random.default_rng(0).standard_normal(5)
        dev = theta  # prior mean is zero
        expected = 0.5 * dev @ np.linalg.inv(ip.prior.covariance) @ dev
        np.testing.assert_allclose(ip.objective(theta), expected, rtol=1e-12)

    def test_matches_dense_assembly_oracle(self):
        ip, _ = make_toy_problem()
        theta = np.random.default_rng(1).standard_normal(5)
        expected = dense_objective_oracle(
            ip.model.a_matrix,
            ip.obs_op.matrix,
            np.linalg.inv(ip.noise.base.covariance),
            ip.prior.mean,
            ip.prior.covariance,
            ip.observation_indices(),
            theta,
        )
        np.testing.assert_allclose(ip.objective(theta), expected, rtol=1e-10)


class TestGradient:
    def test_stationary_at_closed_form_mean(self):
        ip, _ = make_toy_problem()
        mean = ip.closed_form_posterior().map_point.values
        norm = np.linalg.norm(ip.gradient(mean))
        assert norm <= 1e-8 * max(1.0, np.linalg.norm(mean))

    def test_no_observations_reduces_to_prior_gradient(self):
        ip, _ = make_toy_problem()
        ip.clear_observations()
        theta = np.random.default_rng(2).standard_normal(5)
        expected = np.linalg.inv(ip.prior.covariance) @ theta
        np.testing.assert_allclose(ip.gradient(theta), expected, rtol=1e-10)

    def test_matches_finite_differences(self):
        ip, _ = make_toy_problem()
        rng = np.random.default_rng(3)
        for _ in range(10):
            theta = rng.standard_normal(5)
            grad = ip.gradient(theta)
            fd = finite_difference_gradient(ip.objective, theta, h=1e-6)
            assert np.abs(grad - fd).max() <= 1e-5 * max(1.0, np.abs(fd).max())

    def test_observation_at_window_start_contributes(self):
        ip, truth = make_toy_problem(obs_times=(0.0, 0.1))
        grad = ip.gradient(truth + 1.0)
        fd = finite_difference_gradient(ip.objective, truth + 1.0, h=1e-6)
        np.testing.assert_allclose(grad, fd, rtol=1e-5)


class TestSolve:
    def test_map_matches_closed_form_oracle(self):
        ip, _ = make_toy_problem()
        mean, _ = dense_posterior_oracle(
            ip.model.a_matrix,
            ip.obs_op.matrix,
            ip.noise.base.covariance,
            ip.prior.mean,
            ip.prior.covariance,
            ip.observation_indices(),
        )
        result = ip.solve()
        rel = np.abs(result.map_point.values - mean).max() / np.abs(mean).max()
        assert rel <= 1e-7
        assert result.converged and len(result.objective_trace) > 0

    def test_skip_map_with_covariance(self):
        ip, _ = make_toy_problem()
        _, cov = dense_posterior_oracle(
            ip.model.a_matrix,
            ip.obs_op.matrix,
            ip.noise.base.covariance,
            ip.prior.mean,
            ip.prior.covariance,
            ip.observation_indices(),
        )
        result = ip.solve(skip_map=True, update_posterior_covariance=True)
        assert result.objective_trace == []
        assert np.abs(result.covariance - cov).max() <= 1e-8

    def test_custom_init_honored(self):
        ip, _ = make_toy_problem()
        init = np.full(5, 0.7)
        result = ip.solve(skip_map=True, init=init)
        np.testing.assert_array_equal(result.map_point.values, init)

    def test_zero_iteration_budget_raises_nonconvergence(self):
        ip, _ = make_toy_problem()
        with pytest.raises(NonConvergence) as exc:
            ip.solve(max_iter=0)
        assert exc.value.result is not None
        assert exc.value.result.converged is False


class TestClosedForm:
    def test_no_observations_returns_prior(self):
        ip, _ = make_toy_problem()
        ip.clear_observations()
        post = ip.closed_form_posterior()
        np.testing.assert_allclose(post.map_point.values, ip.prior.mean, atol=1e-12)
        np.testing.assert_allclose(post.covariance, ip.prior.covariance, atol=1e-10)

    def test_scalar_kalman_identity_per_coordinate(self):
        n = 3
        model = LinearTimeDependentModel(np.eye(n), dt=0.1)
        prior_mean = np.array([1.0, -2.0, 0.5])
        y = np.array([3.0, 0.0, -0.5])
        ip = InverseProblem(
            model=model,
            obs_op=PointObservationOperator.identity(n),
            prior=GaussianMeasure(prior_mean, np.eye(n)),
            noise=GaussianMeasure(np.zeros(n), np.eye(n)),
            window=TimeGrid(0.0, 0.1, 1),
        )
        ip.register_observation(0.1, y)
        post = ip.closed_form_posterior()
        np.testing.assert_allclose(post.covariance, 0.5 * np.eye(n), atol=1e-12)
        np.testing.assert_allclose(post.map_point.values, 0.5 * (prior_mean + y), atol=1e-12)

    def test_agrees_with_iterative_solver_on_random_problems(self):
        rng = np.random.default_rng(7)
        for trial in range(5):
            n_state = int(rng.integers(2, 11))
            n_times = int(rng.integers(1, 6))
            times = [0.1 * k for k in range(1, n_times + 1)]
            ip, _ = make_toy_problem(
                n_state=n_state,
                model_seed=int(rng.integers(10_000)),
                obs_times=times,
                noise_var=float(rng.uniform(0.01, 0.2)),
                data_seed=trial,
            )
            closed = ip.closed_form_posterior()
            solved = ip.solve(update_posterior_covariance=True)
            mean_scale = np.abs(closed.map_point.values).max()
            assert np.abs(solved.map_point.values - closed.map_point.values).max() <= 1e-7 * max(1.0, mean_scale)
            assert np.abs(solved.covariance - closed.covariance).max() <= 1e-8

    def test_posterior_never_exceeds_prior_covariance(self):
        ip, _ = make_toy_problem()
        post = ip.closed_form_posterior()
        gap_eigs = np.linalg.eigvalsh(ip.prior.covariance - post.covariance)
        assert gap_eigs.min() >= -1e-10

    def test_nonlinear_model_rejected(self):
        class OpaqueModel:
            n_state = 3

            def step(self, x):
                return x**2

        ip, _ = make_toy_problem(n_state=3, obs_times=(0.1,))
        ip.register_model(OpaqueModel())
        with pytest.raises(NotLinear):
            ip.closed_form_posterior()


class TestGoalPosterior:
    def test_identity_operator_is_noop(self):
        ip, _ = make_toy_problem()
        post = ip.solve(update_posterior_covariance=True)
        goal = goal_posterior(post, np.eye(5))
        np.testing.assert_allclose(goal.map_point.values, post.map_point.values)
        np.testing.assert_allclose(goal.covariance, post.covariance)

    def test_single_row_extracts_variance(self):
        ip, _ = make_toy_problem()
        post = ip.solve(update_posterior_covariance=True)
        e2 = np.zeros((1, 5))
        e2[0, 2] = 1.0
        goal = goal_posterior(post, e2)
        np.testing.assert_allclose(goal.covariance, [[post.covariance[2, 2]]])

    def test_random_operator_matches_triple_product(self):
        ip, _ = make_toy_problem()
        post = ip.solve(update_posterior_covariance=True)
        p = np.random.default_rng(4).standard_normal((2, 5))
        goal = goal_posterior(post, p)
        np.testing.assert_allclose(goal.covariance, p @ post.covariance @ p.T, atol=1e-12)
        np.testing.assert_allclose(goal.map_point.values, p @ post.map_point.values)

    def test_requires_covariance(self):
        ip, _ = make_toy_problem()
        post = ip.solve()
        with pytest.raises(ValueError, match="covariance"):
            goal_posterior(post, np.eye(5))


class TestRmse:
    def test_identical_vectors(self):
        assert rmse(np.ones(4), np.ones(4)) == 0.0

    def test_three_four_case(self):
        assert rmse(np.array([3.0, 4.0]), np.zeros(2)) == pytest.approx(np.sqrt(12.5))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rmse(np.ones(3), np.ones(4))

    def test_posterior_beats_prior_on_twin_experiment(self):
        ip, truth = make_toy_problem()
        post = ip.solve()
        truth_traj = integrate(ip.model, truth, ip.window)
        prior_traj = integrate(ip.model, ip.prior.mean, ip.window)
        post_traj = integrate(ip.model, post.map_point.values, ip.window)
        for k in range(len(truth_traj)):
            prior_err = rmse(prior_traj[k].values, truth_traj[k].values)
            post_err = rmse(post_traj[k].values, truth_traj[k].values)
            assert post_err < prior_err


class TestSynthesize:
    def test_zero_noise_limit_equals_observed_truth(self):
        ip, truth = make_toy_problem(noise_var=1e-20)
        traj = integrate(ip.model, truth, ip.window)
        for t, y in ip.observations:
            index = ip.window.index_of(t)
            observed = ip.obs_op.observe(traj[index]).values
            np.testing.assert_allclose(y.values, observed, atol=1e-9)

    def test_fixed_seed_reproducible(self):
        ip, truth = make_toy_problem()
        first = ip.synthesize_observations(truth, [0.1, 0.2], np.random.default_rng(11))
        second = ip.synthesize_observations(truth, [0.1, 0.2], np.random.default_rng(11))
        for (_, a), (_, b) in zip(first, second):
            np.testing.assert_array_equal(a.values, b.values)

    def test_residual_moments_match_noise_covariance(self):
        ip, truth = make_toy_problem(noise_var=0.04, n_state=3)
        traj = integrate(ip.model, truth, ip.window)
        observed = ip.obs_op.observe(traj[1]).values
        rng = np.random.default_rng(12)
        residuals = np.array(
            [ip.synthesize_observations(truth, [0.1], rng)[0][1].values - observed
             for _ in range(5000)]
        )
        sample_cov = np.cov(residuals.T)
        np.testing.assert_allclose(sample_cov, 0.04 * np.eye(3), atol=0.004)

    def test_time_off_lattice_rejected(self):
        ip, truth = make_toy_problem()
        with pytest.raises(TimeOffLattice):
            ip.synthesize_observations(truth, [0.123], np.random.default_rng(0))
