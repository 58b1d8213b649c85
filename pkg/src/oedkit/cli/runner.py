"""Experiment pipelines: twin-data synthesis, assimilation, and design studies.

Every pipeline is a pure function of (config, master seed): the master seed
is split into named sub-streams (model, noise, solver, sampling) and all
numeric artifacts are written with fixed formatting, so re-running a
pipeline reproduces its output files byte for byte.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..assimilation import InverseProblem, rmse
from ..exceptions import NonConvergence
from ..models import integrate
from ..models.core import ObservationVector
from ..oed import (
    Criterion,
    Penalty,
    WeightedNoiseModel,
    brute_force,
    make_design_utility,
    solve_relaxed,
    solve_stochastic,
)
from . import config as cfgmod

__all__ = ["ExperimentRunner"]

FLOAT_FMT = "%.17e"


def _format(value: float) -> str:
    return FLOAT_FMT % value


class ExperimentRunner:
    """Builds all components from a validated config and runs one pipeline."""

    def __init__(self, cfg: dict, output_dir, base_dir=None, quiet: bool = False):
        self.cfg = cfg
        self.out = Path(output_dir)
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
        self.quiet = quiet
        self.seed = int(cfg["seed"])
        self.streams = cfgmod.seed_streams(self.seed)
        self.timings: dict[str, float] = {}
        self.files: dict[str, str] = {}

        t0 = time.perf_counter()
        self.model = cfgmod.build_model(cfg, self.streams)
        self.prior = cfgmod.build_prior(cfg, self.model)
        self.obs_op, self.sensor_points = cfgmod.build_observation_operator(cfg, self.model)
        self.noise_base = cfgmod.build_noise(cfg, self.obs_op.n_obs, self.base_dir)
        self.window, self.obs_times = cfgmod.build_window(cfg)
        self.timings["build_seconds"] = time.perf_counter() - t0

    def log(self, message: str) -> None:
        if not self.quiet:
            print(message)

    # -- shared pieces -------------------------------------------------------

    def make_truth(self) -> np.ndarray:
        truth_cfg = self.cfg.get("truth", {"kind": "prior-sample"})
        if truth_cfg["kind"] == "constant":
            return np.full(self.model.n_state, float(truth_cfg.get("value", 1.0)))
        return self.prior.sample(self.streams["sampling"])

    def synthesize(self, truth: np.ndarray):
        """Synthetic observations plus the truth trajectory they were taken from.

        Noise is added from the noise sub-stream unless the configured
        variance is exactly zero (twin-data only), in which case the data
        equal the observed truth.
        """
        trajectory = integrate(self.model, truth, self.window)
        data = []
        rng = self.streams["noise"]
        for t in self.obs_times:
            index = self.window.index_of(t)
            values = self.obs_op.observe(trajectory[index]).values
            if self.noise_base is not None:
                values = values + self.noise_base.sample(rng)
            data.append((t, ObservationVector(values, t)))
        return data, trajectory

    def build_inverse_problem(self, observations) -> InverseProblem:
        if self.noise_base is None:
            raise ValueError("assimilation needs a positive-definite noise model")
        ip = InverseProblem(
            model=self.model,
            obs_op=self.obs_op,
            prior=self.prior,
            noise=WeightedNoiseModel(self.noise_base),
            window=self.window,
        )
        for t, y in observations:
            ip.register_observation(t, y)
        return ip

    # -- file writers ----------------------------------------------------------

    def _register(self, key: str, name: str) -> Path:
        self.files[key] = name
        return self.out / name

    def write_vector(self, key: str, name: str, values: np.ndarray, column: str) -> None:
        path = self._register(key, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"index,{column}\n")
            for i, v in enumerate(values):
                fh.write(f"{i},{_format(v)}\n")

    def write_rows(self, key: str, name: str, header: list[str], rows) -> None:
        path = self._register(key, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")

    def write_matrix(self, key: str, name: str, matrix: np.ndarray) -> None:
        path = self._register(key, name)
        np.savetxt(path, matrix, fmt=FLOAT_FMT)

    def write_trajectory(self, key: str, name: str, trajectory) -> None:
        n = trajectory[0].size
        header = ["time"] + [f"state_{i}" for i in range(n)]
        rows = (
            [_format(s.time)] + [_format(v) for v in s.values]
            for s in trajectory
        )
        self.write_rows(key, name, header, rows)

    def write_observations(self, key: str, name: str, observations) -> None:
        n = observations[0][1].size if observations else self.obs_op.n_obs
        header = ["time"] + [f"obs_{i}" for i in range(n)]
        rows = (
            [_format(t)] + [_format(v) for v in y.values]
            for t, y in observations
        )
        self.write_rows(key, name, header, rows)

    def write_bundle(self, experiment: str, **sections) -> dict:
        bundle = {
            "schema_version": 1,
            "experiment": experiment,
            "seed": self.seed,
            "config": self.cfg,
            "files": dict(self.files),
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
            "versions": {
                "oedkit": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
        }
        bundle.update(sections)
        path = self.out / "result.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(bundle, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return bundle

    # -- pipelines ----------------------------------------------------------------

    def run_twin_data(self) -> tuple[dict, int]:
        t0 = time.perf_counter()
        self.out.mkdir(parents=True, exist_ok=True)
        truth = self.make_truth()
        observations, trajectory = self.synthesize(truth)
        self.write_vector("truth_state", "truth_state.csv", truth, "value")
        self.write_trajectory("truth_trajectory", "truth_trajectory.csv", trajectory)
        self.write_observations("observations", "observations.csv", observations)
        self.timings["twin_data_seconds"] = time.perf_counter() - t0
        self.log(f"wrote {len(observations)} observation records to {self.out}")
        return self.write_bundle("twin-data"), 0

    def run_assimilate(self) -> tuple[dict, int]:
        t0 = time.perf_counter()
        self.out.mkdir(parents=True, exist_ok=True)
        truth = self.make_truth()
        observations, truth_traj = self.synthesize(truth)
        self.write_vector("truth_state", "truth_state.csv", truth, "value")
        self.write_trajectory("truth_trajectory", "truth_trajectory.csv", truth_traj)
        self.write_observations("observations", "observations.csv", observations)

        ip = self.build_inverse_problem(observations)
        exit_code = 0
        try:
            result = ip.solve(update_posterior_covariance=True)
        except NonConvergence as err:
            self.log(f"MAP solver did not converge: {err}")
            result = err.result
            exit_code = 3
        theta_map = result.map_point.values

        prior_traj = integrate(self.model, self.prior.mean, self.window)
        map_traj = integrate(self.model, theta_map, self.window)
        rows = (
            [
                _format(truth_traj[k].time),
                _format(rmse(prior_traj[k].values, truth_traj[k].values)),
                _format(rmse(map_traj[k].values, truth_traj[k].values)),
            ]
            for k in range(len(truth_traj))
        )
        self.write_rows("rmse_trajectory", "rmse_trajectory.csv",
                        ["time", "prior_rmse", "posterior_rmse"], rows)
        self.write_vector("map_state", "map_state.csv", theta_map, "value")

        posterior = {
            "rmse_prior": rmse(self.prior.mean, truth),
            "rmse_posterior": rmse(theta_map, truth),
            "map": [float(v) for v in theta_map],
            "converged": bool(result.converged),
            "n_optimizer_iterations": len(result.objective_trace),
        }
        if result.covariance is not None:
            self.write_matrix("posterior_covariance", "posterior_covariance.txt", result.covariance)
            closed = ip.closed_form_posterior()
            self.write_matrix("closed_form_covariance", "closed_form_covariance.txt",
                              closed.covariance)
            error = np.abs(result.covariance - closed.covariance)
            self.write_matrix("covariance_error", "covariance_error.txt", error)
            posterior["closed_form_max_abs_error"] = float(error.max())
        self.timings["assimilate_seconds"] = time.perf_counter() - t0
        self.log(
            f"assimilation done: prior rmse {posterior['rmse_prior']:.4e}, "
            f"posterior rmse {posterior['rmse_posterior']:.4e}"
        )
        return self.write_bundle("assimilate", posterior=posterior), exit_code

    def run_oed(self) -> tuple[dict, int]:
        t0 = time.perf_counter()
        self.out.mkdir(parents=True, exist_ok=True)
        truth = self.make_truth()
        observations, _ = self.synthesize(truth)
        self.write_observations("observations", "observations.csv", observations)
        ip = self.build_inverse_problem(observations)

        oed_cfg = self.cfg["oed"]
        criterion = self._build_criterion(oed_cfg)
        penalty = self._build_penalty(oed_cfg)
        utility = make_design_utility(criterion, penalty, ip)
        n_s = self.obs_op.n_obs
        opts = dict(oed_cfg.get("solver_options", {}))
        workers = opts.pop("workers", 1)
        solver = oed_cfg["solver"]

        exit_code = 0
        result = None
        try:
            if solver == "brute-force":
                result = brute_force(utility, n_s, workers=workers)
            elif solver == "relaxed":
                result = solve_relaxed(criterion, penalty, ip, **opts)
            else:
                result = solve_stochastic(
                    utility, n_s, self.streams["solver"], workers=workers, **opts
                )
        except NonConvergence as err:
            self.log(f"design solver did not converge: {err}")
            result = err.result
            exit_code = 3

        summary = {
            "solver": solver,
            "criterion": oed_cfg["criterion"],
            "optimal_design": [float(v) for v in result.optimal_design.weights],
            "optimal_design_index": (
                result.optimal_design.to_index() if result.optimal_design.is_binary else None
            ),
            "optimal_value": float(result.optimal_value),
            "converged": bool(result.converged),
            "n_iterations": len(result.trajectory),
        }
        if result.relaxed_design is not None:
            summary["relaxed_design"] = [float(v) for v in result.relaxed_design.weights]
        if result.best_iterate_value is not None:
            summary["best_iterate_value"] = float(result.best_iterate_value)

        self.write_rows(
            "optimal_design", "optimal_design.csv", ["sensor", "weight"],
            ([str(i), _format(v)] for i, v in enumerate(result.optimal_design.weights)),
        )
        self._write_sensor_locations()
        if result.trajectory:
            self.write_rows(
                "objective_trajectory", "objective_trajectory.csv", ["iteration", "utility"],
                ([str(n), _format(u)] for n, _, u in result.trajectory),
            )
        if result.sampled_designs is not None:
            self.write_rows(
                "sampled_designs", "sampled_designs.csv",
                ["sample", "design_index", "utility"],
                ([str(i), str(d.to_index()), _format(u)]
                 for i, (d, u) in enumerate(result.sampled_designs)),
            )

        table = result.brute_force_table
        if table is None and oed_cfg.get("compare_brute_force", False) and n_s <= 22:
            reference = brute_force(utility, n_s, workers=workers)
            table = reference.brute_force_table
            summary["brute_force_optimal_index"] = reference.optimal_design.to_index()
            summary["brute_force_optimal_value"] = float(reference.optimal_value)
        elif table is not None:
            summary["brute_force_optimal_index"] = result.optimal_design.to_index()
            summary["brute_force_optimal_value"] = float(result.optimal_value)
        if table is not None:
            summary["n_enumerated_designs"] = len(table)
            self.write_rows(
                "brute_force_table", "brute_force_table.csv", ["design_index", "utility"],
                ([str(i), _format(u)] for i, u in table),
            )

        self.timings["oed_seconds"] = time.perf_counter() - t0
        self.log(
            f"design study done: solver {solver}, utility {summary['optimal_value']:.6e}, "
            f"design {result.optimal_design.weights.astype(int).tolist()}"
        )
        return self.write_bundle(self.cfg["experiment"], oed=summary), exit_code

    def _build_criterion(self, oed_cfg: dict) -> Criterion:
        goal = None
        if "goal_file" in oed_cfg:
            goal = np.loadtxt(self.base_dir / oed_cfg["goal_file"])
        return Criterion(oed_cfg["criterion"], goal_operator=goal)

    @staticmethod
    def _build_penalty(oed_cfg: dict) -> Penalty | None:
        pen_cfg = oed_cfg.get("penalty")
        if pen_cfg is None:
            return None
        return Penalty(
            pen_cfg["kind"],
            alpha=pen_cfg.get("alpha", 0.0),
            budget=pen_cfg.get("budget"),
            epsilon=pen_cfg.get("epsilon", 1e-2),
        )

    def _write_sensor_locations(self) -> None:
        if self.sensor_points is not None:
            self.write_rows(
                "sensor_locations", "sensor_locations.csv", ["sensor", "x", "y"],
                ([str(i), _format(x), _format(y)]
                 for i, (x, y) in enumerate(self.sensor_points)),
            )
        else:
            self.write_rows(
                "sensor_locations", "sensor_locations.csv", ["sensor", "state_index"],
                ([str(i), str(i)] for i in range(self.obs_op.n_obs)),
            )
