"""Experiment configuration: loading, validation, and component builders.

Configurations are YAML documents validated against the JSON schema shipped
in ``oedkit/schemas/config.schema.json`` plus cross-field checks the schema
cannot express (lattice membership of observation times, solver/penalty
compatibility, referenced files). Validation reports every violation, not
just the first.
"""

from __future__ import annotations

import importlib.resources
import json
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from ..exceptions import TimeOffLattice
from ..models import (
    AdvectionDiffusionModel,
    GaussianMeasure,
    PointObservationOperator,
    TimeGrid,
    bilaplacian_prior,
    toy_linear,
)
from ..models.advection_diffusion import OBSTACLE_RECTANGLES

__all__ = [
    "load_config",
    "validate_config",
    "config_schema",
    "result_schema",
    "seed_streams",
    "build_model",
    "build_prior",
    "build_observation_operator",
    "build_noise",
    "build_window",
    "default_sensor_layout",
]

#: Fixed order of the named sub-streams split off the master seed.
STREAM_NAMES = ("model", "noise", "solver", "sampling")


def _load_schema(name: str) -> dict:
    ref = importlib.resources.files("oedkit") / "schemas" / name
    return json.loads(ref.read_text())


def config_schema() -> dict:
    return _load_schema("config.schema.json")


def result_schema() -> dict:
    return _load_schema("result_bundle.schema.json")


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        cfg = yaml.safe_load(handle)
    if not isinstance(cfg, dict):
        raise ValueError(f"config {path} does not contain a mapping")
    return cfg


def seed_streams(master_seed: int) -> dict[str, np.random.Generator]:
    """Independent named generators split from the master seed.

    Each stream is derived from a fixed spawn key, so changing how one
    component consumes randomness never perturbs the others.
    """
    return {
        name: np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(k,)))
        for k, name in enumerate(STREAM_NAMES)
    }


# -- validation ---------------------------------------------------------------


def validate_config(cfg: dict, base_dir: Path | None = None) -> list[str]:
    """Every schema and cross-field violation in the config, as one string each."""
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    validator = jsonschema.Draft202012Validator(config_schema())
    diagnostics = [
        f"{'.'.join(str(p) for p in err.absolute_path) or '<root>'}: {err.message}"
        for err in sorted(validator.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path)))
    ]
    if diagnostics:
        return diagnostics
    diagnostics.extend(_check_model(cfg))
    diagnostics.extend(_check_prior(cfg))
    diagnostics.extend(_check_observation(cfg))
    diagnostics.extend(_check_noise(cfg, base_dir))
    diagnostics.extend(_check_window(cfg))
    diagnostics.extend(_check_oed(cfg, base_dir))
    return diagnostics


def _model_state_size(model_cfg: dict) -> int | None:
    if model_cfg["kind"] == "toy-linear":
        return model_cfg.get("nx")
    nx, ny = model_cfg.get("nx"), model_cfg.get("ny")
    return nx * ny if nx and ny else None


def _check_model(cfg: dict) -> list[str]:
    out = []
    model = cfg["model"]
    if model["kind"] == "toy-linear":
        if model.get("nx", 0) < 1:
            out.append("model.nx: toy-linear needs a state size nx >= 1")
        for key in ("ny", "kappa", "velocity_spec", "velocity_scale"):
            if key in model:
                out.append(f"model.{key}: not a toy-linear parameter")
    else:
        if model.get("nx", 0) < 4 or model.get("ny", 0) < 4:
            out.append("model.nx/model.ny: advection-diffusion needs a grid of at least 4x4")
        if "kappa" not in model:
            out.append("model.kappa: advection-diffusion needs a diffusivity")
        elif model["kappa"] <= 0:
            out.append(
                f"model.kappa: diffusivity must satisfy the positivity requirement "
                f"kappa > 0, got {model['kappa']}"
            )
    if model.get("dt", 1.0) <= 0:
        out.append("model.dt: time step must be positive")
    return out


def _check_prior(cfg: dict) -> list[str]:
    out = []
    prior = cfg["prior"]
    if prior["kind"] == "gaussian-iid":
        if prior.get("variance", 1.0) <= 0:
            out.append("prior.variance: must be positive")
    else:
        if prior.get("delta", 0.5) <= 0:
            out.append("prior.delta: Laplacian shift must be positive")
        if prior.get("scale", 1.0) <= 0:
            out.append("prior.scale: must be positive")
    return out


def _check_observation(cfg: dict) -> list[str]:
    out = []
    obs = cfg["observation"]
    model = cfg["model"]
    if obs["kind"] == "points":
        if model["kind"] != "advection-diffusion":
            out.append("observation.kind: point sensors need a spatial model grid")
        if "points" not in obs and "count" not in obs:
            out.append("observation: point sensors need either explicit points or a count")
        for i, point in enumerate(obs.get("points", [])):
            x, y = point
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                out.append(f"observation.points[{i}]: ({x}, {y}) lies outside the unit square")
            elif _inside_obstacle(x, y):
                out.append(f"observation.points[{i}]: ({x}, {y}) falls inside an obstacle")
    return out


def _inside_obstacle(x: float, y: float) -> bool:
    return any(
        x0 <= x <= x1 and y0 <= y <= y1 for (x0, x1), (y0, y1) in OBSTACLE_RECTANGLES
    )


def _check_noise(cfg: dict, base_dir: Path) -> list[str]:
    out = []
    noise = cfg["noise"]
    if "file" in noise and "variance" in noise:
        out.append("noise: give either a variance or a covariance file, not both")
    if "file" not in noise and "variance" not in noise:
        out.append("noise: needs a variance or a covariance file")
    if "file" in noise and not (base_dir / noise["file"]).exists():
        out.append(f"noise.file: referenced file {noise['file']!r} does not exist")
    variance = noise.get("variance")
    if variance is not None:
        values = np.atleast_1d(np.asarray(variance, dtype=float))
        if np.any(values < 0):
            out.append("noise.variance: variances must be non-negative")
        elif np.any(values == 0) and cfg["experiment"] != "twin-data":
            out.append(
                "noise.variance: zero variance is only usable for twin-data synthesis; "
                f"{cfg['experiment']} needs a positive-definite noise model"
            )
    return out


def _check_window(cfg: dict) -> list[str]:
    out = []
    window = cfg["window"]
    if window["dt"] <= 0:
        out.append("window.dt: step must be positive")
        return out
    grid = TimeGrid(window["t0"], window["dt"], window["n_steps"])
    for t in window["obs_times"]:
        try:
            grid.index_of(t)
        except TimeOffLattice:
            out.append(
                f"window.obs_times: time {t} is not on the lattice "
                f"(t0={window['t0']}, dt={window['dt']}, n_steps={window['n_steps']})"
            )
    return out


def _check_oed(cfg: dict, base_dir: Path) -> list[str]:
    out = []
    oed_cfg = cfg.get("oed")
    if cfg["experiment"] in ("oed-solve", "brute-force"):
        if oed_cfg is None:
            out.append(f"oed: required for the {cfg['experiment']} experiment")
            return out
    if oed_cfg is None:
        return out
    penalty = oed_cfg.get("penalty")
    if penalty is not None:
        if penalty.get("alpha", 0.0) < 0:
            out.append("oed.penalty.alpha: must be >= 0")
        if penalty["kind"] == "budget-equality" and "budget" not in penalty:
            out.append("oed.penalty.budget: budget-equality needs a budget")
        if penalty.get("epsilon", 1e-2) <= 0:
            out.append("oed.penalty.epsilon: smoothing width must be positive")
        if oed_cfg["solver"] == "relaxed" and penalty["kind"] == "l0":
            out.append(
                "oed.penalty.kind: the relaxed solver needs a differentiable objective "
                "and the l0 count has no gradient; use smoothed-l0 instead"
            )
    if cfg["experiment"] == "brute-force" and oed_cfg["solver"] != "brute-force":
        out.append("oed.solver: the brute-force experiment requires solver brute-force")
    opts = oed_cfg.get("solver_options", {})
    eps = opts.get("bounds_epsilon")
    if eps is not None and not 0.0 < eps < 0.5:
        out.append("oed.solver_options.bounds_epsilon: must lie strictly inside (0, 0.5)")
    if opts.get("rounding") == "top-k" and "k" not in opts:
        out.append("oed.solver_options.k: top-k rounding needs k")
    if "goal_file" in oed_cfg and not (base_dir / oed_cfg["goal_file"]).exists():
        out.append(f"oed.goal_file: referenced file {oed_cfg['goal_file']!r} does not exist")
    return out


# -- builders -----------------------------------------------------------------


def build_model(cfg: dict, streams: dict):
    model_cfg = cfg["model"]
    if model_cfg["kind"] == "toy-linear":
        seed = model_cfg.get("seed")
        if seed is None:
            seed = int(streams["model"].integers(2**31))
        return toy_linear(model_cfg["nx"], model_cfg.get("dt", 0.1), seed)
    return AdvectionDiffusionModel(
        model_cfg["nx"],
        model_cfg["ny"],
        kappa=model_cfg["kappa"],
        dt=model_cfg.get("dt", 0.01),
        velocity_spec=model_cfg.get("velocity_spec", "recirculating"),
        velocity_scale=model_cfg.get("velocity_scale", 1.0),
    )


def build_prior(cfg: dict, model) -> GaussianMeasure:
    prior_cfg = cfg["prior"]
    n = model.n_state
    mean_spec = prior_cfg.get("mean", 0.0)
    mean = np.full(n, float(mean_spec)) if np.isscalar(mean_spec) else np.asarray(mean_spec, dtype=float)
    if prior_cfg["kind"] == "gaussian-iid":
        variance = prior_cfg.get("variance", 1.0)
        return GaussianMeasure(mean, variance * np.ones(n))
    if cfg["model"]["kind"] == "toy-linear":
        grid = n
    else:
        grid = (model.nx, model.ny)
    return bilaplacian_prior(
        grid,
        delta=prior_cfg.get("delta", 0.5),
        scale=prior_cfg.get("scale", 1.0),
        mean=mean,
    )


def default_sensor_layout(model, count: int) -> list[tuple[float, float]]:
    """Uniformly spaced candidate sensors avoiding obstacle cells.

    Starting from the coarsest square lattice with enough obstacle-free
    points, the first ``count`` points (evenly thinned) are kept. This
    default layout is a convention of this package, not a canonical one.
    """
    for g in range(2, 40):
        candidates = [
            ((i + 0.5) / g, (j + 0.5) / g)
            for j in range(g)
            for i in range(g)
            if not _inside_obstacle((i + 0.5) / g, (j + 0.5) / g)
        ]
        if len(candidates) >= count:
            picks = np.linspace(0, len(candidates) - 1, count).round().astype(int)
            return [candidates[p] for p in picks]
    raise ValueError(f"could not place {count} sensors outside the obstacles")


def build_observation_operator(cfg: dict, model) -> tuple[PointObservationOperator, list | None]:
    """Observation operator plus the sensor coordinate listing (None for identity)."""
    obs_cfg = cfg["observation"]
    if obs_cfg["kind"] == "identity":
        return PointObservationOperator.identity(model.n_state), None
    if "points" in obs_cfg:
        points = [tuple(p) for p in obs_cfg["points"]]
    else:
        points = default_sensor_layout(model, obs_cfg["count"])
    return PointObservationOperator.from_points(points, model), points


def build_noise(cfg: dict, n_obs: int, base_dir: Path) -> GaussianMeasure | None:
    """Observation noise measure; None for the degenerate zero-variance case."""
    noise_cfg = cfg["noise"]
    if "file" in noise_cfg:
        cov = np.loadtxt(base_dir / noise_cfg["file"])
        return GaussianMeasure(np.zeros(n_obs), cov)
    variance = noise_cfg["variance"]
    values = np.full(n_obs, float(variance)) if np.isscalar(variance) else np.asarray(variance, dtype=float)
    if values.size != n_obs:
        raise ValueError(f"noise.variance: expected {n_obs} entries, got {values.size}")
    if np.all(values == 0.0):
        return None
    return GaussianMeasure(np.zeros(n_obs), values)


def build_window(cfg: dict) -> tuple[TimeGrid, list[float]]:
    window = cfg["window"]
    grid = TimeGrid(window["t0"], window["dt"], window["n_steps"])
    return grid, [float(t) for t in window["obs_times"]]
