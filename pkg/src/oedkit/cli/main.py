"""Command line entry points.

Exit codes: 0 success, 2 config validation failure, 3 solver
non-convergence (partial results are still persisted), 4 I/O failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import load_config, validate_config
from .runner import ExperimentRunner

EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_IO = 4


def common_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="Path to the YAML experiment config.")(fn)
    fn = click.option("--seed", type=click.IntRange(min=0), default=None,
                      help="Master seed override.")(fn)
    fn = click.option("--output", "output_dir", type=click.Path(), default=None,
                      help="Output directory override.")(fn)
    fn = click.option("--quiet", is_flag=True, help="Suppress progress messages.")(fn)
    return fn


@click.group()
def cli():
    """Twin experiments, Bayesian assimilation, and sensor-placement studies."""


def _load(config_path: str) -> dict:
    try:
        return load_config(config_path)
    except FileNotFoundError:
        click.echo(f"error: config file {config_path!r} not found", err=True)
        sys.exit(EXIT_IO)
    except Exception as err:  # malformed YAML
        click.echo(f"error: could not parse {config_path!r}: {err}", err=True)
        sys.exit(EXIT_VALIDATION)


def _prepare(config_path: str, seed, output_dir, expected_kind: str) -> tuple[dict, Path, Path]:
    cfg = _load(config_path)
    if seed is not None:
        cfg["seed"] = int(seed)
    base_dir = Path(config_path).resolve().parent
    diagnostics = validate_config(cfg, base_dir)
    if cfg.get("experiment") != expected_kind:
        diagnostics.append(
            f"experiment: config declares {cfg.get('experiment')!r} but the "
            f"{expected_kind!r} command was invoked"
        )
    if diagnostics:
        for line in diagnostics:
            click.echo(f"invalid config: {line}", err=True)
        sys.exit(EXIT_VALIDATION)
    out = Path(output_dir) if output_dir is not None else Path(cfg.get("output_dir", "results"))
    return cfg, out, base_dir


def _run(pipeline: str, config_path: str, seed, output_dir, quiet: bool) -> None:
    cfg, out, base_dir = _prepare(config_path, seed, output_dir, pipeline)
    try:
        runner = ExperimentRunner(cfg, out, base_dir=base_dir, quiet=quiet)
        if pipeline == "twin-data":
            _, code = runner.run_twin_data()
        elif pipeline == "assimilate":
            _, code = runner.run_assimilate()
        else:
            _, code = runner.run_oed()
    except OSError as err:
        click.echo(f"I/O error: {err}", err=True)
        sys.exit(EXIT_IO)
    except ValueError as err:
        click.echo(f"invalid config: {err}", err=True)
        sys.exit(EXIT_VALIDATION)
    sys.exit(code)


@cli.command("twin-data")
@common_options
def twin_data(config_path, seed, output_dir, quiet):
    """Write ground truth, trajectory, and noisy synthetic observations."""
    _run("twin-data", config_path, seed, output_dir, quiet)


@cli.command("assimilate")
@common_options
def assimilate(config_path, seed, output_dir, quiet):
    """Solve the inverse problem on synthetic data and report errors."""
    _run("assimilate", config_path, seed, output_dir, quiet)


@cli.command("oed-solve")
@common_options
def oed_solve(config_path, seed, output_dir, quiet):
    """Run the configured design solver on the assembled inverse problem."""
    _run("oed-solve", config_path, seed, output_dir, quiet)


@cli.command("brute-force")
@common_options
def brute_force_cmd(config_path, seed, output_dir, quiet):
    """Enumerate all binary designs and report the exact optimum."""
    _run("brute-force", config_path, seed, output_dir, quiet)


@cli.command("validate")
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="Path to the YAML experiment config.")
def validate(config_path):
    """Check a config against the schema and cross-field rules."""
    cfg = _load(config_path)
    diagnostics = validate_config(cfg, Path(config_path).resolve().parent)
    if diagnostics:
        for line in diagnostics:
            click.echo(line)
        sys.exit(EXIT_VALIDATION)
    click.echo("config is valid")
    sys.exit(0)


if __name__ == "__main__":
    cli()
