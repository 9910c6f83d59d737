"""Command-line interface.

Exit codes: 0 success, 2 validation failure, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from . import invariant, lyapunov, metrics, runner
from .errors import NumericalError, ValidationError
from .operators import End, OperatorSpec1D, TriangleSpec, model_from_dict

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise click.exceptions.Exit(_fail(EXIT_IO, f"cannot read config: {exc}"))
    except json.JSONDecodeError as exc:
        raise click.exceptions.Exit(_fail(EXIT_VALIDATION, f"config is not valid JSON: {exc}"))


def _fail(code: int, message: str) -> int:
    click.echo(f"error: {message}", err=True)
    return code


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            sys.exit(_fail(EXIT_VALIDATION, str(exc)))
        except NumericalError as exc:
            sys.exit(_fail(EXIT_NUMERICAL, str(exc)))
        except OSError as exc:
            sys.exit(_fail(EXIT_IO, str(exc)))

    return wrapper


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


config_opt = click.option("--config", "config_path", required=True, help="JSON config file.")
seed_opt = click.option("--seed", type=int, default=None, help="Override the config seed.")
threads_opt = click.option("--threads", type=int, default=1, show_default=True,
                           help="Worker threads (never changes numerics).")
out_opt = click.option("--out", "out_path", default=None, help="Output file or directory.")


@click.group()
@click.version_option()
def main():
    """Degenerate-diffusion laboratory: classify, simulate, verify."""


@main.command()
@config_opt
@out_opt
@_handle_errors
def classify(config_path, out_path):
    """Classify model endpoints and enumerate invariant measures."""
    cfg = _load_config(config_path)
    model = model_from_dict(cfg.get("model", cfg))
    _emit(runner.classify_report(model), out_path)


@main.command("invariant")
@config_opt
@out_opt
@click.option("--grid", type=int, default=512, show_default=True, help="Density grid points.")
@_handle_errors
def invariant_cmd(config_path, out_path, grid):
    """Compute the stationary density profile and normalizer."""
    cfg = _load_config(config_path)
    model = model_from_dict(cfg.get("model", cfg))
    if isinstance(model, TriangleSpec):
        model = invariant.restricted_diagonal_operator(model)
    prof = invariant.stationary_density(model)
    xs = np.linspace(1e-4, 1.0 - 1e-4, grid)
    report = {
        "Z": prof.Z,
        "left_exponent": prof.left_exponent,
        "right_exponent": prof.right_exponent,
        "x": xs.tolist(),
        "density": (prof.density(xs) / prof.Z).tolist(),
    }
    _emit(report, out_path)


def _simulate(config_path, seed, threads, out_path, expect: type):
    cfg = _load_config(config_path)
    if seed is not None:
        cfg["seed"] = seed
    model = model_from_dict(cfg.get("model", {}))
    if not isinstance(model, expect):
        raise ValidationError(
            f"config model type does not match this subcommand "
            f"(expected {expect.__name__})"
        )
    if not out_path:
        raise ValidationError("--out output directory is required for simulation runs")
    manifest = runner.run_experiment(cfg, out_path, threads=threads)
    click.echo(json.dumps({"out": out_path, "config_hash": manifest["config_hash"],
                           "wall_time_seconds": manifest["wall_time_seconds"]}, sort_keys=True))


@main.command()
@config_opt
@seed_opt
@threads_opt
@out_opt
@_handle_errors
def simulate1d(config_path, seed, threads, out_path):
    """Run the 1D particle ensemble and write snapshot/metric artifacts."""
    _simulate(config_path, seed, threads, out_path, OperatorSpec1D)


@main.command()
@config_opt
@seed_opt
@threads_opt
@out_opt
@_handle_errors
def simulate2d(config_path, seed, threads, out_path):
    """Run the triangle ensemble and write snapshot/metric artifacts."""
    _simulate(config_path, seed, threads, out_path, TriangleSpec)


@main.command()
@click.argument("series_csv")
@out_opt
@click.option("--window", nargs=2, type=float, default=None,
              help="Fit window t_min t_max (default: last three quarters).")
@_handle_errors
def rates(series_csv, out_path, window):
    """Fit an exponential decay rate to a metric CSV (columns t, value)."""
    try:
        data = np.genfromtxt(series_csv, delimiter=",", names=True)
    except OSError as exc:
        sys.exit(_fail(EXIT_IO, f"cannot read series: {exc}"))
    if data.dtype.names is None or not {"t", "value"} <= set(data.dtype.names):
        raise ValidationError("series CSV must have columns 't' and 'value'")
    t = np.atleast_1d(data["t"])
    v = np.atleast_1d(data["value"])
    report = metrics.fit_exponential_rate(t, v, tuple(window) if window else None)
    _emit(report.to_dict(), out_path)


@main.command("lyapunov")
@config_opt
@out_opt
@click.option("--csv", "csv_path", default=None, help="Also write (x, Lf/f) samples as CSV.")
@_handle_errors
def lyapunov_cmd(config_path, out_path, csv_path):
    """Certify a Lyapunov bound for the configured model."""
    cfg = _load_config(config_path)
    model = model_from_dict(cfg.get("model", cfg))
    if isinstance(model, TriangleSpec):
        cert = lyapunov.lyapunov_check_2d(model)
        _emit({"kind": "triangle", "candidate": "V = 1 - x - y", **cert.to_dict()}, out_path)
        return
    cand_cfg = cfg.get("candidate")
    if cand_cfg:
        cand = lyapunov.LyapunovCandidate1D(
            alpha=float(cand_cfg["alpha"]),
            beta=float(cand_cfg["beta"]),
            amplitude=float(cand_cfg.get("amplitude", 1.0)),
            poly=tuple(cand_cfg.get("poly", (1.0,))),
        )
    else:
        alpha = lyapunov.construct_boundary_candidate(model, End.LEFT)
        beta = lyapunov.construct_boundary_candidate(model, End.RIGHT)
        cand = lyapunov.LyapunovCandidate1D(alpha=alpha, beta=beta)
    cert = lyapunov.certify_lambda0(model, cand)
    if csv_path:
        xs = np.linspace(1e-4, 1.0 - 1e-4, 512)
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("x,L_over_f\n")
            for xv, lv in zip(xs, lyapunov.apply_L_over_f(model, cand, xs)):
                fh.write(f"{xv!r},{lv!r}\n")
    _emit(
        {"kind": "operator1d", "candidate": {"alpha": cand.alpha, "beta": cand.beta},
         **cert.to_dict()},
        out_path,
    )


@main.command()
@config_opt
@seed_opt
@threads_opt
@out_opt
@click.option("--dry-run", is_flag=True, help="Validate the config and print the plan only.")
@_handle_errors
def run(config_path, seed, threads, out_path, dry_run):
    """Full pipeline: simulate, metric series, rate fits, manifest."""
    cfg = _load_config(config_path)
    if seed is not None:
        cfg["seed"] = seed
    cfg = runner.validate_config(cfg)
    if dry_run:
        _emit({"plan": {k: cfg[k] for k in sorted(cfg)}, "config_hash": runner.config_hash(cfg),
               "out": out_path}, None)
        return
    if not out_path:
        raise ValidationError("--out output directory is required")
    manifest = runner.run_experiment(cfg, out_path, threads=threads)
    click.echo(json.dumps({"out": out_path, "config_hash": manifest["config_hash"],
                           "rate_fits": manifest["rate_fits"]}, sort_keys=True))


@main.command()
@click.argument("manifest_a")
@click.argument("manifest_b")
@out_opt
@_handle_errors
def compare(manifest_a, manifest_b, out_path):
    """Diff two run manifests and their metric series."""
    _emit(runner.compare_runs(manifest_a, manifest_b), out_path)


if __name__ == "__main__":
    main()
