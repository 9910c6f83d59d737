"""Config-driven experiment orchestration and artifact output.

A run takes one JSON config describing the model, the scheme, the ensemble
and the requested metrics, and writes a directory of CSV/JSON artifacts
plus a manifest sufficient to reproduce the run bit-exactly.  Artifact
formats are plain: CSV with headers for series and snapshots, JSON for
manifests, certificates and rate fits.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time as _time
from typing import Callable

import numpy as np

from . import __version__ as _pkg_version
from . import invariant, metrics
from .errors import ValidationError
from .operators import (
    End,
    OperatorSpec1D,
    TriangleSpec,
    classify_endpoint,
    invariant_measure_set,
    model_from_dict,
)
from .sde1d import SchemeConfig1D, simulate_ensemble_1d
from .sde2d import SchemeConfig2D, simulate_ensemble_2d

_SEMANTIC_FIELDS = (
    "model",
    "scheme",
    "n_particles",
    "seed",
    "init",
    "metrics",
    "histogram",
    "rate_window",
    "snapshot_csv_cap",
)

_METRICS_1D = ("w1_density", "w1_dirac0", "w1_dirac1", "mean")
_METRICS_2D = ("expect_dist_diag", "w1_x_marginal_edge_density", "mean_x", "mean_y")


def config_hash(cfg: dict) -> str:
    """Hash of the semantically meaningful config fields."""
    semantic = {k: cfg[k] for k in _SEMANTIC_FIELDS if k in cfg}
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(v: float) -> str:
    """Shortest round-trip decimal representation; deterministic."""
    return repr(float(v))


def _write_csv(path: str, header: list, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def _write_json(path: str, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def validate_config(cfg: dict) -> dict:
    """Check the experiment config and fill defaults; returns a copy."""
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    out = dict(cfg)
    if "model" not in out:
        raise ValidationError("config field 'model' is required")
    model = model_from_dict(out["model"])
    if "scheme" not in out:
        raise ValidationError("config field 'scheme' is required")
    if isinstance(model, OperatorSpec1D):
        SchemeConfig1D.from_dict(out["scheme"])
    else:
        SchemeConfig2D.from_dict(out["scheme"])
    n = out.get("n_particles")
    if not isinstance(n, int) or n <= 0:
        raise ValidationError(f"config field 'n_particles' must be a positive integer, got {n!r}")
    seed = out.setdefault("seed", 0)
    if not isinstance(seed, int):
        raise ValidationError("config field 'seed' must be an integer")
    requested = out.setdefault(
        "metrics", ["w1_density"] if isinstance(model, OperatorSpec1D) else ["expect_dist_diag"]
    )
    allowed = _METRICS_1D if isinstance(model, OperatorSpec1D) else _METRICS_2D
    for m in requested:
        if m not in allowed:
            raise ValidationError(f"unknown metric {m!r} for this model; allowed: {allowed}")
    out.setdefault("init", 0.5 if isinstance(model, OperatorSpec1D) else [0.1, 0.1])
    hist = out.get("histogram")
    if hist is not None and (not isinstance(hist, dict) or "bins" not in hist):
        raise ValidationError("config field 'histogram' must be an object with a 'bins' field")
    rw = out.get("rate_window")
    if rw is not None and (len(rw) != 2 or not rw[0] < rw[1]):
        raise ValidationError("config field 'rate_window' must be [t_min, t_max] with t_min < t_max")
    return out


def _stationary_quantile(spec: OperatorSpec1D):
    prof = invariant.stationary_density(spec)
    _, finv = invariant.cdf_and_quantile(prof)
    return prof, finv


def _resolve_init_1d(init, spec: OperatorSpec1D):
    if init == "stationary":
        _, finv = _stationary_quantile(spec)
        return lambda u: finv(u)
    if isinstance(init, (int, float)):
        return float(init)
    raise ValidationError(f"unsupported 1D init {init!r} (number or 'stationary')")


def run_experiment(cfg: dict, out_dir: str, threads: int = 1) -> dict:
    """Execute one experiment and write all artifacts; returns the manifest.

    On any failure the partially written artifacts are removed.
    """
    cfg = validate_config(cfg)
    model = model_from_dict(cfg["model"])
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    t0 = _time.perf_counter()

    def out(name: str) -> str:
        path = os.path.join(out_dir, name)
        written.append(path)
        return path

    try:
        if isinstance(model, OperatorSpec1D):
            manifest = _run_1d(cfg, model, out, threads)
        else:
            manifest = _run_2d(cfg, model, out, threads)
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise

    manifest.update(
        {
            "config": {k: cfg[k] for k in cfg if k in _SEMANTIC_FIELDS},
            "config_hash": config_hash(cfg),
            "threads": threads,
            "package_version": _pkg_version,
            "wall_time_seconds": _time.perf_counter() - t0,
            "artifacts": [os.path.basename(p) for p in written],
        }
    )
    manifest_path = os.path.join(out_dir, "manifest.json")
    _write_json(manifest_path, manifest)
    return manifest


def _snap_name(t: float) -> str:
    return f"snapshot_t{t:g}.csv"


def _run_1d(cfg: dict, spec: OperatorSpec1D, out: Callable, threads: int) -> dict:
    scheme = SchemeConfig1D.from_dict(cfg["scheme"])
    init = _resolve_init_1d(cfg["init"], spec)
    result = simulate_ensemble_1d(
        spec, scheme, cfg["n_particles"], cfg["seed"], init=init, threads=threads
    )

    requested = cfg["metrics"]
    finv = None
    if "w1_density" in requested:
        prof, finv = _stationary_quantile(spec)
        xs = np.linspace(1e-4, 1.0 - 1e-4, 512)
        _write_csv(out("density_reference.csv"), ["x", "density"],
                   zip(xs.tolist(), (prof.density(xs) / prof.Z).tolist()))

    cap = cfg.get("snapshot_csv_cap")
    series: dict[str, list] = {m: [] for m in requested}
    for snap in result.snapshots:
        x = snap.positions
        for m in requested:
            if m == "w1_density":
                val = metrics.wasserstein_p_vs_density(x, finv, 1.0)
            elif m == "w1_dirac0":
                val = metrics.wasserstein_p_to_dirac(x, 0.0, 1.0)
            elif m == "w1_dirac1":
                val = metrics.wasserstein_p_to_dirac(x, 1.0, 1.0)
            else:
                val = float(np.mean(x))
            series[m].append((snap.time, val))
        x_out = x if cap is None or x.size <= cap else x[:cap]
        _write_csv(out(_snap_name(snap.time)), ["x"], ((float(v),) for v in x_out))

    hist_cfg = cfg.get("histogram")
    if hist_cfg:
        bins = int(hist_cfg["bins"])
        rng_lo, rng_hi = hist_cfg.get("range", (0.0, 1.0))
        for snap in result.snapshots:
            h = metrics.histogram(snap.positions, bins, (rng_lo, rng_hi))
            rows = zip(h.bin_edges[:-1].tolist(), h.bin_edges[1:].tolist(),
                       (int(c) for c in h.counts))
            _write_csv(out(f"hist_t{snap.time:g}.csv"), ["bin_left", "bin_right", "count"], rows)

    fits = _emit_series_and_fits(cfg, scheme.t_final, series, out)
    return {
        "kind": "simulate1d",
        "backend": result.backend,
        "n_steps": result.n_steps,
        "clamp_low": result.clamp_low,
        "clamp_high": result.clamp_high,
        "rate_fits": fits,
    }


def _run_2d(cfg: dict, tri: TriangleSpec, out: Callable, threads: int) -> dict:
    scheme = SchemeConfig2D.from_dict(cfg["scheme"])
    init = cfg["init"]
    if not (isinstance(init, (list, tuple)) and len(init) == 2):
        raise ValidationError("2D init must be [x0, y0]")
    result = simulate_ensemble_2d(
        tri, scheme, cfg["n_particles"], cfg["seed"],
        init=(float(init[0]), float(init[1])), threads=threads,
    )

    requested = cfg["metrics"]
    finv = None
    if "w1_x_marginal_edge_density" in requested:
        op = invariant.restricted_diagonal_operator(tri)
        prof, finv = _stationary_quantile(op)
        xs = np.linspace(1e-4, 1.0 - 1e-4, 512)
        _write_csv(out("density_reference.csv"), ["x", "density"],
                   zip(xs.tolist(), (prof.density(xs) / prof.Z).tolist()))

    cap = cfg.get("snapshot_csv_cap")
    series: dict[str, list] = {m: [] for m in requested}
    for snap in result.snapshots:
        for m in requested:
            if m == "expect_dist_diag":
                val = float(np.mean(1.0 - snap.x - snap.y))
            elif m == "w1_x_marginal_edge_density":
                val = metrics.wasserstein_p_vs_density(snap.x, finv, 1.0)
            elif m == "mean_x":
                val = float(np.mean(snap.x))
            else:
                val = float(np.mean(snap.y))
            series[m].append((snap.time, val))
        n = snap.x.size
        k = n if cap is None or n <= cap else cap
        _write_csv(out(_snap_name(snap.time)), ["x", "y"],
                   zip(snap.x[:k].tolist(), snap.y[:k].tolist()))

    hist_cfg = cfg.get("histogram")
    if hist_cfg:
        bins = int(hist_cfg["bins"])
        for snap in result.snapshots:
            counts, xe, ye = np.histogram2d(snap.x, snap.y, bins=bins, range=[[0, 1], [0, 1]])
            rows = []
            for i in range(bins):
                for j in range(bins):
                    rows.append((float(xe[i]), float(ye[j]), int(counts[i, j])))
            _write_csv(out(f"hist2d_t{snap.time:g}.csv"), ["bin_x", "bin_y", "count"], rows)

    fits = _emit_series_and_fits(cfg, scheme.t_final, series, out)
    return {
        "kind": "simulate2d",
        "backend": result.backend,
        "n_steps": result.n_steps,
        "cutoff_x": result.cutoff_x,
        "cutoff_y": result.cutoff_y,
        "rescale": result.rescale,
        "rate_fits": fits,
    }


def _emit_series_and_fits(cfg: dict, t_final: float, series: dict, out: Callable) -> dict:
    window = cfg.get("rate_window")
    if window is None:
        window = (t_final / 4.0, t_final)
    fits = {}
    for name, pts in series.items():
        _write_csv(out(f"metric_{name}.csv"), ["t", "value"], pts)
        times = np.array([p[0] for p in pts])
        vals = np.array([p[1] for p in pts])
        try:
            report = metrics.fit_exponential_rate(times, vals, tuple(window))
        except ValidationError:
            continue
        fits[name] = report.to_dict()
        _write_json(out(f"rate_fit_{name}.json"), report.to_dict())
    return fits


def classify_report(model) -> dict:
    """Endpoint classification and measure enumeration as plain data."""
    if isinstance(model, TriangleSpec):
        return {
            "model": model.to_dict(),
            "note": "triangle edges are Kimura; the diagonal edge carries the "
                    "absolutely continuous invariant measure of the restricted operator",
        }
    left = classify_endpoint(model, End.LEFT)
    right = classify_endpoint(model, End.RIGHT)
    out = {
        "model": model.to_dict(),
        "left": left.kind.value,
        "right": right.kind.value,
    }
    try:
        measures = invariant_measure_set(model)
        out["invariant_measures"] = [m.kind.value for m in measures]
    except ValidationError as exc:
        out["invariant_measures_error"] = str(exc)
    return out


def compare_runs(manifest_a: str, manifest_b: str) -> dict:
    """Diff two run manifests and their shared metric CSVs."""
    with open(manifest_a, encoding="utf-8") as fh:
        ma = json.load(fh)
    with open(manifest_b, encoding="utf-8") as fh:
        mb = json.load(fh)
    if ma.get("kind") != mb.get("kind"):
        raise ValidationError(
            f"manifest kinds differ: {ma.get('kind')!r} vs {mb.get('kind')!r}"
        )
    ca, cb = ma.get("config", {}), mb.get("config", {})
    config_deltas = {}
    for key in sorted(set(ca) | set(cb)):
        if ca.get(key) != cb.get(key):
            config_deltas[key] = {"a": ca.get(key), "b": cb.get(key)}
    dir_a = os.path.dirname(os.path.abspath(manifest_a))
    dir_b = os.path.dirname(os.path.abspath(manifest_b))
    shared = sorted(
        n for n in set(ma.get("artifacts", [])) & set(mb.get("artifacts", []))
        if n.startswith("metric_") and n.endswith(".csv")
    )
    metric_deltas = {}
    for name in shared:
        a = np.genfromtxt(os.path.join(dir_a, name), delimiter=",", names=True)
        b = np.genfromtxt(os.path.join(dir_b, name), delimiter=",", names=True)
        cols = a.dtype.names
        if cols != b.dtype.names or a.shape != b.shape:
            metric_deltas[name] = {"error": "schema or length mismatch"}
            continue
        metric_deltas[name] = {
            c: float(np.max(np.abs(np.atleast_1d(a[c]) - np.atleast_1d(b[c])))) for c in cols
        }
    return {
        "config_deltas": config_deltas,
        "metric_deltas": metric_deltas,
        "hash_a": ma.get("config_hash"),
        "hash_b": mb.get("config_hash"),
        "identical": not config_deltas
        and all(all(v == 0.0 for v in d.values()) for d in metric_deltas.values() if "error" not in d),
    }
