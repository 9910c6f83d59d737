"""Experiment runner artifacts, reproducibility, and the command line."""

import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from degenlab.cli import main
from degenlab.errors import ValidationError
from degenlab.runner import (
    compare_runs,
    config_hash,
    run_experiment,
    validate_config,
)

CFG_1D = {
    "model": {"type": "operator1d", "a": [1.0], "b": [0.5, -2.5], "m0": 1, "m1": 2},
    "scheme": {"dt": 2.0**-7, "t_final": 0.25, "snapshot_times": [0.125, 0.25]},
    "n_particles": 500,
    "seed": 7,
    "metrics": ["w1_density", "mean"],
    "histogram": {"bins": 16},
}

CFG_2D = {
    "model": {"type": "triangle", "gamma12": 1.0, "gamma13": 2.0, "gamma23": 1.0},
    "scheme": {
        "dt": 2.0**-7,
        "t_final": 0.25,
        "snapshot_times": [0.03125 * k for k in range(1, 9)],
    },
    "n_particles": 300,
    "seed": 3,
    "metrics": ["expect_dist_diag"],
}


# --- config validation ------------------------------------------------------


def test_validate_config_names_missing_fields():
    with pytest.raises(ValidationError, match="'model'"):
        validate_config({"scheme": {}})
    cfg = {k: v for k, v in CFG_1D.items() if k != "scheme"}
    with pytest.raises(ValidationError, match="'scheme'"):
        validate_config(cfg)
    bad = dict(CFG_1D, n_particles=-5)
    with pytest.raises(ValidationError, match="n_particles"):
        validate_config(bad)
    bad = dict(CFG_1D, metrics=["no_such_metric"])
    with pytest.raises(ValidationError, match="no_such_metric"):
        validate_config(bad)
    bad = dict(CFG_1D, rate_window=[2.0, 1.0])
    with pytest.raises(ValidationError, match="rate_window"):
        validate_config(bad)


def test_config_hash_semantic_only():
    a = validate_config(dict(CFG_1D))
    b = validate_config(dict(CFG_1D, comment="ignored"))
    assert config_hash(a) == config_hash(b)
    c = validate_config(dict(CFG_1D, seed=8))
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 16


# --- artifacts --------------------------------------------------------------


def test_run_1d_manifest_matches_directory(tmp_path):
    out = tmp_path / "run"
    man = run_experiment(dict(CFG_1D), str(out))
    on_disk = sorted(os.listdir(out))
    listed = sorted(man["artifacts"] + ["manifest.json"])
    assert on_disk == listed
    assert "snapshot_t0.25.csv" in man["artifacts"]
    assert "metric_w1_density.csv" in man["artifacts"]
    assert "metric_mean.csv" in man["artifacts"]
    assert "hist_t0.25.csv" in man["artifacts"]
    assert "density_reference.csv" in man["artifacts"]
    assert man["backend"] in ("cython", "python")
    assert man["wall_time_seconds"] > 0
    # metric series is well formed
    arr = np.genfromtxt(out / "metric_mean.csv", delimiter=",", names=True)
    assert arr.dtype.names == ("t", "value")
    assert arr["t"][-1] == pytest.approx(0.25)


def test_run_2d_manifest(tmp_path):
    man = run_experiment(dict(CFG_2D), str(tmp_path / "run2d"))
    assert man["kind"] == "simulate2d"
    assert "metric_expect_dist_diag.csv" in man["artifacts"]
    assert "rate_fit_expect_dist_diag.json" in man["artifacts"]
    with open(tmp_path / "run2d" / "rate_fit_expect_dist_diag.json") as fh:
        fit = json.load(fh)
    assert fit["rate"] < 0.0


def test_rerun_is_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_experiment(dict(CFG_1D), str(a))
    run_experiment(dict(CFG_1D), str(b), threads=4)
    for name in os.listdir(a):
        if name == "manifest.json":
            continue  # wall time differs by design
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_failed_run_leaves_no_artifacts(tmp_path):
    out = tmp_path / "broken"
    bad = dict(CFG_1D, metrics=["w1_density"], n_particles=10)
    bad["scheme"] = dict(bad["scheme"], dt=-1.0)
    with pytest.raises(ValidationError):
        run_experiment(bad, str(out))
    assert not out.exists() or os.listdir(out) == []


# --- compare ----------------------------------------------------------------


def test_compare_identical_runs(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_experiment(dict(CFG_1D), str(a))
    run_experiment(dict(CFG_1D), str(b))
    rep = compare_runs(str(a / "manifest.json"), str(b / "manifest.json"))
    assert rep["identical"]
    assert rep["config_deltas"] == {}
    for deltas in rep["metric_deltas"].values():
        assert all(v == 0.0 for v in deltas.values())


def test_compare_detects_dt_change(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_experiment(dict(CFG_1D), str(a))
    halved = dict(CFG_1D, scheme=dict(CFG_1D["scheme"], dt=2.0**-8))
    run_experiment(halved, str(b))
    rep = compare_runs(str(a / "manifest.json"), str(b / "manifest.json"))
    assert not rep["identical"]
    assert "scheme" in rep["config_deltas"]
    assert any(
        any(v > 0.0 for v in d.values()) for d in rep["metric_deltas"].values()
    )


# --- command line -----------------------------------------------------------


def _write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_cli_classify(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["classify", "--config", _write_cfg(tmp_path, CFG_1D)])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["left"] == "kimura_transverse"
    assert rep["right"] == "quadratic_transverse"
    # a transverse quadratic end is sticky, so the point mass there
    # coexists with the interior density
    assert set(rep["invariant_measures"]) == {"dirac_right", "absolutely_continuous"}


def test_cli_invariant(tmp_path):
    runner = CliRunner()
    res = runner.invoke(
        main, ["invariant", "--config", _write_cfg(tmp_path, CFG_1D), "--grid", "64"]
    )
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["Z"] == pytest.approx(8.0 * np.sqrt(2.0), rel=1e-8)
    assert len(rep["density"]) == 64


def test_cli_run_and_compare(tmp_path):
    runner = CliRunner()
    cfg_path = _write_cfg(tmp_path, CFG_1D)
    res = runner.invoke(main, ["run", "--config", cfg_path, "--dry-run"])
    assert res.exit_code == 0, res.output
    assert "config_hash" in res.output
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    for out in (out_a, out_b):
        res = runner.invoke(main, ["run", "--config", cfg_path, "--out", out])
        assert res.exit_code == 0, res.output
    res = runner.invoke(
        main,
        ["compare", os.path.join(out_a, "manifest.json"), os.path.join(out_b, "manifest.json")],
    )
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["identical"]


def test_cli_rates_on_run_output(tmp_path):
    runner = CliRunner()
    out = str(tmp_path / "r")
    res = runner.invoke(
        main, ["run", "--config", _write_cfg(tmp_path, CFG_2D), "--out", out]
    )
    assert res.exit_code == 0, res.output
    res = runner.invoke(
        main, ["rates", os.path.join(out, "metric_expect_dist_diag.csv")]
    )
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["rate"] < 0.0


def test_cli_lyapunov(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["lyapunov", "--config", _write_cfg(tmp_path, CFG_2D)])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["rate_window"] == [1.0, 3.0]


def test_cli_exit_code_validation(tmp_path):
    runner = CliRunner()
    bad = dict(CFG_1D, n_particles=0)
    res = runner.invoke(main, ["run", "--config", _write_cfg(tmp_path, bad), "--dry-run"])
    assert res.exit_code == 2
    # neutral quadratic endpoint: measure enumeration is fine but the
    # lyapunov boundary recipe has no candidate
    neutral = {"model": {"type": "operator1d", "a": [1.0], "b": [0.5, -1.5], "m0": 1, "m1": 2}}
    res = runner.invoke(
        main, ["lyapunov", "--config", _write_cfg(tmp_path, neutral, "n.json")]
    )
    assert res.exit_code == 2


def test_cli_exit_code_io(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["classify", "--config", str(tmp_path / "missing.json")])
    assert res.exit_code == 4
    res = runner.invoke(
        main, ["compare", str(tmp_path / "no_a.json"), str(tmp_path / "no_b.json")]
    )
    assert res.exit_code == 4


def test_cli_seed_override_changes_hash(tmp_path):
    runner = CliRunner()
    cfg_path = _write_cfg(tmp_path, CFG_1D)
    r1 = runner.invoke(main, ["run", "--config", cfg_path, "--dry-run"])
    r2 = runner.invoke(main, ["run", "--config", cfg_path, "--seed", "99", "--dry-run"])
    assert r1.exit_code == 0 and r2.exit_code == 0
    h1 = json.loads(r1.output)["config_hash"]
    h2 = json.loads(r2.output)["config_hash"]
    assert h1 != h2
