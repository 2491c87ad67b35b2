import json
import subprocess
import sys

import numpy as np
import pytest

from antizeno.cli import main, run, validate


def inline_two_site():
    return {
        "n_sites": 2,
        "site_energies": [10.0, 0.0],
        "couplings": [[0.0, 1.0], [1.0, 0.0]],
        "trap_rates": [0.0, 0.5],
        "decay_rate": 0.001,
        "initial_site": 1,
    }


def test_validate_figure2_preset():
    assert validate({"scenario": "figure2"}) == []


def test_validate_unknown_scenario():
    diag = validate({"scenario": "figure9"})
    assert len(diag) == 1 and "figure9" in diag[0]


def test_validate_nonpositive_tau():
    diag = validate({"scenario": "efficiency-scan", "model": inline_two_site(), "tau_grid": [0.0, 0.1]})
    assert any("tau must be > 0" in d for d in diag)


def test_validate_asymmetric_couplings():
    model = inline_two_site()
    model["couplings"] = [[0.0, 1.0], [0.5, 0.0]]
    diag = validate({"scenario": "efficiency-scan", "model": model, "tau_grid": [0.1]})
    assert any("couplings[1][2]" in d and "couplings[2][1]" in d for d in diag)


def test_validate_missing_model():
    diag = validate({"scenario": "evolve"})
    assert any("model" in d for d in diag)


def test_validate_crossover_horizon():
    diag = validate({"scenario": "crossover", "model": inline_two_site(), "tau": 0.5, "horizon": 0.1})
    assert any("horizon" in d for d in diag)


def test_run_invalid_config_exits_2(capsys, tmp_path):
    code = run({"scenario": "efficiency-scan", "model": inline_two_site(), "tau_grid": [-1.0], "out": str(tmp_path)})
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_run_efficiency_scan(tmp_path):
    config = {
        "scenario": "efficiency-scan",
        "model": inline_two_site(),
        "tau_grid": [0.1, 0.2, 0.3, 0.4],
        "out": str(tmp_path),
    }
    assert run(config) == 0
    scan = (tmp_path / "scan.csv").read_text()
    assert scan.splitlines()[0] == "tau,eps_tau,eta,trapped,dissipated,residual"
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["outputs"] == ["scan.csv"]
    assert manifest["config"]["scenario"] == "efficiency-scan"


def test_run_outputs_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        config = {
            "scenario": "sweep",
            "disorder": {
                "n_sites": 3,
                "topology": "complete",
                "mean_disorder": 10.0,
                "coupling_scale": 1.0,
                "trap_rate": 0.5,
                "decay_rate": 0.001,
            },
            "seeds": [0, 1],
            "tau_grid": [0.1, 0.3, 0.5],
            "out": str(out),
        }
        assert run(config) == 0
    for name in ("sweep_seed0.csv", "sweep_seed1.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_crossover(tmp_path):
    model = inline_two_site()
    model["trap_rates"] = [0.0, 0.0]
    model["decay_rate"] = 0.0
    config = {"scenario": "crossover", "model": model, "tau": 0.1, "horizon": 50.0, "out": str(tmp_path)}
    assert run(config) == 0
    out = json.loads((tmp_path / "crossover.json").read_text())
    assert out["t_c"] is not None
    assert out["n_c"] * 0.1 == pytest.approx(out["t_c"])


def test_run_evolve_pure_decay(tmp_path):
    # v = 0: populations just decay at 2 (Gamma + kappa_i)
    model = inline_two_site()
    model["couplings"] = [[0.0, 0.0], [0.0, 0.0]]
    model["initial_site"] = 2
    config = {
        "scenario": "evolve",
        "model": model,
        "times": [0.0, 0.5, 1.0],
        "out": str(tmp_path),
    }
    assert run(config) == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,p_1,p_2,trace"
    for line in lines[1:]:
        t, p1, p2, trace = (float(x) for x in line.split(","))
        assert p2 == pytest.approx(np.exp(-2 * (0.001 + 0.5) * t), abs=1e-6)
        assert p1 == pytest.approx(0.0, abs=1e-12)


def test_run_evolve_measured(tmp_path):
    config = {
        "scenario": "evolve",
        "model": inline_two_site(),
        "tau": 0.3,
        "n_steps": 10,
        "out": str(tmp_path),
    }
    assert run(config) == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 12


def test_run_figure3_reduced(tmp_path):
    config = {
        "scenario": "figure3",
        "two_gammas": [0.0, 10.0],
        "times": {"max": 2.0, "n": 50},
        "out": str(tmp_path),
    }
    assert run(config) == 0
    assert (tmp_path / "figure3_2gamma0.csv").exists()
    assert (tmp_path / "figure3_2gamma10.csv").exists()
    lines = (tmp_path / "figure3_2gamma0.csv").read_text().splitlines()
    assert lines[0] == "t,concurrence"
    assert len(lines) == 52


def test_run_figure2_reduced(tmp_path, monkeypatch):
    monkeypatch.setenv("ZT_THREADS", "2")
    config = {
        "scenario": "figure2",
        "eps_list": [5.0, 10.0],
        "n_points": 12,
        "out": str(tmp_path),
    }
    assert run(config) == 0
    for eps in (5, 10):
        lines = (tmp_path / f"figure2_eps{eps}.csv").read_text().splitlines()
        assert len(lines) == 13


def test_main_overrides(tmp_path):
    config_path = tmp_path / "run.json"
    config_path.write_text(
        json.dumps({"scenario": "efficiency-scan", "model": inline_two_site(), "tau_grid": [0.1, 0.2]})
    )
    out = tmp_path / "out"
    assert main(["--config", str(config_path), "--out", str(out)]) == 0
    assert (out / "scan.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["out"] == str(out)


def test_main_missing_config(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "nope.json")]) == 2
    assert "config error" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    config_path = tmp_path / "run.json"
    config_path.write_text(
        json.dumps(
            {
                "scenario": "efficiency-scan",
                "model": inline_two_site(),
                "tau_grid": [0.1],
                "out": str(tmp_path / "o"),
            }
        )
    )
    proc = subprocess.run(
        [sys.executable, "-m", "antizeno.cli", "--config", str(config_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "o" / "manifest.json").exists()
