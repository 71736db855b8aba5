import json
import subprocess
import sys

import pytest

from entropic.cli import main


def _run(args, capsys):
    code = main(args)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


@pytest.mark.parametrize("args, head", [
    (["ising-scan", "--points", "5"], "inv_beta,xi,regime"),
    (["toric-kmc", "--trajectories", "3", "--L", "3", "--M", "2"],
     "seed,failure_time,sector,class,censored,n_cr,n_dif,n_ann"),
    (["bkt-flow", "--samples", "5"], "l,K,y"),
    (["bkt-xi", "--points", "3", "--M", "1,10"], "beta,M,xi,nu_eff"),
])
def test_csv_subcommands(args, head, capsys):
    code, out, err = _run(["--seed", "1"] + args, capsys)
    assert code == 0, err
    assert out.splitlines()[0] == head


def test_toric_static_json(capsys):
    code, out, _ = _run(["toric-static", "--samples", "200", "--L", "4", "--M", "8"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["schema_version"] == 1 and "stabilizer_expectation" in rep


def test_toric_scaling_json(capsys):
    code, out, err = _run(["toric-scaling", "--L-grid", "2", "--M-grid", "2,4,8",
                           "--trajectories", "10", "--bootstrap", "20"], capsys)
    assert code == 0, err
    rep = json.loads(out)
    assert len(rep["points"]) == 3 and "alpha_M" in rep and rep["warnings"]


def test_bkt_crossover_json(capsys):
    code, out, err = _run(["bkt-crossover", "--L", "1000", "--M", "10"], capsys)
    assert code == 0, err
    rep = json.loads(out)
    assert rep["beta_c"] < rep["beta_bkt"] and rep["b"] > 0


def test_sweep_with_config(tmp_path, capsys):
    cfg = tmp_path / "s.yaml"
    cfg.write_text("model: ising\ngrids:\n  beta: [0.1, 1.0]\n")
    out = tmp_path / "s.csv"
    code, _, err = _run(["sweep", "--config", str(cfg), "--out", str(out), "--workers", "2"], capsys)
    assert code == 0, err
    assert len(out.read_text().splitlines()) == 3


def test_flat_config_and_override(tmp_path, capsys):
    cfg = tmp_path / "f.yaml"
    cfg.write_text("points: 4\nbeta-min: 0.01\n")
    code, out, _ = _run(["ising-scan", "--config", str(cfg)], capsys)
    assert code == 0 and len(out.splitlines()) == 5
    code, out, _ = _run(["ising-scan", "--config", str(cfg), "--points", "2"], capsys)
    assert len(out.splitlines()) == 3


@pytest.mark.parametrize("args", [
    ["toric-static", "--M", "0"],
    ["toric-kmc", "--failure", "sometimes"],
    ["sweep"],
    ["bkt-flow", "--J", "-1"],
])
def test_errors_are_json(args, capsys):
    code, _, err = _run(args, capsys)
    assert code != 0
    payload = json.loads(err.strip().splitlines()[-1])
    assert set(payload) >= {"error", "message"}


def test_invalid_sweep_lists_points(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("model: toric-kmc\ngrids:\n  M: [4, 0]\n")
    code, _, err = _run(["sweep", "--config", str(cfg)], capsys)
    assert code == 1
    assert json.loads(err)["invalid"][0][0] == 1


def test_usage_error_exit_code():
    r = subprocess.run([sys.executable, "-m", "entropic.cli", "--bogus"], capture_output=True, text=True)
    assert r.returncode == 2
    assert json.loads(r.stderr.strip().splitlines()[-1])["error"] == "UsageError"


def test_console_script_runs():
    r = subprocess.run(["entropic", "bkt-flow", "--samples", "3"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("l,K,y")
