import csv
import io
import json

import pytest

from entropic import harness, ising
from entropic.harness import SweepError, SweepSpec, run_sweep, spec_from_config
from entropic.kmc.simulate import run_trajectory, stream_seed
from entropic.toric_static import ToricParams


def _kmc_cfg(**kw):
    cfg = {"model": "toric-kmc", "params": {"L": 2}, "grids": {"M": [1, 2, 4]},
           "execution": {"trajectories": 20, "seed": 3}}
    cfg.update(kw)
    return cfg


def test_single_point_equals_direct_call():
    spec = spec_from_config({"model": "toric-kmc", "params": {"L": 3, "M": 4},
                             "execution": {"trajectories": 1, "seed": 5}})
    head, rows = run_sweep(spec)
    assert len(rows) == 1
    row = dict(zip(head, rows[0]))
    direct = run_trajectory(ToricParams.plateau(M=4, L=3), stream_seed(5, 0, 0))
    assert float(row["failure_time"]) == direct.failure_time
    assert row["sector"] == direct.failure_sector and int(row["n_cr"]) == direct.n_cr


def test_ising_point_equals_direct_call():
    spec = spec_from_config({"model": "ising", "grids": {"beta": [0.5, 2.0]}})
    head, rows = run_sweep(spec)
    for r, beta in zip(rows, (0.5, 2.0)):
        xi = ising.correlation_length(ising.ChainParams(beta, 1e-3, 50.0, 50))
        assert float(dict(zip(head, r))["xi"]) == xi


def test_byte_identical_across_workers(tmp_path):
    texts = []
    for w in (1, 4, 16):
        out = tmp_path / f"w{w}.csv"
        spec = spec_from_config(_kmc_cfg(), workers=w, out=str(out))
        run_sweep(spec)
        texts.append(out.read_bytes())
    assert texts[0] == texts[1] == texts[2]
    meta = json.loads((tmp_path / "w1.csv.meta.json").read_text())
    assert meta["schema_version"] == harness.SCHEMA_VERSION and meta["rows"] == 60


def test_row_count_and_order():
    spec = spec_from_config(_kmc_cfg(grids={"M": [8, 16, 32]}, params={"L": 3},
                                     execution={"trajectories": 200, "seed": 0}), workers=4)
    head, rows = run_sweep(spec)
    assert len(rows) == 600
    keys = [(int(r[0]), int(r[1])) for r in rows]
    assert keys == sorted(keys)
    assert head[:3] == ["point", "trajectory", "seed"]


def test_invalid_points_reported_with_indices():
    cfg = {"model": "toric-kmc", "grids": {"M": [4, 0, 8, -1]}}
    with pytest.raises(SweepError) as info:
        spec_from_config(cfg)
    assert [i for i, _ in info.value.invalid] == [1, 3]


@pytest.mark.parametrize("cfg", [
    {"model": "nope"},
    {"model": "ising", "params": {"L": 4}},
    {"model": "toric-kmc", "options": {"failure": "sometimes"}},
    {"model": "toric-kmc", "options": {"colour": 1}},
    {"model": "toric-kmc", "grids": {"M": []}},
    {"model": "toric-kmc", "execution": {"trajectories": 0}},
    {"model": "toric-kmc", "execution": {"seed": -1}},
    {"model": "ising", "extra": {}},
])
def test_validation_errors(cfg):
    with pytest.raises(SweepError):
        spec_from_config(cfg)


def test_yaml_config_roundtrip(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("model: bkt\ngrids:\n  beta: [0.2, 0.3]\n  M: [1, 10]\n")
    spec = spec_from_config(harness.load_config(str(path)))
    head, rows = run_sweep(spec)
    assert len(rows) == 4
    assert "l_star" in head and "nu_eff" in head


def test_resume_after_interrupt(tmp_path, monkeypatch):
    out = tmp_path / "r.csv"
    spec = spec_from_config(_kmc_cfg(), out=str(out))
    calls = {"n": 0}
    real = harness.run_job

    def flaky(job):
        calls["n"] += 1
        if calls["n"] > 25:
            raise KeyboardInterrupt
        return real(job)

    monkeypatch.setattr(harness, "run_job", flaky)
    with pytest.raises(KeyboardInterrupt):
        run_sweep(spec)
    man = json.loads((tmp_path / "r.csv.manifest.json").read_text())
    assert len(man["completed"]) == 25 and man["schema_version"] == harness.SCHEMA_VERSION
    monkeypatch.setattr(harness, "run_job", real)
    run_sweep(spec, resume=True)
    assert not (tmp_path / "r.csv.manifest.json").exists()
    ref = tmp_path / "ref.csv"
    run_sweep(spec_from_config(_kmc_cfg(), out=str(ref)))
    assert out.read_bytes() == ref.read_bytes()


def test_resume_rejects_other_spec(tmp_path):
    out = tmp_path / "r.csv"
    spec = spec_from_config(_kmc_cfg(), out=str(out))
    harness._flush_partial(spec, harness.header(spec), {})
    other = spec_from_config(_kmc_cfg(execution={"trajectories": 5, "seed": 3}), out=str(out))
    with pytest.raises(SweepError):
        run_sweep(other, resume=True)


def test_float_formatting_round_trips():
    for v in (0.1, 1 / 3, 1e-300, 12345.678):
        assert float(harness._fmt(v)) == v
    assert harness._fmt(float("inf")) == "inf" and harness._fmt(None) == ""
    assert harness._fmt(True) == "1"


def test_json_cleaning():
    text = harness.dumps({"a": float("inf"), "b": [float("nan")], "c": 1})
    assert json.loads(text) == {"a": "inf", "b": ["nan"], "c": 1}
