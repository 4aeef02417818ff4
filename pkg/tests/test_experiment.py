import csv
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from ousparse.cli import main
from ousparse.errors import ConfigError, ReplayError
from ousparse.experiment import (
    RUNS_HEADER,
    Scenario,
    expand_sweep,
    load_config,
    replay,
    run_cell,
    run_scenario,
    scenario_hash,
    validate_config,
)
from ousparse.ou import generate_sparse_stable_drift, simulate_euler, stationary_start, subsample
from ousparse.rng import RngState

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = {
    "name": "small",
    "d": 3,
    "s": 5,
    "big_t": 10,
    "model": {"sigma": 1.0, "jumps": {"kind": "laplace", "intensity": 1.0}},
    "estimators": ["lasso", "slope", "truncated_mle", "true_mle"],
    "tuning": {"mode": "cv", "grid": {"lo": 0.001, "hi": 1, "num": 5}},
    "seeds": [0, 1],
    "sweep": {"param": "d", "values": [3, 4]},
}


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    scenarios = validate_config(load_config(path))
    assert scenarios and all(isinstance(s, Scenario) for s in scenarios)


def test_hash_ignores_key_order():
    shuffled = dict(reversed(list(SMALL.items())))
    assert scenario_hash(shuffled) == scenario_hash(SMALL)
    assert scenario_hash({**SMALL, "seeds": [0]}) != scenario_hash(SMALL)


def test_sweep_expansion():
    cells = expand_sweep(SMALL)
    assert [v for v, _ in cells] == [3, 4]
    assert cells[1][1]["d"] == 4 and "sweep" not in cells[1][1]
    nested = expand_sweep({**SMALL, "sweep": {"param": "truncation.eta", "values": [1, 2]}})
    assert nested[1][1]["truncation"]["eta"] == 2


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"s": 2}, "s"),
        ({"s": 20}, "s"),
        ({"d": 0, "sweep": None}, "d"),
        ({"seeds": []}, "seeds"),
        ({"estimators": ["ridge"]}, "estimators"),
        ({"bogus": 1}, "bogus"),
        ({"big_t": 10.005}, "big_t"),
        ({"tuning": {"mode": "magic"}}, "tuning.mode"),
        ({"truncation": {"mode": "fixed", "b": -1, "eta": 1}}, "truncation.b"),
        ({"model": {"jumps": {"kind": "pareto", "alpha": 1.5}}}, "model"),
        ({"sweep": {"param": "d", "values": []}}, "sweep.values"),
    ],
)
def test_invalid_configs_name_the_field(patch, field):
    with pytest.raises(ConfigError) as exc:
        validate_config({**SMALL, **patch})
    assert exc.value.field == field


def test_config_error_reports_line(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "d": 3,\n  "s": 2,\n  "big_t": 10\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(bad)
    assert exc.value.line == 3 and exc.value.field == "s"
    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "d": 3,\n  "s": 3\n  "big_t": 10\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(broken)
    assert exc.value.line == 4


def test_scalar_smoke_pipeline_matches_hand_formula():
    cfg = load_config(CONFIGS / "scalar_smoke.json")
    scn = Scenario.from_dict(cfg)
    out = run_cell(scn, 0)
    assert all(r["status"] == "ok" for r in out.records)
    # rebuild the same path by hand
    drift_rng, sim_rng, _ = RngState.from_seed(0).spawn(3)
    drift = generate_sparse_stable_drift(1, 1, (-0.5, 0.5), drift_rng)
    x0 = stationary_start(drift, scn.model, sim_rng)
    obs = subsample(simulate_euler(drift, scn.model, x0, 50.0, sim_rng), 5000)
    x, dx = obs.obs[:-1, 0], obs.increments[:, 0]
    hand = -np.sum(dx * x) / (obs.delta_n * np.sum(x * x))
    assert out.estimates["lasso"].a_hat[0, 0] == pytest.approx(hand, rel=1e-6)
    assert out.estimates["truncated_mle"].a_hat[0, 0] == pytest.approx(hand, rel=1e-12)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    res = run_scenario(SMALL, out, workers=1)
    return out, res


def test_run_outputs(small_run):
    out, res = small_run
    rows = read_rows(out / "runs.csv")
    assert tuple(rows[0].keys()) == RUNS_HEADER
    assert len(rows) == 2 * 2 * 4  # sweep values x seeds x estimators
    assert {r["status"] for r in rows} == {"ok"}
    assert (out / "runs.csv").read_bytes().count(b"\r\n") == len(rows) + 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"] == SMALL and manifest["scenario_hash"] == scenario_hash(SMALL)
    timings = read_rows(out / "timings.csv")
    assert len(timings) == 4 and all(float(t["wall_time"]) > 0 for t in timings)


def test_summary_means_match_runs(small_run):
    out, _ = small_run
    rows = read_rows(out / "runs.csv")
    for srow in read_rows(out / "summary.csv"):
        sel = [r for r in rows if r["sweep_value"] == srow["sweep_value"] and r["estimator"] == srow["estimator"]]
        for metric in ("l1", "l2", "kept_fraction"):
            vals = [float(r[metric]) for r in sel]
            assert float(srow[f"{metric}_mean"]) == pytest.approx(sum(vals) / len(vals), rel=1e-14)
            assert float(srow[f"{metric}_std"]) == pytest.approx(np.std(vals, ddof=1), rel=1e-12, abs=1e-15)


def test_plots_are_wellformed_svg(small_run):
    out, _ = small_run
    svgs = sorted((out / "plots").glob("*.svg"))
    assert [p.name for p in svgs] == ["kept_fraction.svg", "l1.svg", "l2.svg"]
    for p in svgs:
        root = ET.parse(p).getroot()
        assert root.tag.endswith("svg")


def test_replay_every_cell(small_run):
    out, _ = small_run
    for r in read_rows(out / "runs.csv"):
        est, row = replay(out, int(r["seed"]), r["estimator"], json.loads(r["sweep_value"]))
        assert row["l2"] == r["l2"]


def test_replay_errors(small_run, tmp_path):
    out, _ = small_run
    with pytest.raises(ReplayError):
        replay(out, 99, "lasso", 3)
    with pytest.raises(ReplayError):
        replay(out, 0, "lasso")  # ambiguous without sweep value
    tampered = tmp_path / "tampered"
    tampered.mkdir()
    for name in ("runs.csv", "manifest.json"):
        (tampered / name).write_bytes((out / name).read_bytes())
    manifest = json.loads((tampered / "manifest.json").read_text())
    manifest["scenario_hash"] = "0" * 64
    (tampered / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(ReplayError, match="hash mismatch"):
        replay(tampered, 0, "lasso", 3)


def test_replay_detects_changed_result(small_run, tmp_path):
    out, _ = small_run
    edited = tmp_path / "edited"
    edited.mkdir()
    (edited / "manifest.json").write_bytes((out / "manifest.json").read_bytes())
    with open(out / "runs.csv", newline="") as fh:
        text = fh.read()
    rows = read_rows(out / "runs.csv")
    target = next(r for r in rows if r["seed"] == "1" and r["estimator"] == "slope" and r["sweep_value"] == "4")
    with open(edited / "runs.csv", "w", newline="") as fh:
        fh.write(text.replace(target["l2"], repr(float(target["l2"]) * 1.001)))
    with pytest.raises(ReplayError, match="mismatch in l2"):
        replay(edited, 1, "slope", 4)


def test_seed_offset_changes_records(tmp_path):
    cfg = {**SMALL, "sweep": None, "seeds": [0], "estimators": ["truncated_mle"]}
    a = run_scenario(cfg, tmp_path / "a", plots=False)
    b = run_scenario(cfg, tmp_path / "b", seed_offset=5, plots=False)
    assert a.records[0]["seed"] == 0 and b.records[0]["seed"] == 5
    assert a.records[0]["l2"] != b.records[0]["l2"]


def test_failures_are_recorded_not_fatal(tmp_path):
    cfg = {**SMALL, "sweep": None, "truncation": {"mode": "fixed", "b": 1e-6, "eta": 1000}}
    res = run_scenario(cfg, tmp_path, plots=False)
    status = {r["estimator"]: r["status"] for r in res.records if r["seed"] == 0}
    assert status["truncated_mle"].startswith("error: RankError")
    assert status["lasso"] == "ok"
    summary = {r["estimator"]: r for r in res.summary}
    assert summary["truncated_mle"]["n_ok"] == 0 and math.isnan(summary["truncated_mle"]["l2_mean"])


def test_theoretical_modes_run(tmp_path):
    cfg = {
        **SMALL,
        "sweep": None,
        "seeds": [0],
        "estimators": ["lasso", "slope"],
        "truncation": {"mode": "theoretical", "tail": {"kind": "subweibull", "alpha": 1.0, "c_alpha": 1.0}, "b_const": 3.0},
        "tuning": {"mode": "theoretical", "c_star": 0.1},
    }
    res = run_scenario(cfg, tmp_path, plots=False)
    assert all(r["status"] == "ok" for r in res.records)
    assert all(r["lambda"] > 0 and r["eta"] > 0 for r in res.records)


def test_parallel_matches_serial(tmp_path):
    cfg = {**SMALL, "estimators": ["lasso", "truncated_mle"]}
    run_scenario(cfg, tmp_path / "w1", workers=1, plots=False)
    run_scenario(cfg, tmp_path / "w2", workers=2, plots=False)
    assert (tmp_path / "w1" / "runs.csv").read_bytes() == (tmp_path / "w2" / "runs.csv").read_bytes()
    assert (tmp_path / "w1" / "summary.csv").read_bytes() == (tmp_path / "w2" / "summary.csv").read_bytes()


def test_cli_run_and_replay(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**SMALL, "sweep": None, "seeds": [3]}))
    assert main(["run", str(cfg), "--out", str(tmp_path / "out"), "--no-plots"]) == 0
    assert "wrote 4 records" in capsys.readouterr().out
    assert main(["replay", str(tmp_path / "out"), "--seed", "3", "--estimator", "slope"]) == 0
    assert "match" in capsys.readouterr().out
    assert main(["replay", str(tmp_path / "out"), "--seed", "4", "--estimator", "slope"]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"d": 2, "s": 1, "big_t": 1}')
    assert main(["run", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "field 's'" in capsys.readouterr().err


def test_baseline_cv_lambda_interior(tmp_path):
    cfg = load_config(CONFIGS / "support_baseline.json")
    cfg["estimators"] = ["lasso"]
    res = run_scenario(cfg, tmp_path, plots=False)
    grid = (1e-3, 10.0)
    interior = [r for r in res.records if grid[0] * 1.0001 < r["lambda"] < grid[1] * 0.9999]
    assert len(interior) >= 8
