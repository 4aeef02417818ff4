"""Scenario-driven simulation study: config parsing, seeded cells, run tables, replay.

A scenario is a JSON document (see ``configs/`` and the README for the
schema).  One *cell* is a (sweep value, seed) pair: it generates a drift
matrix, simulates the process, picks truncation and tuning parameters, runs
every requested estimator and scores it against the truth.  Cells are
independent and may run on a process pool; all outputs are assembled in a
canonical order afterwards, so files do not depend on the worker count.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .contrast import TruncationConfig, empirical_moments
from .errors import ConfigError, OusparseError, ReplayError
from .estimators import DriftEstimate, SolverConfig, fit_lasso, fit_mle, fit_slope, true_mle
from .levy import JumpSpec, LevyModel, cov_brownian, nu2_matrix
from .linalg import spectral_norm
from .metrics import l1_l2_errors, support_report
from .ou import DT_FINE, generate_sparse_stable_drift, simulate_euler, stationary_start, subsample
from .rng import RngState
from .tuning import (
    BoundedJumps,
    Continuous,
    CvConfig,
    PolyMoment,
    SubWeibull,
    TheoryInputs,
    cross_validate,
    default_grid,
    gamma_factor,
    pick_truncation,
    theoretical_eta,
    theoretical_lambda,
)

log = logging.getLogger(__name__)

ESTIMATORS = ("lasso", "slope", "truncated_mle", "true_mle")

RUNS_HEADER = (
    "scenario_hash",
    "sweep_param",
    "sweep_value",
    "seed",
    "estimator",
    "status",
    "lambda",
    "b_radius",
    "eta",
    "kept_fraction",
    "l1",
    "l2",
    "correct",
    "missed",
    "spurious",
    "iters",
    "converged",
)
SUMMARY_HEADER = (
    "sweep_param",
    "sweep_value",
    "estimator",
    "n_ok",
    "l1_mean",
    "l1_std",
    "l2_mean",
    "l2_std",
    "kept_fraction_mean",
    "kept_fraction_std",
)

_TOP_KEYS = {
    "name", "description", "d", "s", "big_t", "n_obs", "delta_n", "dt_fine", "value_range",
    "model", "truncation", "estimators", "tuning", "seeds", "sweep", "solver", "zero_tol",
}


# --- config ---------------------------------------------------------------------------


def scenario_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form (stable under key reordering)."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode()).hexdigest()


def _num(value, fieldname: str, *, positive=False, integer=False, allow_inf=False) -> float:
    if allow_inf and (value is None or value in ("inf", "Infinity")):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", fieldname)
    if integer and (not float(value).is_integer()):
        raise ConfigError(f"expected an integer, got {value!r}", fieldname)
    if positive and not value > 0:
        raise ConfigError(f"must be > 0, got {value!r}", fieldname)
    return int(value) if integer else float(value)


def _check_keys(section: dict, allowed: set[str], prefix: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError("expected an object", prefix or None)
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key (allowed: {sorted(allowed)})", f"{prefix}{key}")


@dataclass(frozen=True)
class Scenario:
    d: int
    s: int
    big_t: float
    model: LevyModel
    n_obs: int
    dt_fine: float = DT_FINE
    value_range: tuple[float, float] = (-0.5, 0.5)
    truncation: dict = field(default_factory=lambda: {"mode": "auto", "target_fraction": 0.1})
    estimators: tuple[str, ...] = ESTIMATORS
    tuning: dict = field(default_factory=lambda: {"mode": "cv"})
    seeds: tuple[int, ...] = (0,)
    solver: SolverConfig = field(default_factory=SolverConfig)
    zero_tol: float = 1e-6
    name: str = ""

    @classmethod
    def from_dict(cls, cfg: dict) -> "Scenario":
        _check_keys(cfg, _TOP_KEYS, "")
        for key in ("d", "s", "big_t"):
            if key not in cfg:
                raise ConfigError("required key missing", key)
        d = _num(cfg["d"], "d", positive=True, integer=True)
        s = _num(cfg["s"], "s", positive=True, integer=True)
        if not d <= s <= d * d:
            raise ConfigError(f"s = {s} must lie in [d, d^2] = [{d}, {d * d}]", "s")
        big_t = _num(cfg["big_t"], "big_t", positive=True)
        dt_fine = _num(cfg.get("dt_fine", DT_FINE), "dt_fine", positive=True)
        steps = int(round(big_t / dt_fine))
        if abs(steps * dt_fine - big_t) > 1e-9 * big_t:
            raise ConfigError(f"big_t = {big_t} is not a multiple of dt_fine = {dt_fine}", "big_t")

        n_obs, delta_n = cfg.get("n_obs"), cfg.get("delta_n")
        if n_obs is not None and delta_n is not None:
            raise ConfigError("give at most one of n_obs and delta_n", "n_obs")
        if delta_n is not None:
            n = int(round(big_t / _num(delta_n, "delta_n", positive=True)))
        elif n_obs is not None:
            n = _num(n_obs, "n_obs", positive=True, integer=True)
        else:
            n = steps
        if not 1 <= n <= steps:
            raise ConfigError(f"number of observation windows {n} must lie in [1, {steps}]", "n_obs")

        vr = cfg.get("value_range", [-0.5, 0.5])
        if not isinstance(vr, (list, tuple)) or len(vr) != 2:
            raise ConfigError("expected [lo, hi]", "value_range")
        lo, hi = _num(vr[0], "value_range"), _num(vr[1], "value_range")
        if not lo < hi:
            raise ConfigError("need lo < hi", "value_range")

        model = _parse_model(cfg.get("model", {}), d)
        truncation = _parse_truncation(cfg.get("truncation", {"mode": "auto"}))
        tuning = _parse_tuning(cfg.get("tuning", {"mode": "cv"}))

        est = cfg.get("estimators", list(ESTIMATORS))
        if not isinstance(est, list) or not est or any(e not in ESTIMATORS for e in est):
            raise ConfigError(f"expected a nonempty subset of {list(ESTIMATORS)}", "estimators")
        seeds = cfg.get("seeds", [0])
        if not isinstance(seeds, list) or not seeds:
            raise ConfigError("expected a nonempty list of integer seeds", "seeds")
        seeds = tuple(_num(sd, "seeds", integer=True) for sd in seeds)

        solver_cfg = cfg.get("solver", {})
        _check_keys(solver_cfg, {"max_iters", "rel_tol"}, "solver.")
        solver = SolverConfig(
            max_iters=_num(solver_cfg.get("max_iters", 10_000), "solver.max_iters", positive=True, integer=True),
            rel_tol=_num(solver_cfg.get("rel_tol", 1e-8), "solver.rel_tol", positive=True),
        )
        if "sweep" in cfg and cfg["sweep"] is not None:
            _check_sweep(cfg["sweep"])
        return cls(
            d=d,
            s=s,
            big_t=big_t,
            model=model,
            n_obs=n,
            dt_fine=dt_fine,
            value_range=(lo, hi),
            truncation=truncation,
            estimators=tuple(dict.fromkeys(est)),
            tuning=tuning,
            seeds=seeds,
            solver=solver,
            zero_tol=_num(cfg.get("zero_tol", 1e-6), "zero_tol", positive=True),
            name=str(cfg.get("name", "")),
        )


def _parse_model(section: dict, d: int) -> LevyModel:
    _check_keys(section, {"sigma", "jumps"}, "model.")
    sigma = section.get("sigma", 1.0)
    if isinstance(sigma, (int, float)) and not isinstance(sigma, bool):
        sigma_m = float(sigma) * np.eye(d)
    else:
        try:
            sigma_m = np.asarray(sigma, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError("expected a number or a d x d matrix", "model.sigma") from exc
        if sigma_m.shape != (d, d):
            raise ConfigError(f"sigma matrix must be {d}x{d}", "model.sigma")
    jumps = section.get("jumps", {"kind": "none"})
    _check_keys(jumps, {"kind", "intensity", "scale", "alpha", "x_min"}, "model.jumps.")
    try:
        spec = JumpSpec(
            kind=jumps.get("kind", "none"),
            intensity=float(jumps.get("intensity", 0.0 if jumps.get("kind", "none") == "none" else 1.0)),
            scale=float(jumps.get("scale", 1.0)),
            alpha=float(jumps.get("alpha", 4.5)),
            x_min=float(jumps.get("x_min", 1.0)),
        )
        return LevyModel(d, sigma_m, spec)
    except OusparseError as exc:
        raise ConfigError(str(exc), "model") from exc


def _parse_truncation(section: dict) -> dict:
    mode = section.get("mode", "auto") if isinstance(section, dict) else None
    if mode == "auto":
        _check_keys(section, {"mode", "target_fraction"}, "truncation.")
        frac = _num(section.get("target_fraction", 0.1), "truncation.target_fraction", positive=True)
        if not frac < 1:
            raise ConfigError("must be < 1", "truncation.target_fraction")
        return {"mode": "auto", "target_fraction": frac}
    if mode == "fixed":
        _check_keys(section, {"mode", "b", "eta"}, "truncation.")
        b = _num(section.get("b"), "truncation.b", positive=True, allow_inf=True)
        eta = _num(section.get("eta"), "truncation.eta", positive=True, allow_inf=True)
        return {"mode": "fixed", "b": b, "eta": eta}
    if mode == "none":
        _check_keys(section, {"mode"}, "truncation.")
        return {"mode": "fixed", "b": math.inf, "eta": math.inf}
    if mode == "theoretical":
        _check_keys(section, {"mode", "tail", "b_const", "delta_exponent"}, "truncation.")
        tail = _parse_tail(section.get("tail", {}))
        b_const = _num(section.get("b_const", math.inf), "truncation.b_const", positive=True, allow_inf=True)
        delta = _num(section.get("delta_exponent", 1.0), "truncation.delta_exponent", positive=True)
        return {"mode": "theoretical", "tail": tail, "b_const": b_const, "delta_exponent": delta}
    raise ConfigError(f"unknown mode {mode!r} (auto | fixed | none | theoretical)", "truncation.mode")


def _parse_tail(section: dict):
    _check_keys(section, {"kind", "a0", "alpha", "c_alpha", "p"}, "truncation.tail.")
    kind = section.get("kind")
    try:
        if kind == "continuous":
            return Continuous()
        if kind == "bounded":
            return BoundedJumps(float(section["a0"]))
        if kind == "subweibull":
            return SubWeibull(float(section["alpha"]), float(section["c_alpha"]))
        if kind == "poly":
            return PolyMoment(float(section["p"]))
    except KeyError as exc:
        raise ConfigError("missing tail parameter", f"truncation.tail.{exc.args[0]}") from exc
    except OusparseError as exc:
        raise ConfigError(str(exc), "truncation.tail") from exc
    raise ConfigError(f"unknown tail kind {kind!r}", "truncation.tail.kind")


def _parse_tuning(section: dict) -> dict:
    mode = section.get("mode", "cv") if isinstance(section, dict) else None
    if mode == "cv":
        _check_keys(section, {"mode", "train_fraction", "grid"}, "tuning.")
        grid = section.get("grid", {})
        if isinstance(grid, list):
            values = tuple(_num(g, "tuning.grid", positive=True) for g in grid)
        else:
            _check_keys(grid, {"lo", "hi", "num"}, "tuning.grid.")
            values = default_grid(
                _num(grid.get("lo", 1e-3), "tuning.grid.lo", positive=True),
                _num(grid.get("hi", 10.0), "tuning.grid.hi", positive=True),
                _num(grid.get("num", 30), "tuning.grid.num", positive=True, integer=True),
            )
        try:
            cv = CvConfig(_num(section.get("train_fraction", 0.8), "tuning.train_fraction", positive=True), values)
        except OusparseError as exc:
            raise ConfigError(str(exc), "tuning") from exc
        return {"mode": "cv", "cv": cv}
    if mode == "fixed":
        _check_keys(section, {"mode", "lambda"}, "tuning.")
        return {"mode": "fixed", "lambda": _num(section.get("lambda"), "tuning.lambda")}
    if mode == "theoretical":
        _check_keys(section, {"mode", "c_star"}, "tuning.")
        return {"mode": "theoretical", "c_star": _num(section.get("c_star", 1.0), "tuning.c_star", positive=True)}
    raise ConfigError(f"unknown mode {mode!r} (cv | fixed | theoretical)", "tuning.mode")


def _check_sweep(sweep) -> None:
    _check_keys(sweep, {"param", "values"}, "sweep.")
    if not isinstance(sweep.get("param"), str) or not sweep["param"]:
        raise ConfigError("expected a dotted parameter path", "sweep.param")
    if sweep["param"].split(".")[0] in ("sweep", "seeds"):
        raise ConfigError("cannot sweep over this key", "sweep.param")
    if not isinstance(sweep.get("values"), list) or not sweep["values"]:
        raise ConfigError("expected a nonempty list", "sweep.values")


def _set_path(cfg: dict, path: str, value) -> None:
    keys = path.split(".")
    node = cfg
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError("sweep path crosses a non-object", f"sweep.param={path}")
    node[keys[-1]] = value


def expand_sweep(config: dict) -> list[tuple[object, dict]]:
    """``[(sweep_value, concrete config)]``; a single ``(None, config)`` without a sweep."""
    sweep = config.get("sweep")
    base = {k: v for k, v in config.items() if k != "sweep"}
    if not sweep:
        return [(None, base)]
    _check_sweep(sweep)
    out = []
    for value in sweep["values"]:
        cfg = copy.deepcopy(base)
        _set_path(cfg, sweep["param"], value)
        out.append((value, cfg))
    return out


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    try:
        validate_config(config)
    except ConfigError as exc:
        if exc.field and exc.line is None:
            leaf = exc.field.split(".")[-1].split("=")[0]
            for lineno, line in enumerate(text.splitlines(), 1):
                if f'"{leaf}"' in line:
                    raise ConfigError(str(exc).split("] ", 1)[-1], exc.field, lineno) from exc
        raise
    return config


def validate_config(config: dict) -> list[Scenario]:
    if not isinstance(config, dict):
        raise ConfigError("top level must be a JSON object")
    return [Scenario.from_dict(cfg) for _, cfg in expand_sweep(config)]


# --- one cell -------------------------------------------------------------------------


@dataclass
class CellOutput:
    records: list[dict]
    estimates: dict[str, DriftEstimate]
    a0: np.ndarray | None
    wall_time: float


def _truncation_for(scn: Scenario, obs, a0: np.ndarray) -> TruncationConfig:
    mode = scn.truncation["mode"]
    if mode == "auto":
        return pick_truncation(obs, scn.truncation["target_fraction"])
    if mode == "fixed":
        return TruncationConfig(scn.truncation["b"], scn.truncation["eta"])
    inputs = TheoryInputs(scn.truncation["tail"], scn.truncation["delta_exponent"])
    noise = cov_brownian(scn.model) + nu2_matrix(scn.model)
    eta = theoretical_eta(
        inputs, obs.big_t, obs.delta_n, scn.d, spectral_norm(a0), float(np.linalg.eigvalsh(noise)[-1])
    )
    return TruncationConfig(scn.truncation["b_const"] * math.sqrt(scn.d), eta)


def _lambda_for(scn: Scenario, family: str, obs, trunc, a0, rng: RngState) -> float:
    mode = scn.tuning["mode"]
    if mode == "fixed":
        return scn.tuning["lambda"]
    if mode == "cv":
        return cross_validate(obs, trunc, family, scn.tuning["cv"], scn.solver).best_lambda
    gamma = gamma_factor(obs.delta_n, a0, scn.model, trunc.b_radius, rng)
    return theoretical_lambda(family, obs.big_t, scn.d, scn.s, gamma, scn.tuning["c_star"])


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def run_cell(scn: Scenario, seed: int, *, chash: str = "", sweep_param: str = "", sweep_value=None) -> CellOutput:
    """Simulate, estimate and score one replicate."""
    t0 = time.perf_counter()
    base = {
        "scenario_hash": chash,
        "sweep_param": sweep_param,
        "sweep_value": "" if sweep_value is None else json.dumps(sweep_value),
        "seed": seed,
    }
    records: list[dict] = []
    estimates: dict[str, DriftEstimate] = {}
    a0 = None

    def failed(est_name: str, exc: Exception, extra: dict | None = None) -> dict:
        row = dict(base, estimator=est_name, status=f"error: {type(exc).__name__}: {exc}".replace("\n", " "))
        row.update(extra or {})
        return row

    try:
        drift_rng, sim_rng, mc_rng = RngState.from_seed(seed).spawn(3)
        drift = generate_sparse_stable_drift(scn.d, scn.s, scn.value_range, drift_rng)
        a0 = np.array(drift.a0)
        x0 = stationary_start(drift, scn.model, sim_rng, scn.dt_fine)
        traj = simulate_euler(drift, scn.model, x0, scn.big_t, sim_rng, scn.dt_fine)
        obs = subsample(traj, scn.n_obs)
        trunc = _truncation_for(scn, obs, a0)
        moments = empirical_moments(obs, trunc)
    except OusparseError as exc:
        log.warning("seed %s: cell failed: %s", seed, exc)
        records = [failed(e, exc) for e in scn.estimators]
        return CellOutput(records, estimates, a0, time.perf_counter() - t0)

    shared = {"b_radius": trunc.b_radius, "eta": trunc.eta}
    for name in scn.estimators:
        lam = None
        try:
            if name in ("lasso", "slope"):
                lam = _lambda_for(scn, name, obs, trunc, a0, mc_rng)
                fit = fit_lasso if name == "lasso" else fit_slope
                est = fit(moments, lam, scn.solver)
            elif name == "truncated_mle":
                est = fit_mle(moments)
            else:
                est = true_mle(obs)
        except OusparseError as exc:
            records.append(failed(name, exc, dict(shared, **{"lambda": lam})))
            continue
        estimates[name] = est
        l1, l2 = l1_l2_errors(est.a_hat, a0)
        rep = support_report(est.a_hat, a0, scn.zero_tol)
        records.append(
            dict(
                base,
                estimator=name,
                status="ok",
                **{"lambda": lam},
                b_radius=trunc.b_radius,
                eta=trunc.eta,
                kept_fraction=est.kept_fraction,
                l1=l1,
                l2=l2,
                correct=rep.correct,
                missed=rep.missed,
                spurious=rep.spurious,
                iters=est.iters_used,
                converged=est.converged,
            )
        )
    return CellOutput(records, estimates, a0, time.perf_counter() - t0)


def _cell_job(args):
    cfg, seed, chash, sweep_param, sweep_value = args
    scn = Scenario.from_dict(cfg)
    out = run_cell(scn, seed, chash=chash, sweep_param=sweep_param, sweep_value=sweep_value)
    return out.records, out.wall_time


# --- whole scenario -------------------------------------------------------------------


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in header])
    return buf.getvalue()


def summarize(records: list[dict], sweep_order: list) -> list[dict]:
    """Mean and sample std of the metrics per (sweep value, estimator), successful rows only."""
    out = []
    est_order = list(dict.fromkeys(r["estimator"] for r in records))
    for sv in sweep_order:
        key = "" if sv is None else json.dumps(sv)
        for est in est_order:
            rows = [r for r in records if r["sweep_value"] == key and r["estimator"] == est and r["status"] == "ok"]
            summary = {"sweep_param": records[0]["sweep_param"] if records else "", "sweep_value": key,
                       "estimator": est, "n_ok": len(rows)}
            for metric in ("l1", "l2", "kept_fraction"):
                vals = np.array([float(r[metric]) for r in rows])
                summary[f"{metric}_mean"] = float(vals.mean()) if vals.size else math.nan
                summary[f"{metric}_std"] = float(vals.std(ddof=1)) if vals.size > 1 else (0.0 if vals.size else math.nan)
            out.append(summary)
    return out


@dataclass
class RunResult:
    out_dir: Path
    records: list[dict]
    summary: list[dict]
    scenario_hash: str


def run_scenario(config_or_path, out_dir, workers: int = 1, seed_offset: int = 0, plots: bool = True) -> RunResult:
    """Run every (sweep value, seed) cell and write runs.csv, summary.csv, timings.csv,
    manifest.json and plots/*.svg into ``out_dir``."""
    config = load_config(config_or_path) if not isinstance(config_or_path, dict) else config_or_path
    validate_config(config)
    chash = scenario_hash(config)
    sweep = config.get("sweep") or {}
    sweep_param = sweep.get("param", "")
    jobs = []
    sweep_order = []
    for sv, cfg in expand_sweep(config):
        sweep_order.append(sv)
        for seed in cfg.get("seeds", [0]):
            jobs.append((cfg, int(seed) + seed_offset, chash, sweep_param, sv))

    if workers <= 1:
        results = [_cell_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, jobs))

    records = [r for recs, _ in results for r in recs]
    summary = summarize(records, sweep_order)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs_text = _csv_text(RUNS_HEADER, records)
    summary_text = _csv_text(SUMMARY_HEADER, summary)
    (out / "runs.csv").write_text(runs_text, newline="")
    (out / "summary.csv").write_text(summary_text, newline="")
    timing_rows = [
        {"sweep_value": "" if j[4] is None else json.dumps(j[4]), "seed": j[1], "wall_time": wt}
        for j, (_, wt) in zip(jobs, results)
    ]
    (out / "timings.csv").write_text(_csv_text(("sweep_value", "seed", "wall_time"), timing_rows), newline="")
    manifest = {
        "version": __version__,
        "scenario_hash": chash,
        "seed_offset": seed_offset,
        "config": config,
        "files": {
            "runs.csv": hashlib.sha256(runs_text.encode()).hexdigest(),
            "summary.csv": hashlib.sha256(summary_text.encode()).hexdigest(),
        },
    }
    if plots:
        from .plots import write_plots

        manifest["plots"] = write_plots(summary, out / "plots", sweep_param or "scenario")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return RunResult(out, records, summary, chash)


def read_runs(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def replay(run_dir, seed: int, estimator: str, sweep_value=None, tol: float = 1e-12) -> tuple[DriftEstimate, dict]:
    """Re-execute one recorded cell and check it reproduces the recorded errors."""
    run_dir = Path(run_dir)
    try:
        manifest = json.loads((run_dir / "manifest.json").read_text())
        runs = read_runs(run_dir / "runs.csv")
    except FileNotFoundError as exc:
        raise ReplayError(f"run directory incomplete: {exc}") from exc
    config = manifest["config"]
    chash = scenario_hash(config)
    if chash != manifest.get("scenario_hash"):
        raise ReplayError("scenario hash mismatch: manifest config does not match its recorded hash")
    if any(r["scenario_hash"] != chash for r in runs):
        raise ReplayError("scenario hash mismatch between runs.csv and manifest.json")

    key = "" if sweep_value is None else json.dumps(sweep_value)
    rows = [r for r in runs if int(r["seed"]) == int(seed) and r["estimator"] == estimator]
    if key or len({r["sweep_value"] for r in rows}) > 1:
        rows = [r for r in rows if r["sweep_value"] == key]
    if not rows:
        raise ReplayError(f"no record for seed={seed}, estimator={estimator!r}, sweep_value={sweep_value!r}")
    if len(rows) > 1:
        raise ReplayError("several records match; pass the sweep value")
    row = rows[0]
    if row["status"] != "ok":
        raise ReplayError(f"recorded cell did not succeed: {row['status']}")

    sv = json.loads(row["sweep_value"]) if row["sweep_value"] else None
    cfg = dict(expand_sweep(config))[sv] if sv is not None else expand_sweep(config)[0][1]
    scn = Scenario.from_dict(cfg)
    out = run_cell(scn, int(seed), chash=chash, sweep_param=row["sweep_param"], sweep_value=sv)
    if estimator not in out.estimates:
        raise ReplayError(f"estimator {estimator!r} failed on replay")
    est = out.estimates[estimator]
    l1, l2 = l1_l2_errors(est.a_hat, out.a0)
    for name, new in (("l1", l1), ("l2", l2)):
        old = float(row[name])
        if abs(new - old) > tol * max(1.0, abs(old)):
            raise ReplayError(f"replay mismatch in {name}: recorded {old!r}, replayed {new!r}")
    return est, row
