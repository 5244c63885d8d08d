"""Command-line driver: train, sweep, eval, select-interval, split."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .data import (CsvSchema, DataError, Dataset, SplitSpec, Xoshiro256, load_csv, load_libsvm,
                   split, split_indices)
from .metrics import MetricError, accuracy, fairness_report, select_interval
from .problems import DCProblem, Interval, regularized_objective, build_problem
from .scoring import DecisionVector, FeasibleDomain, LayoutError, load_model, save_model
from .solvers import IDCASchedule, SolverError, idca, ssg_direct, subgradient_descent

log = logging.getLogger("dcfair")

FAMILIES = ("pdp", "wpdp", "group-auc", "inter-group", "intra-group", "regularized-pdp",
            "regularized-wpdp", "unconstrained")
SOLVERS = ("idca", "ssg-direct", "subgradient")
METRICS = ("dp", "wdp", "pdp", "wpdp")

# tuning grids for (T, eps) and then K
TUNE_T = (150, 200)
TUNE_EPS = (5e-4, 1e-3, 2e-3, 5e-3)
TUNE_K = (100, 150, 200, 250, 300, 350, 400)
TUNE_PROBE_K = 50

DEFAULTS = {
    "data": None, "test_data": None,
    "label_col": "label", "group_col": "group", "feature_cols": None,
    "group_file": None, "test_group_file": None, "group_column": None, "n_features": None,
    "implicit_zero_group": False,
    "fractions": "0.6,0.2,0.2",
    "family": "pdp", "objective": "erm", "loss": "logistic", "surrogate": "hinge",
    "interval": None, "theta_hat": 0.0,
    "kappa": None, "kappa_list": None, "lambda": None, "lambda_list": None,
    "solver": "idca", "rho": 1e-3, "outer": 100, "inner": 200, "eps": 1e-3,
    "step": 0.1, "policy": "static",
    "seed": 0, "seeds": None, "jobs": 1, "out": None, "tune": False, "timing": True,
    "width": 0.25, "grid_step": 0.05,
    "model": None, "split": "test",
}

_BOOL = {"tune", "timing", "implicit_zero_group"}
_INT = {"outer", "inner", "seed", "jobs", "group_column", "n_features"}
_FLOAT = {"theta_hat", "kappa", "lambda", "rho", "eps", "step", "width", "grid_step"}


class ConfigError(ValueError):
    """Bad or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in _BOOL:
            if isinstance(value, bool):
                return value
            s = str(value).strip().lower()
            if s in ("1", "true", "yes", "on"):
                return True
            if s in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if key in _INT:
            return int(value)
        if key in _FLOAT:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None
    return value


def read_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment; dashes in keys become underscores."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key=value")
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        out[key] = value
    return out


def _floats(text) -> list[float]:
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def _ints(text) -> list[int]:
    return [int(x) for x in _floats(text)]


def resolve_config(file_values: dict, overrides: dict) -> dict:
    """Defaults, then the config file, then command-line flags (later wins)."""
    cfg = dict(DEFAULTS)
    for src in (file_values, overrides):
        for k, v in src.items():
            if v is not None:
                cfg[k] = _coerce(k, v)
    if cfg["family"] not in FAMILIES:
        raise ConfigError(f"unknown family {cfg['family']!r}; expected one of {FAMILIES}")
    if cfg["solver"] not in SOLVERS:
        raise ConfigError(f"unknown solver {cfg['solver']!r}; expected one of {SOLVERS}")
    regularized = cfg["family"].startswith("regularized-")
    if regularized and (cfg["kappa"] is not None or cfg["kappa_list"]):
        raise ConfigError("regularized families take lambda, not kappa")
    if not regularized and (cfg["lambda"] is not None or cfg["lambda_list"]):
        raise ConfigError("lambda values need a regularized family")
    if regularized and cfg["solver"] != "subgradient":
        raise ConfigError("regularized families are solved with --solver subgradient")
    if cfg["solver"] == "subgradient" and cfg["family"] not in ("unconstrained", "regularized-pdp",
                                                                 "regularized-wpdp"):
        raise ConfigError("the subgradient solver handles only unconstrained or regularized families")
    if cfg["tune"] and cfg["solver"] != "idca":
        raise ConfigError("--tune applies to the idca solver")
    if cfg["interval"] is not None and str(cfg["interval"]) != "auto":
        try:
            Interval.parse(cfg["interval"])
        except ValueError as exc:
            raise ConfigError(f"interval: {exc}") from None
    fr = _floats(cfg["fractions"])
    if len(fr) != 3:
        raise ConfigError("fractions needs three values train,val,test")
    return cfg


def _seeds(cfg) -> list[int]:
    return _ints(cfg["seeds"]) if cfg["seeds"] else [int(cfg["seed"])]


def _param_values(cfg) -> tuple[str, list]:
    """('kappa'|'lambda'|'none', values) for a sweep or a single run."""
    if cfg["family"].startswith("regularized-"):
        vals = _floats(cfg["lambda_list"]) or ([cfg["lambda"]] if cfg["lambda"] is not None else [])
        if not vals:
            raise ConfigError("regularized families need --lambda or --lambda-list")
        return "lambda", vals
    if cfg["family"] == "unconstrained":
        return "none", [None]
    vals = _floats(cfg["kappa_list"]) or ([cfg["kappa"]] if cfg["kappa"] is not None else [])
    if not vals:
        raise ConfigError(f"family {cfg['family']} needs --kappa or --kappa-list")
    return "kappa", vals


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------

_DATA_CACHE: dict = {}


def _load_one(cfg, path, group_file, n_features):
    if str(path).lower().endswith(".csv"):
        cols = cfg["feature_cols"]
        if isinstance(cols, str):
            cols = [c.strip() for c in cols.split(",") if c.strip()]
        return load_csv(path, CsvSchema(cfg["label_col"], cfg["group_col"], cols))
    if group_file:
        source = group_file
    elif cfg["group_column"] is not None:
        source = int(cfg["group_column"])
    else:
        raise ConfigError("libsvm data needs --group-file or --group-column")
    return load_libsvm(path, source, n_features=n_features,
                       implicit_zero_group=bool(cfg["implicit_zero_group"]))


def load_data(cfg) -> tuple[Dataset, Dataset | None]:
    key = tuple(str(cfg[k]) for k in ("data", "test_data", "label_col", "group_col", "feature_cols",
                                      "group_file", "test_group_file", "group_column", "n_features",
                                      "implicit_zero_group"))
    if key in _DATA_CACHE:
        return _DATA_CACHE[key]
    if not cfg["data"]:
        raise ConfigError("--data is required")
    data = _load_one(cfg, cfg["data"], cfg["group_file"], cfg["n_features"])
    test = None
    if cfg["test_data"]:
        test = _load_one(cfg, cfg["test_data"], cfg["test_group_file"], cfg["n_features"] or data.d)
        if test.d != data.d:
            raise LayoutError(f"test data has d={test.d}, training data has d={data.d}")
    _DATA_CACHE[key] = (data, test)
    return data, test


def make_splits(cfg, seed: int) -> tuple[Dataset, Dataset, Dataset]:
    """(train, validation, test). With a separate test file, the main file is
    shuffled and cut into train/validation in proportion train:val."""
    data, test = load_data(cfg)
    tr, va, te = _floats(cfg["fractions"])
    if test is None:
        return split(data, SplitSpec(tr, va, te, seed))
    SplitSpec(tr, va, te, seed)  # validates the fractions and seed
    perm = Xoshiro256(seed).permutation(data.n)
    cut = math.floor(tr / (tr + va) * data.n + 1e-9)
    parts = (np.sort(perm[:cut]), np.sort(perm[cut:]))
    for name, idx in zip(("train", "validation"), parts):
        if len(np.unique(data.groups[idx])) < data.n_groups:
            raise DataError(f"{name} split has no members of some group; choose another seed")
    return data.subset(parts[0]), data.subset(parts[1]), test


# ---------------------------------------------------------------------------
# one training run
# ---------------------------------------------------------------------------

def _interval(cfg, train: Dataset, seed: int) -> Interval:
    iv = cfg["interval"]
    if iv is None:
        if cfg["family"] in ("pdp", "wpdp", "regularized-pdp", "regularized-wpdp"):
            raise ConfigError(f"family {cfg['family']} needs --interval A,B or --interval auto")
        return Interval(0.0, 1.0)
    if str(iv) == "auto":
        w = _anchor_weights(cfg, train, seed)
        return select_interval(train, w, cfg["theta_hat"], cfg["width"], cfg["grid_step"]).interval
    return Interval.parse(iv)


def _build(cfg, train: Dataset, interval: Interval, value) -> DCProblem:
    fam = cfg["family"]
    if fam.startswith("regularized-"):
        obj, layout = regularized_objective(train, fam.split("-", 1)[1], value, interval,
                                            theta_hat=cfg["theta_hat"], surrogate=cfg["surrogate"],
                                            loss=cfg["loss"], rho=cfg["rho"])
        start = DecisionVector(np.zeros(layout.size), layout)
        meta = {"family": fam, "lambda": value, "interval": [interval.alpha, interval.beta]}
        return DCProblem(obj, [], FeasibleDomain(), layout, start, meta)
    kappa = 0.0 if value is None else value
    return build_problem(train, fam, objective=cfg["objective"], loss=cfg["loss"], interval=interval,
                         kappa=kappa, theta_hat=cfg["theta_hat"], surrogate=cfg["surrogate"],
                         rho=cfg["rho"])


def _solve(cfg, problem: DCProblem, K: int, T: int, eps: float):
    """(packed solution, trace, solver summary)."""
    solver = cfg["solver"]
    if solver == "idca":
        w, tr = idca(problem, IDCASchedule(K=K, epsilon=eps, T=T), report_tol=eps)
        v = tr.iterates[tr.best_index]
    elif solver == "ssg-direct":
        v, tr = ssg_direct(problem, cfg["policy"], T=T, epsilon=eps)
    else:
        v, tr = subgradient_descent(problem.objective, problem.start.packed, cfg["step"], T)
    return np.asarray(v), tr


def _trace_prefix_best(tr, K: int, report_tol: float) -> int:
    """best_index of the same run stopped after K outer iterations."""
    last = min(K, len(tr.iterates) - 1)
    ok = [i for i in range(last + 1) if tr.max_infeasibility[i] <= report_tol]
    if ok:
        return min(ok, key=lambda i: (tr.objective_values[i], i))
    return -1


def _tune(cfg, problem: DCProblem, val: Dataset) -> tuple[int, int, float, dict]:
    """Validation-accuracy selection of (T, eps) after a short probe, then K.

    Infeasible candidates are skipped; ties go to smaller eps, then smaller T,
    then smaller K.
    """
    th = cfg["theta_hat"]
    table = []
    for eps in TUNE_EPS:
        for T in TUNE_T:
            _, tr = idca(problem, IDCASchedule(K=TUNE_PROBE_K, epsilon=eps, T=T), report_tol=eps)
            acc = accuracy(tr.iterates[tr.best_index], val, th) if tr.feasible else None
            table.append({"T": T, "eps": eps, "val_accuracy": acc})
    ok = [r for r in table if r["val_accuracy"] is not None]
    if not ok:
        raise SolverError("tuning: every (T, eps) candidate ended infeasible")
    best = max(ok, key=lambda r: (r["val_accuracy"], -r["eps"], -r["T"]))
    # one long run covers every K in the grid: stopping early changes nothing before K
    _, tr = idca(problem, IDCASchedule(K=max(TUNE_K), epsilon=best["eps"], T=best["T"]),
                 report_tol=best["eps"])
    k_rows = []
    for K in TUNE_K:
        i = _trace_prefix_best(tr, K, best["eps"])
        k_rows.append({"K": K, "val_accuracy": accuracy(tr.iterates[i], val, th) if i >= 0 else None})
    okK = [r for r in k_rows if r["val_accuracy"] is not None]
    if not okK:
        raise SolverError("tuning: no feasible iterate for any K")
    bestK = max(okK, key=lambda r: (r["val_accuracy"], -r["K"]))
    info = {"T_eps_candidates": table, "K_candidates": k_rows,
            "chosen": {"T": best["T"], "eps": best["eps"], "K": bestK["K"]},
            "rule": "max validation accuracy; skip infeasible; ties to smaller eps, T, K"}
    return bestK["K"], best["T"], best["eps"], info


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def run_single(cfg, seed: int, value, family: str | None = None) -> dict:
    """Split, build, solve and evaluate once. Returns report, model and trace."""
    if family is not None:
        cfg = dict(cfg, family=family)
    train, val, test = make_splits(cfg, seed)
    interval = _interval(cfg, train, seed)
    problem = _build(cfg, train, interval, value)
    K, T, eps = int(cfg["outer"]), int(cfg["inner"]), float(cfg["eps"])
    tune_info = None
    if cfg["tune"]:
        K, T, eps, tune_info = _tune(cfg, problem, val)
    t0 = time.perf_counter()
    v, tr = _solve(cfg, problem, K, T, eps)
    seconds = time.perf_counter() - t0
    idx = tr.best_index
    th = cfg["theta_hat"]
    solver_info = {
        "name": cfg["solver"], "outer": K, "inner": T, "eps": eps, "report_tol": eps,
        "feasible": bool(tr.feasible), "best_index": int(idx),
        "outer_iterations": len(tr.iterates) - 1, "early_stop": tr.early_stop,
        "objective_at_end": _finite(problem.objective.value(v)),
        "max_constraint": _finite(problem.max_violation(v)),
        "oracle_count": int(tr.oracle_count), "value_evals": int(tr.value_evals),
        "seconds": seconds if cfg["timing"] else 0.0,
    }
    report = {
        "kind": "train", "version": __version__,
        "config": _public_config(cfg, seed, value),
        "problem": {"family": problem.meta.get("family", cfg["family"]),
                    "n_constraints": len(problem.constraints),
                    "layout": {"model_len": problem.layout.model_len,
                               "theta_len": problem.layout.theta_len},
                    "interval": [interval.alpha, interval.beta]},
        "solver": solver_info,
        "tune": tune_info,
        "sizes": {"train": train.n, "validation": val.n, "test": test.n},
        "validation_accuracy": accuracy(v, val, th),
        "train": fairness_report(v, train, interval, th).to_json(),
        "test": fairness_report(v, test, interval, th).to_json(),
    }
    return {"report": report, "model": DecisionVector(v, problem.layout), "trace": tr}


def _public_config(cfg, seed, value) -> dict:
    out = {k: cfg[k] for k in sorted(cfg)}
    out["seed"] = seed
    if value is not None:
        out["kappa" if not cfg["family"].startswith("regularized-") else "lambda"] = value
    return out


def _anchor_weights(cfg, train: Dataset, seed: int) -> np.ndarray:
    """Unconstrained ERM solve with the run's solver settings."""
    acfg = dict(cfg, family="unconstrained", solver="idca")
    problem = _build(acfg, train, Interval(0.0, 1.0), None)
    v, _ = _solve(acfg, problem, int(cfg["outer"]), int(cfg["inner"]), float(cfg["eps"]))
    return v


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _out_dir(cfg) -> Path | None:
    if not cfg["out"]:
        return None
    p = Path(cfg["out"])
    p.mkdir(parents=True, exist_ok=True)
    return p


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.10g}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_train(cfg) -> int:
    kind, values = _param_values(cfg)
    if len(values) != 1 or len(_seeds(cfg)) != 1:
        raise ConfigError("train takes a single kappa/lambda and a single seed; use sweep for lists")
    res = run_single(cfg, _seeds(cfg)[0], values[0])
    out = _out_dir(cfg)
    text = _dump(res["report"])
    if out is None:
        sys.stdout.write(text)
        return 0
    (out / "report.json").write_text(text)
    save_model(out / "model.json", res["model"])
    res["trace"].to_csv(out / "trace.csv", timing=bool(cfg["timing"]))
    log.info("wrote %s", out)
    return 0


def _row_task(args):
    cfg, seed, value, family = args
    _setup_logging()
    try:
        res = run_single(cfg, seed, value, family)
    except (SolverError, DataError, LayoutError, MetricError, ValueError) as exc:
        return {"status": f"error: {type(exc).__name__}: {exc}"}
    rep = res["report"]
    row = {"status": "ok" if rep["solver"]["feasible"] else "infeasible",
           "accuracy": rep["test"]["accuracy"]}
    row.update({m: rep["test"]["max"][m] for m in METRICS})
    for key in ("objective_at_end", "max_constraint", "oracle_count", "seconds"):
        row[key] = rep["solver"][key]
    row["interval"] = rep["problem"]["interval"]
    return row


def _ci(xs) -> float:
    if len(xs) < 2:
        return 0.0
    return 1.96 * float(np.std(xs, ddof=1)) / math.sqrt(len(xs))


def _aggregate(rows) -> dict:
    good = [r for r in rows if not r["status"].startswith("error")]
    agg = {"n": len(good)}
    for key in ("accuracy",) + METRICS:
        xs = [r[key] for r in good]
        agg[key] = float(np.mean(xs)) if xs else None
        agg[key + "_ci"] = _ci(xs) if xs else None
    return agg


FRONTIER_COLUMNS = ["row_type", "param", "value", "seed", "status", "accuracy", "accuracy_ci",
                    "dp", "dp_ci", "wdp", "wdp_ci", "pdp", "pdp_ci", "wpdp", "wpdp_ci",
                    "fairness_pdp", "fairness_wpdp", "objective_at_end", "max_infeas_at_end",
                    "oracle_count", "seconds"]


def cmd_sweep(cfg) -> int:
    kind, values = _param_values(cfg)
    seeds = _seeds(cfg)
    tasks = [(cfg, s, None, "unconstrained") for s in seeds]
    tasks += [(cfg, s, val, None) for val in values for s in seeds]
    if kind == "none":
        tasks = tasks[:len(seeds)]
    jobs = max(1, int(cfg["jobs"]))
    if jobs == 1:
        results = [_row_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_row_task, tasks))
    anchors = results[:len(seeds)]
    runs = results[len(seeds):]

    table = []
    anc = _aggregate(anchors)
    table.append(_csv_row("unconstrained", "none", None, None, f"n={anc['n']}", anc, None))
    for i, val in enumerate(values if kind != "none" else []):
        block = runs[i * len(seeds):(i + 1) * len(seeds)]
        for s, r in zip(seeds, block):
            table.append(_csv_row("run", kind, val, s, r["status"], r, r))
        agg = _aggregate(block)
        table.append(_csv_row("aggregate", kind, val, None, f"n={agg['n']}", agg, None))

    out = _out_dir(cfg)
    summary = {"kind": "sweep", "version": __version__, "config": _public_config(cfg, seeds[0], None),
               "seeds": seeds, "param": kind, "values": values if kind != "none" else [],
               "anchor_runs": [dict(r, seed=s) for s, r in zip(seeds, anchors)],
               "rows": table}
    if not cfg["timing"]:
        for r in summary["anchor_runs"]:
            r["seconds"] = 0.0
    if out is None:
        _write_frontier(sys.stdout, table)
    else:
        with open(out / "frontier.csv", "w", newline="") as fh:
            _write_frontier(fh, table)
        (out / "sweep.json").write_text(_dump(_jsonable(summary)))
    return 0


def _csv_row(row_type, param, value, seed, status, stats, single) -> dict:
    row = {"row_type": row_type, "param": param, "value": value, "seed": seed, "status": status}
    for key in ("accuracy",) + METRICS:
        row[key] = stats.get(key)
        row[key + "_ci"] = stats.get(key + "_ci")
    for m in ("pdp", "wpdp"):
        row["fairness_" + m] = None if row[m] is None else 1.0 - row[m]
    if single is not None:
        row["objective_at_end"] = single.get("objective_at_end")
        row["max_infeas_at_end"] = single.get("max_constraint")
        row["oracle_count"] = single.get("oracle_count")
        row["seconds"] = single.get("seconds")
    return row


def _write_frontier(fh, table) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(FRONTIER_COLUMNS)
    for r in table:
        w.writerow([_fmt(r.get(c)) for c in FRONTIER_COLUMNS])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def cmd_eval(cfg) -> int:
    if not cfg["model"]:
        raise ConfigError("eval needs --model PATH")
    model = load_model(cfg["model"])
    data, test = load_data(cfg)
    part = cfg["split"]
    if part == "all":
        target = data
    elif part in ("train", "validation", "test"):
        target = dict(zip(("train", "validation", "test"), make_splits(cfg, _seeds(cfg)[0])))[part]
    else:
        raise ConfigError(f"unknown split {part!r}; expected all, train, validation or test")
    if model.layout.d != target.d:
        raise LayoutError(f"model expects d={model.layout.d}, data has d={target.d}")
    interval = Interval.parse(cfg["interval"]) if cfg["interval"] else Interval(0.0, 1.0)
    rep = fairness_report(model.packed, target, interval, cfg["theta_hat"]).to_json()
    out = {"kind": "eval", "version": __version__, "model": str(cfg["model"]), "split": part,
           "metrics": rep}
    text = _dump(out)
    d = _out_dir(cfg)
    if d is None:
        sys.stdout.write(text)
    else:
        (d / "report.json").write_text(text)
    return 0


def cmd_select_interval(cfg) -> int:
    seed = _seeds(cfg)[0]
    train, _, _ = make_splits(cfg, seed)
    w = _anchor_weights(cfg, train, seed)
    choice = select_interval(train, w, cfg["theta_hat"], cfg["width"], cfg["grid_step"])
    out = {"interval": [choice.interval.alpha, choice.interval.beta],
           "pooled_positive_rate": choice.pooled_rate,
           "candidates": [{"alpha": a, "beta": b, "max_pdp": v} for a, b, v in choice.candidates]}
    text = _dump(out)
    d = _out_dir(cfg)
    if d is not None:
        (d / "interval.json").write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_split(cfg) -> int:
    data, _ = load_data(cfg)
    seed = _seeds(cfg)[0]
    tr, va, te = _floats(cfg["fractions"])
    spec = SplitSpec(tr, va, te, seed)
    split(data, spec)  # raises if some part lacks a group
    parts = split_indices(data.n, spec)
    d = _out_dir(cfg)
    summary = {"seed": seed, "n": data.n, "sizes": {}}
    for name, idx in zip(("train", "validation", "test"), parts):
        summary["sizes"][name] = int(idx.size)
        if d is not None:
            (d / f"{name}_indices.txt").write_text("".join(f"{i}\n" for i in idx))
    text = _dump(summary)
    if d is not None:
        (d / "split.json").write_text(text)
    sys.stdout.write(text)
    return 0


COMMANDS = {"train": cmd_train, "sweep": cmd_sweep, "eval": cmd_eval,
            "select-interval": cmd_select_interval, "split": cmd_split}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dcfair", description=__doc__)
    p.add_argument("--version", action="version", version=f"dcfair {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--data")
        s.add_argument("--test-data")
        s.add_argument("--label-col")
        s.add_argument("--group-col")
        s.add_argument("--feature-cols", help="comma-separated CSV feature columns")
        s.add_argument("--group-file", help="libsvm side file with one group code per row")
        s.add_argument("--test-group-file")
        s.add_argument("--group-column", type=int, help="1-based libsvm column holding group codes")
        s.add_argument("--n-features", type=int)
        s.add_argument("--implicit-zero-group", action="store_const", const=True)
        s.add_argument("--fractions", help="train,val,test fractions")
        s.add_argument("--family")
        s.add_argument("--objective")
        s.add_argument("--loss")
        s.add_argument("--surrogate")
        s.add_argument("--interval", help="A,B or auto")
        s.add_argument("--theta-hat", type=float)
        s.add_argument("--kappa", type=float)
        s.add_argument("--kappa-list")
        s.add_argument("--lambda", dest="lambda", type=float)
        s.add_argument("--lambda-list")
        s.add_argument("--solver")
        s.add_argument("--policy", help="ssg-direct step policy: static or diminishing")
        s.add_argument("--rho", type=float)
        s.add_argument("--outer", type=int, help="outer iterations K")
        s.add_argument("--inner", type=int, help="inner iterations T (steps for subgradient)")
        s.add_argument("--eps", type=float)
        s.add_argument("--step", type=float, help="step size of the subgradient solver")
        s.add_argument("--seed", type=int)
        s.add_argument("--seeds")
        s.add_argument("--jobs", type=int)
        s.add_argument("--out")
        s.add_argument("--tune", action="store_const", const=True)
        s.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                       help="write zero for wall-clock columns so outputs are byte-identical")
        s.add_argument("--width", type=float, help="select-interval window width")
        s.add_argument("--grid-step", type=float)
        s.add_argument("--model")
        s.add_argument("--split", help="eval target: all, train, validation or test")
    return p


def _setup_logging() -> None:
    level = os.environ.get("DCFAIR_LOG", "error").lower()
    lv = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(level, logging.ERROR)
    logging.basicConfig(level=lv, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("dcfair").setLevel(lv)


def _fail(code: int, exc: BaseException) -> int:
    msg = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(msg) + "\n")
    return code


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(file_values, overrides)
        return COMMANDS[args.command](cfg)
    except (ConfigError, DataError, LayoutError) as exc:
        return _fail(2, exc)
    except (SolverError, MetricError, ValueError, RuntimeError, OSError) as exc:
        return _fail(1, exc)


if __name__ == "__main__":
    sys.exit(main())
