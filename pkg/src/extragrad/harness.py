"""Experiment harness: JSON configs in, per-iteration CSV traces and a
summary table out.

A config names one problem instance and a list of solver configurations;
each (problem, solver) cell runs independently on a bounded worker pool and
writes its own trace file, so reruns of the same config are byte-identical
except for the wall-clock columns.
"""

from __future__ import annotations

import json
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    Algorithm,
    BacktrackLimit,
    ConfigError,
    IterationRecord,
    LambdaSchedule,
    LossOverflow,
    NonfiniteOutput,
    SingularMatrix,
    SolverConfig,
    SolveResult,
    StopReason,
    VIProblem,
)
from . import problems
from .solvers import solve

TRACE_HEADER = ("iter,eta,L_t,hatL_t,eg_residual,nat_residual,tan_residual,"
                "gap,dist_to_solution,backtrack_failures,elapsed_s")

#: problem family -> (builder kwargs signature, stop metric)
PROBLEM_FAMILIES = {
    "matrix_game": ("d:int, kappa:float  (or path:str to a dense-matrix file)", "gap"),
    "lasso": ("m:int, n:int, sparsity_frac:float, sigma:float, lam:float", "nat"),
    "fairness": ("m:int, n:int, d:int  (optional fairness_sign_paper:bool)", "nat"),
    "mesp": ("d:int, s:int  (or path:str to a dense-matrix file)", "nat"),
}

_VALID_METRICS = ("eg", "nat", "tan", "gap", "dist")
_ETA0_RULE = re.compile(r"^\s*([0-9]*\.?[0-9]+)\s*/\s*L\s*$")

# rows are logged every iteration up to this index, then every 10th (the
# final row is always kept so iters_to_tol stays exact)
_THIN_AFTER = 1000


@dataclass
class ExperimentConfig:
    family: str
    params: dict
    seed: int
    solvers: list[SolverConfig]
    solver_eta0_rules: list[str | None]  # "c/L" entries resolved per problem
    metrics: list[str]
    out_dir: Path
    workers: int | None = None


def parse_config(path) -> ExperimentConfig:
    """Parse and validate a JSON experiment config.

    Raises ConfigError carrying *all* schema violations found, or the JSON
    parser's line/column on malformed input.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from exc

    errors: list[str] = []

    def fail(msg):
        errors.append(msg)

    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])

    problem = raw.get("problem")
    family, params, seed = None, {}, 0
    if not isinstance(problem, dict):
        fail("problem: required object with keys family, params, seed")
    else:
        family = problem.get("family")
        if family not in PROBLEM_FAMILIES:
            fail(f"problem.family: unknown {family!r}; valid families: "
                 + ", ".join(sorted(PROBLEM_FAMILIES)))
        params = problem.get("params", {})
        if not isinstance(params, dict):
            fail("problem.params: must be an object")
            params = {}
        seed = problem.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            fail("problem.seed: must be a nonnegative integer")
            seed = 0

    solver_list = raw.get("solvers")
    solvers: list[SolverConfig] = []
    eta0_rules: list[str | None] = []
    if not isinstance(solver_list, list) or not solver_list:
        fail("solvers: at least one solver entry is required")
    else:
        for k, entry in enumerate(solver_list):
            if not isinstance(entry, dict):
                fail(f"solvers[{k}]: must be an object")
                continue
            cfg, rule = _parse_solver(entry, k, fail)
            if cfg is not None:
                solvers.append(cfg)
                eta0_rules.append(rule)

    metrics = raw.get("metrics", [])
    if not isinstance(metrics, list) or any(m not in _VALID_METRICS for m in metrics):
        fail(f"metrics: must be a list drawn from {list(_VALID_METRICS)}")
        metrics = []
    if "gap" in metrics and family is not None and family != "matrix_game":
        fail("metrics: 'gap' needs a problem with a gap oracle (family matrix_game)")

    out_dir = raw.get("out_dir")
    if not isinstance(out_dir, str) or not out_dir:
        fail("out_dir: required output directory path")
        out_dir = "."

    workers = raw.get("workers")
    if workers is not None and (not isinstance(workers, int) or workers < 1):
        fail("workers: must be a positive integer when given")
        workers = None

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(family=family, params=params, seed=seed,
                            solvers=solvers, solver_eta0_rules=eta0_rules,
                            metrics=list(metrics), out_dir=Path(out_dir),
                            workers=workers)


def _parse_solver(entry: dict, k: int, fail):
    """One solver entry -> (SolverConfig, eta0 rule) with defaults filled in."""
    known = {"algorithm", "eta0", "theta", "rho", "lambda_schedule", "max_iter",
             "residual_tol", "stationarity_tol", "bt_increase_trick", "seed"}
    for key in entry:
        if key not in known:
            fail(f"solvers[{k}].{key}: unknown key")

    algo_name = entry.get("algorithm", "PF_NE_EG")
    try:
        algorithm = Algorithm(algo_name)
    except ValueError:
        fail(f"solvers[{k}].algorithm: unknown {algo_name!r}; valid names: "
             + ", ".join(a.value for a in Algorithm))
        return None, None

    eta0 = entry.get("eta0", 0.5)
    rule = None
    if isinstance(eta0, str):
        m = _ETA0_RULE.match(eta0)
        if m is None:
            fail(f"solvers[{k}].eta0: must be a positive number or 'c/L'")
            return None, None
        rule = eta0
        eta0 = float(m.group(1))  # placeholder until L is known
    if not isinstance(eta0, (int, float)) or not eta0 > 0:
        fail(f"solvers[{k}].eta0: must be positive")
        return None, None

    theta = entry.get("theta", 0.9)
    rho = entry.get("rho", 0.9)
    sched_name = entry.get("lambda_schedule", "LOG_DECAY")
    try:
        schedule = LambdaSchedule(sched_name)
    except ValueError:
        fail(f"solvers[{k}].lambda_schedule: unknown {sched_name!r}; valid names: "
             + ", ".join(s.value for s in LambdaSchedule))
        return None, None

    try:
        cfg = SolverConfig(
            algorithm=algorithm,
            eta0=float(eta0),
            theta=float(theta),
            rho=float(rho),
            lambda_schedule=schedule,
            max_iter=int(entry.get("max_iter", 10_000)),
            residual_tol=float(entry.get("residual_tol", 1e-6)),
            stationarity_tol=float(entry.get("stationarity_tol", 1e-14)),
            bt_increase_trick=bool(entry.get("bt_increase_trick", False)),
            seed=int(entry.get("seed", 0)),
        )
    except (ValueError, TypeError) as exc:
        fail(f"solvers[{k}]: {exc}")
        return None, None
    return cfg, rule


def build_problem(config: ExperimentConfig) -> VIProblem:
    family, p, seed = config.family, dict(config.params), config.seed
    if family == "matrix_game":
        if "path" in p:
            return problems.load_matrix_game(p["path"])
        return problems.make_matrix_game(int(p["d"]), float(p["kappa"]), seed)
    if family == "lasso":
        return problems.make_lasso(int(p["m"]), int(p["n"]), float(p["sparsity_frac"]),
                                   float(p["sigma"]), float(p["lam"]), seed)
    if family == "fairness":
        return problems.make_fairness(int(p["m"]), int(p["n"]), int(p["d"]), seed,
                                      paper_sign=bool(p.get("fairness_sign_paper", False)))
    if family == "mesp":
        if "path" in p:
            return problems.load_mesp(p["path"])
        return problems.make_mesp(int(p["d"]), int(p["s"]), seed)
    raise ConfigError([f"unknown problem family {family!r}"])


def stop_metric_for(family: str) -> str:
    return PROBLEM_FAMILIES[family][1]


def solver_labels(solvers: list[SolverConfig]) -> list[str]:
    """Algorithm names, suffixed _2, _3, ... on repeats."""
    seen: dict[str, int] = {}
    labels = []
    for cfg in solvers:
        name = cfg.algorithm.value
        seen[name] = seen.get(name, 0) + 1
        labels.append(name if seen[name] == 1 else f"{name}_{seen[name]}")
    return labels


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_trace(path, trace: list[IterationRecord]) -> None:
    lines = [TRACE_HEADER]
    last = len(trace) - 1
    for i, r in enumerate(trace):
        if r.t > _THIN_AFTER and r.t % 10 != 0 and i != last:
            continue
        lines.append(",".join((
            str(r.t), _fmt(r.eta), _fmt(r.L_t), _fmt(r.hatL_t), _fmt(r.eg_residual),
            _fmt(r.nat_residual), _fmt(r.tan_residual), _fmt(r.gap),
            _fmt(r.dist_to_solution), str(r.backtrack_failures), _fmt(r.elapsed_seconds),
        )))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path) -> list[IterationRecord]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ConfigError([f"{path}: not a trace file (bad header)"])
    out = []
    for ln in lines[1:]:
        f = ln.split(",")
        opt = lambda s: None if s == "" else float(s)
        out.append(IterationRecord(
            t=int(f[0]), eta=float(f[1]), L_t=float(f[2]), hatL_t=float(f[3]),
            eg_residual=float(f[4]), nat_residual=opt(f[5]), tan_residual=opt(f[6]),
            gap=opt(f[7]), dist_to_solution=opt(f[8]), backtrack_failures=int(f[9]),
            elapsed_seconds=float(f[10])))
    return out


_FAILURE_STATUS = {
    BacktrackLimit: "BACKTRACK_LIMIT",
    LossOverflow: "OVERFLOW",
    NonfiniteOutput: "NONFINITE_OUTPUT",
    SingularMatrix: "SINGULAR_MATRIX",
}

SUMMARY_HEADER = ("problem,solver,iters_to_tol,final_eg_residual,"
                  "total_operator_evals,total_backtrack_failures,elapsed_seconds,status")


def _run_cell(problem, cfg: SolverConfig, rule: str | None, label: str,
              record, stop_metric: str, trace_path: Path) -> dict:
    if rule is not None:
        if problem.lipschitz is None or problem.lipschitz <= 0:
            return {"problem": problem.name, "solver": label, "status": "NO_LIPSCHITZ_ESTIMATE"}
        c = float(_ETA0_RULE.match(rule).group(1))
        cfg = SolverConfig(**{**cfg.__dict__, "eta0": c / problem.lipschitz})
    t0 = time.perf_counter()
    try:
        result = solve(problem, cfg, record=record, stop_metric=stop_metric)
    except tuple(_FAILURE_STATUS) as exc:
        return {"problem": problem.name, "solver": label,
                "status": _FAILURE_STATUS[type(exc)], "error": str(exc),
                "elapsed_seconds": time.perf_counter() - t0}
    elapsed = time.perf_counter() - t0
    write_trace(trace_path, result.trace)
    row = {
        "problem": problem.name,
        "solver": label,
        "iters_to_tol": (result.trace[-1].t
                         if result.stop_reason is StopReason.TOL_REACHED else None),
        "final_eg_residual": result.trace[-1].eg_residual if result.trace else None,
        "total_operator_evals": result.operator_evals,
        "total_backtrack_failures": result.total_backtrack_failures(),
        "elapsed_seconds": elapsed,
        "status": result.stop_reason.value,
        "result": result,
        "trace_path": trace_path,
    }
    return row


def run_experiment(config: ExperimentConfig) -> list[dict]:
    """Run the solver grid; one trace CSV per cell plus summary.csv.

    A cell that aborts (stepsize collapse, loss overflow, ...) is recorded
    in the summary under its error status and the rest of the grid still
    runs.  Returns the summary rows in config order.
    """
    problem = build_problem(config)
    stop_metric = stop_metric_for(config.family)
    record = tuple(m for m in config.metrics if m != "eg")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = solver_labels(config.solvers)
    workers = config.workers or os.cpu_count() or 1

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_cell, problem, cfg, rule, label, record, stop_metric,
                        out_dir / f"{config.family}__{label}.csv")
            for cfg, rule, label in zip(config.solvers, config.solver_eta0_rules, labels)
        ]
        rows = [f.result() for f in futures]

    lines = [SUMMARY_HEADER]
    for row in rows:
        lines.append(",".join((
            row["problem"], row["solver"], _fmt(row.get("iters_to_tol")),
            _fmt(row.get("final_eg_residual")), _fmt(row.get("total_operator_evals")),
            _fmt(row.get("total_backtrack_failures")), _fmt(row.get("elapsed_seconds")),
            row["status"],
        )))
    (out_dir / "summary.csv").write_text("\n".join(lines) + "\n")
    return rows
