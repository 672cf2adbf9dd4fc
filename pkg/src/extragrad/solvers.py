"""Extragradient solvers with parameter-free stepsize selection.

Four variants share one driver:

* ``EG_FIXED`` — the classical two-projection extragradient update with a
  constant stepsize;
* ``PF_NE_EG`` — adaptive stepsizes from local Lipschitz estimates,
  eta_t = min(lambda_{t-1} eta_{t-1}, theta/L_{t-1}, theta/hatL_{t-1});
* ``PF_NE_EG_ADABT`` — the same initialization followed by a backtracking
  line search enforcing eta L_t <= (theta+1)/2 and eta hatL_t <= 1, which
  allows stepsizes to grow across iterations;
* ``PF_NE_EG_BT`` — standard backtracking from the previous stepsize with
  thresholds theta and 1 (monotone stepsizes unless the increase trick is
  enabled).

The local estimates are finite-difference ratios of operator values at the
current iterate, the look-ahead point and the next iterate; a zero estimate
(constant operator, or coincident points under the 0/0 convention) removes
the corresponding bound from the stepsize rule.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    BACKTRACK_FAILURE_LIMIT,
    Algorithm,
    BacktrackLimit,
    EmptyTrace,
    EvalCounter,
    IterationRecord,
    NonpositiveStepsize,
    SolveResult,
    SolverConfig,
    StationaryIterate,
    StopReason,
    VIProblem,
    evaluate_operator,
)
from .metrics import (
    natural_residual,
    projection_residual,
    tangent_residual,
)
from .projections import project

NAT_REPORT_ETA = 0.01  # reporting stepsize for the natural residual

_RECORDABLE = frozenset({"nat", "tan", "gap", "dist"})


@dataclass(slots=True)
class StepOutcome:
    """One extragradient update, with the operator values it consumed."""

    w: np.ndarray
    z_next: np.ndarray
    F_z: np.ndarray
    F_w: np.ndarray
    F_znext: np.ndarray
    L_t: float
    hatL_t: float
    eta: float
    backtrack_failures: int = 0
    stationary: bool = False


def lipschitz_estimates(F_z, F_w, F_znext, z, w, z_next,
                        stationarity_tol: float) -> tuple[float, float]:
    """Local Lipschitz estimates (L_t, hatL_t) at one extragradient step.

    hatL_t follows the 0/0 convention: it is 0 whenever w and z_next
    coincide within the stationarity tolerance.  Raises StationaryIterate
    if w coincides with z itself (the caller should have stopped).
    """
    dw = float(np.linalg.norm(w - z))
    if dw <= stationarity_tol * max(1.0, float(np.linalg.norm(z))):
        raise StationaryIterate("w == z within tolerance; iterate is optimal")
    lip = float(np.linalg.norm(F_w - F_z)) / dw
    dn = float(np.linalg.norm(w - z_next))
    if dn <= stationarity_tol * max(1.0, float(np.linalg.norm(w))):
        lip_hat = 0.0
    else:
        lip_hat = float(np.linalg.norm(F_w - F_znext)) / dn
    return lip, lip_hat


def adaptive_stepsize(eta_prev: float, lambda_prev: float, L_prev: float,
                      hatL_prev: float, theta: float) -> float:
    """min(lambda*eta_prev, theta/L_prev, theta/hatL_prev); zero estimates
    drop their bound."""
    eta = lambda_prev * eta_prev
    if L_prev > 0.0:
        eta = min(eta, theta / L_prev)
    if hatL_prev > 0.0:
        eta = min(eta, theta / hatL_prev)
    return eta


def extragradient_step(problem: VIProblem, z: np.ndarray, eta: float, *,
                       F_z: np.ndarray | None = None,
                       counter: EvalCounter | None = None,
                       stationarity_tol: float = 1e-14) -> StepOutcome:
    """One two-projection extragradient update at stepsize eta.

    Evaluates the operator at z (unless a cached value is supplied), at the
    look-ahead point w and at the new iterate, and fills in the local
    Lipschitz estimates.  If w coincides with z within the stationarity
    tolerance the outcome is flagged stationary and no further evaluations
    are spent.
    """
    if not eta > 0:
        raise NonpositiveStepsize(f"eta={eta} must be positive")
    if F_z is None:
        F_z = evaluate_operator(problem, z, counter)
    w = project(problem.set, z - eta * F_z)
    if float(np.linalg.norm(w - z)) <= stationarity_tol * max(1.0, float(np.linalg.norm(z))):
        return StepOutcome(w=w, z_next=z.copy(), F_z=F_z, F_w=F_z, F_znext=F_z,
                           L_t=0.0, hatL_t=0.0, eta=eta, stationary=True)
    F_w = evaluate_operator(problem, w, counter)
    z_next = project(problem.set, z - eta * F_w)
    if np.array_equal(w, z_next):
        F_znext = F_w
    else:
        F_znext = evaluate_operator(problem, z_next, counter)
    lip, lip_hat = lipschitz_estimates(F_z, F_w, F_znext, z, w, z_next, stationarity_tol)
    return StepOutcome(w=w, z_next=z_next, F_z=F_z, F_w=F_w, F_znext=F_znext,
                       L_t=lip, hatL_t=lip_hat, eta=eta)


def _backtrack(problem, z, F_z, eta_start, threshold, rho, counter, stationarity_tol):
    """Reduce eta by rho until eta*L_t <= threshold and eta*hatL_t <= 1."""
    eta = eta_start
    failures = 0
    while True:
        out = extragradient_step(problem, z, eta, F_z=F_z, counter=counter,
                                 stationarity_tol=stationarity_tol)
        if out.stationary:
            out.backtrack_failures = failures
            return out
        if eta * out.L_t <= threshold and (out.hatL_t == 0.0 or eta * out.hatL_t <= 1.0):
            out.backtrack_failures = failures
            return out
        failures += 1
        if failures > BACKTRACK_FAILURE_LIMIT:
            raise BacktrackLimit(
                f"{failures} stepsize reductions in one iteration; "
                "operator appears not locally Lipschitz at the iterate")
        eta = rho * eta


def solve(problem: VIProblem, config: SolverConfig, *,
          z0: np.ndarray | None = None,
          record: Iterable[str] = (),
          stop_metric: str = "eg") -> SolveResult:
    """Run the configured algorithm until the stop metric reaches
    ``config.residual_tol``, a stationary point is certified, or
    ``config.max_iter`` iterations complete.

    ``record`` selects optional per-iteration diagnostics out of
    {"nat", "tan", "gap", "dist"}; the extragradient residual is always
    recorded.  ``stop_metric`` is one of "eg", "nat", "gap".  The start
    point defaults to the projection of the origin onto the feasible set.
    """
    record = frozenset(record)
    unknown = record - _RECORDABLE
    if unknown:
        raise ValueError(f"unknown metrics {sorted(unknown)}; choose from {sorted(_RECORDABLE)}")
    if stop_metric not in ("eg", "nat", "gap"):
        raise ValueError("stop_metric must be one of 'eg', 'nat', 'gap'")
    need_gap = "gap" in record or stop_metric == "gap"
    if need_gap and problem.gap_oracle is None:
        raise ValueError("metric 'gap' requires a problem with a gap oracle")
    need_nat = "nat" in record or stop_metric == "nat"
    need_dist = "dist" in record and problem.known_solution is not None

    algorithm = config.algorithm
    counter = EvalCounter()
    if z0 is None:
        z = project(problem.set, np.zeros(problem.dim))
    else:
        z = project(problem.set, np.asarray(z0, dtype=np.float64))
    F_z = evaluate_operator(problem, z, counter)

    eta_prev = config.eta0
    lip_prev = 0.0
    lip_hat_prev = 0.0
    sum_eta_w = np.zeros(problem.dim)
    sum_eta = 0.0

    trace: list[IterationRecord] = []
    stop_reason = StopReason.MAX_ITER
    start = time.perf_counter()

    for t in range(1, config.max_iter + 1):
        if algorithm is Algorithm.EG_FIXED:
            out = extragradient_step(problem, z, config.eta0, F_z=F_z, counter=counter,
                                     stationarity_tol=config.stationarity_tol)
        elif algorithm is Algorithm.PF_NE_EG:
            # the first iteration has no estimates yet and uses eta0 as is
            eta = config.eta0 if t == 1 else adaptive_stepsize(
                eta_prev, config.lambda_at(t - 1), lip_prev, lip_hat_prev, config.theta)
            out = extragradient_step(problem, z, eta, F_z=F_z, counter=counter,
                                     stationarity_tol=config.stationarity_tol)
        elif algorithm is Algorithm.PF_NE_EG_ADABT:
            eta_bar = config.eta0 if t == 1 else adaptive_stepsize(
                eta_prev, config.lambda_at(t - 1), lip_prev, lip_hat_prev, config.theta)
            out = _backtrack(problem, z, F_z, eta_bar, 0.5 * (config.theta + 1.0),
                             config.rho, counter, config.stationarity_tol)
        elif algorithm is Algorithm.PF_NE_EG_BT:
            eta_bar = eta_prev / config.rho if config.bt_increase_trick else eta_prev
            out = _backtrack(problem, z, F_z, eta_bar, config.theta,
                             config.rho, counter, config.stationarity_tol)
        else:  # pragma: no cover
            raise ValueError(f"unknown algorithm {algorithm!r}")

        if out.stationary:
            stop_reason = StopReason.STATIONARY_POINT
            break

        xi = projection_residual(out.z_next, z, out.F_w, out.eta)
        rec = IterationRecord(
            t=t,
            eta=out.eta,
            L_t=out.L_t,
            hatL_t=out.hatL_t,
            eg_residual=float(np.linalg.norm(out.F_znext + xi)),
            backtrack_failures=out.backtrack_failures,
            elapsed_seconds=time.perf_counter() - start,
        )
        if need_nat:
            rec.nat_residual = natural_residual(problem, out.z_next, NAT_REPORT_ETA,
                                                F_z=out.F_znext)
        if "tan" in record:
            rec.tan_residual = tangent_residual(problem, out.z_next, F_z=out.F_znext)
        if need_gap:
            rec.gap = float(problem.gap_oracle(out.z_next))
        if need_dist:
            rec.dist_to_solution = float(np.linalg.norm(out.z_next - problem.known_solution))
        trace.append(rec)

        sum_eta_w += out.eta * out.w
        sum_eta += out.eta

        z = out.z_next
        F_z = out.F_znext
        eta_prev = out.eta
        lip_prev = out.L_t
        lip_hat_prev = out.hatL_t

        stop_val = {"eg": rec.eg_residual, "nat": rec.nat_residual, "gap": rec.gap}[stop_metric]
        if stop_val <= config.residual_tol:
            stop_reason = StopReason.TOL_REACHED
            break

    ergodic = sum_eta_w / sum_eta if sum_eta > 0 else None
    return SolveResult(final_point=z, stop_reason=stop_reason, trace=trace,
                       ergodic_point=ergodic, operator_evals=counter.count)


def _solve_as(problem, config, algorithm, **kwargs):
    if config.algorithm is not algorithm:
        raise ValueError(f"config.algorithm must be {algorithm.value}")
    return solve(problem, config, **kwargs)


def solve_eg_fixed(problem, config, **kwargs) -> SolveResult:
    """Classical extragradient with the constant stepsize config.eta0."""
    return _solve_as(problem, config, Algorithm.EG_FIXED, **kwargs)


def solve_pf_ne_eg(problem, config, **kwargs) -> SolveResult:
    """Adaptive parameter-free extragradient (no line search)."""
    return _solve_as(problem, config, Algorithm.PF_NE_EG, **kwargs)


def solve_pf_ne_eg_adabt(problem, config, **kwargs) -> SolveResult:
    """Parameter-free extragradient with non-monotone backtracking."""
    return _solve_as(problem, config, Algorithm.PF_NE_EG_ADABT, **kwargs)


def solve_pf_ne_eg_bt(problem, config, **kwargs) -> SolveResult:
    """Parameter-free extragradient with standard backtracking."""
    return _solve_as(problem, config, Algorithm.PF_NE_EG_BT, **kwargs)


def ergodic_average(points: Sequence[np.ndarray], weights: str = "uniform",
                    stepsizes: Sequence[float] | None = None) -> np.ndarray:
    """Average of look-ahead iterates: plain mean, or weighted by stepsizes."""
    if len(points) == 0:
        raise EmptyTrace("no iterates to average")
    mode = weights.lower()
    if mode == "uniform":
        return np.mean(np.asarray(points, dtype=np.float64), axis=0)
    if mode == "stepsize_weighted":
        if stepsizes is None or len(stepsizes) != len(points):
            raise ValueError("stepsize weighting needs one stepsize per point")
        etas = np.asarray(stepsizes, dtype=np.float64)
        pts = np.asarray(points, dtype=np.float64)
        return (etas[:, None] * pts).sum(axis=0) / etas.sum()
    raise ValueError("weights must be 'uniform' or 'stepsize_weighted'")
