"""Convergence metrics for monotone VIs.

Four metrics are implemented:

* extragradient residual ||F(z+) + xi||_2, where xi is the projection
  residual of the second extragradient half-step (the primary stop metric,
  available at extragradient iterates at negligible cost);
* natural residual (1/eta) ||z - Proj(z - eta F(z))||_2;
* tangent residual ||F(z) + Proj_{normal cone}(-F(z))||_2, computed in
  closed form for box-structured sets (it reduces to the operator norm at
  interior points) and reported as absent elsewhere, where the extragradient
  residual serves as its upper bound;
* the closed-form saddle-point gap of bilinear matrix games on simplices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    Box,
    EvalCounter,
    FeasibleSet,
    FullSpace,
    InfeasibleInput,
    NonpositiveStepsize,
    Product,
    VIProblem,
    evaluate_operator,
)
from .projections import project

ACTIVITY_TOL = 1e-12  # boundary-contact tolerance for normal-cone projection


@dataclass(slots=True)
class ResidualSnapshot:
    """Metric values at one iterate; absent metrics stay None."""

    eg_residual: float
    nat_residual: float
    tan_residual: Optional[float] = None
    gap: Optional[float] = None


def residual_snapshot(problem: VIProblem, z_next: np.ndarray, xi: np.ndarray,
                      F_znext: np.ndarray | None = None,
                      nat_eta: float = 0.01) -> ResidualSnapshot:
    """All metrics at an extragradient iterate, reusing one operator value."""
    if F_znext is None:
        F_znext = evaluate_operator(problem, z_next)
    return ResidualSnapshot(
        eg_residual=extragradient_residual(problem, z_next, xi, F_znext=F_znext),
        nat_residual=natural_residual(problem, z_next, nat_eta, F_z=F_znext),
        tan_residual=tangent_residual(problem, z_next, F_z=F_znext),
        gap=float(problem.gap_oracle(z_next)) if problem.gap_oracle is not None else None,
    )


def projection_residual(z_next: np.ndarray, z: np.ndarray, F_w: np.ndarray,
                        eta: float) -> np.ndarray:
    """Residual of the second extragradient projection, scaled by -1/eta.

    Equals -(1/eta) [z_next - (z - eta F_w)]; when z_next came from that
    projection this vector lies in the normal cone of the set at z_next,
    and it vanishes whenever the projection was inactive.
    """
    if not eta > 0:
        raise NonpositiveStepsize(f"eta={eta} must be positive")
    return -(z_next - (z - eta * F_w)) / eta


def extragradient_residual(problem: VIProblem, z_next: np.ndarray, xi: np.ndarray,
                           F_znext: np.ndarray | None = None,
                           counter: EvalCounter | None = None) -> float:
    """||F(z_next) + xi||_2; zero exactly at VI solutions."""
    if F_znext is None:
        F_znext = evaluate_operator(problem, z_next, counter)
    return float(np.linalg.norm(F_znext + xi))


def natural_residual(problem: VIProblem, z: np.ndarray, eta: float,
                     F_z: np.ndarray | None = None,
                     counter: EvalCounter | None = None) -> float:
    """(1/eta) ||z - Proj(z - eta F(z))||_2.

    Costs one operator evaluation (skipped when F_z is supplied) and one
    projection.
    """
    if not eta > 0:
        raise NonpositiveStepsize(f"eta={eta} must be positive")
    if F_z is None:
        F_z = evaluate_operator(problem, z, counter)
    step = project(problem.set, z - eta * F_z)
    return float(np.linalg.norm(z - step)) / eta


def box_bounds(set_: FeasibleSet) -> tuple[np.ndarray, np.ndarray] | None:
    """Per-coordinate (lo, hi) when the set is a box / full space / product
    of such; None for sets with coupled constraints (simplex-like)."""
    if isinstance(set_, FullSpace):
        d = set_.dim
        return np.full(d, -np.inf), np.full(d, np.inf)
    if isinstance(set_, Box):
        return set_.lo, set_.hi
    if isinstance(set_, Product):
        parts = [box_bounds(f) for f in set_.factors]
        if any(p is None for p in parts):
            return None
        return (np.concatenate([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]))
    return None


def tangent_residual(problem: VIProblem, z: np.ndarray,
                     F_z: np.ndarray | None = None,
                     counter: EvalCounter | None = None) -> float | None:
    """||F(z) + Proj_{normal cone at z}(-F(z))||_2 for box-structured sets.

    Returns None when the feasible set has simplex-type factors, for which
    the normal-cone projection is itself a nontrivial optimization; callers
    report the extragradient residual as a valid upper bound instead.
    """
    bounds = box_bounds(problem.set)
    if bounds is None:
        return None
    lo, hi = bounds
    if F_z is None:
        F_z = evaluate_operator(problem, z, counter)
    u = -F_z
    p = np.zeros_like(u)
    at_lo = z <= lo + ACTIVITY_TOL
    at_hi = z >= hi - ACTIVITY_TOL
    p[at_lo] = np.minimum(u[at_lo], 0.0)
    p[at_hi] = np.maximum(u[at_hi], 0.0)
    pinned = at_lo & at_hi  # lo == hi: the normal cone is the whole line
    p[pinned] = u[pinned]
    return float(np.linalg.norm(F_z + p))


def matrix_game_gap(A: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Saddle gap max_i (A^T x)_i - min_i (A y)_i of a bilinear game on
    simplices; nonnegative for feasible (x, y)."""
    A = np.asarray(A, dtype=np.float64)
    for v in (x, y):
        if abs(float(np.sum(v)) - 1.0) > 1e-9 or float(np.min(v)) < -1e-9:
            raise InfeasibleInput("x and y must lie on the unit simplex")
    return float(np.max(A.T @ x) - np.min(A @ y))
