"""Shared data model: feasible sets, VI problems, solver configuration and
per-iteration trace records.

A variational inequality is described by a continuous monotone operator F
together with a nonempty closed convex feasible set.  Everything here is
plain data; the actual projection oracles and solver loops live in
``projections`` and ``solvers``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Point = np.ndarray  # 1-D float64 vector


# ---------------------------------------------------------------------------
# Errors


class ExtragradError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(ExtragradError):
    """A vector's dimension does not match the set/problem it is used with."""


class NonfiniteOutput(ExtragradError):
    """An operator evaluation produced NaN or Inf coordinates."""


class NonpositiveStepsize(ExtragradError):
    """A stepsize argument was <= 0."""


class InvalidCardinality(ExtragradError):
    """Capped-simplex cardinality outside 1..d."""


class DimensionTooLarge(ExtragradError):
    """Brute-force oracle invoked beyond its enumeration budget."""


class InfeasibleInput(ExtragradError):
    """An input point violates the feasibility required by the operation."""


class StationaryIterate(ExtragradError):
    """Local Lipschitz estimates requested at a stationary step (w == z)."""


class BacktrackLimit(ExtragradError):
    """More than the allowed number of stepsize reductions in one iteration."""


class LossOverflow(ExtragradError):
    """An exponential-loss argument exceeded the safe range (reported, not clamped)."""


class SingularMatrix(ExtragradError):
    """Factorization failed even after adding diagonal jitter."""


class EmptyTrace(ExtragradError):
    """An aggregate over iterates was requested on an empty sequence."""


class ConfigError(ExtragradError):
    """Experiment configuration could not be parsed or validated."""


# ---------------------------------------------------------------------------
# Feasible sets


class FeasibleSet:
    """Base class of the closed convex sets the solvers can project onto."""

    dim: int


class FullSpace(FeasibleSet):
    """All of R^d (projection is the identity)."""

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(d)

    def __repr__(self):
        return f"FullSpace({self.dim})"


class Box(FeasibleSet):
    """{z : lo <= z <= hi} componentwise; infinite bounds permitted."""

    def __init__(self, lo, hi, d: int | None = None):
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if lo.ndim == 0 and hi.ndim == 0:
            if d is None:
                raise ValueError("scalar bounds need an explicit dimension d")
            lo = np.full(d, float(lo))
            hi = np.full(d, float(hi))
        else:
            lo, hi = (a.astype(np.float64, copy=True) for a in np.broadcast_arrays(lo, hi))
        if lo.ndim != 1:
            raise ValueError("bounds must be vectors")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ValueError("box requires lo <= hi componentwise")
        self.lo = lo
        self.hi = hi
        self.dim = lo.size

    def __repr__(self):
        return f"Box(d={self.dim})"


class Simplex(FeasibleSet):
    """The standard probability simplex {z >= 0, sum(z) = 1}."""

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(d)

    def __repr__(self):
        return f"Simplex({self.dim})"


class CappedSimplex(FeasibleSet):
    """{z in [0,1]^d : sum(z) = s} for an integer cardinality 1 <= s <= d."""

    def __init__(self, d: int, s: int):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        if not 1 <= s <= d:
            raise InvalidCardinality(f"cardinality s={s} outside 1..{d}")
        self.dim = int(d)
        self.s = int(s)

    def __repr__(self):
        return f"CappedSimplex({self.dim}, s={self.s})"


class Product(FeasibleSet):
    """Cartesian product of feasible sets; points are concatenations."""

    def __init__(self, factors: Sequence[FeasibleSet]):
        factors = tuple(factors)
        if not factors:
            raise ValueError("product needs at least one factor")
        self.factors = factors
        self.dim = sum(f.dim for f in factors)

    def split(self, z: np.ndarray) -> list[np.ndarray]:
        out, i = [], 0
        for f in self.factors:
            out.append(z[i:i + f.dim])
            i += f.dim
        return out

    def __repr__(self):
        return "Product(" + ", ".join(repr(f) for f in self.factors) + ")"


def check_feasible(set_: FeasibleSet, z: np.ndarray, tol: float) -> bool:
    """True iff every defining constraint of the set holds within +tol."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (set_.dim,):
        raise DimensionMismatch(f"point has dim {z.size}, set has dim {set_.dim}")
    if isinstance(set_, FullSpace):
        return bool(np.all(np.isfinite(z)))
    if isinstance(set_, Box):
        return bool(np.all(z >= set_.lo - tol) and np.all(z <= set_.hi + tol))
    if isinstance(set_, Simplex):
        return bool(np.all(z >= -tol) and abs(float(z.sum()) - 1.0) <= tol)
    if isinstance(set_, CappedSimplex):
        return bool(
            np.all(z >= -tol)
            and np.all(z <= 1.0 + tol)
            and abs(float(z.sum()) - set_.s) <= tol
        )
    if isinstance(set_, Product):
        return all(check_feasible(f, part, tol) for f, part in zip(set_.factors, set_.split(z)))
    raise TypeError(f"unknown set type {type(set_)!r}")


# ---------------------------------------------------------------------------
# VI problems


@dataclass(frozen=True, eq=False)
class VIProblem:
    """A monotone VI: operator F on a projectable feasible set.

    ``operator`` must be deterministic and side-effect free.  ``gap_oracle``
    and ``known_solution`` are optional diagnostics used by the harness and
    the test suite; ``lipschitz`` is an estimated global Lipschitz constant
    where one is cheap to obtain (used for fixed-stepsize baselines).
    """

    dim: int
    operator: Callable[[np.ndarray], np.ndarray]
    set: FeasibleSet
    gap_oracle: Optional[Callable[[np.ndarray], float]] = None
    known_solution: Optional[np.ndarray] = None
    lipschitz: Optional[float] = None
    name: str = "vi"

    def __post_init__(self):
        if self.dim != self.set.dim:
            raise DimensionMismatch(
                f"problem dim {self.dim} != set dim {self.set.dim}")


class EvalCounter:
    """Counts operator evaluations for one solver run."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0


def evaluate_operator(problem: VIProblem, z: np.ndarray,
                      counter: EvalCounter | None = None) -> np.ndarray:
    """Evaluate F(z), checking dimensions and finiteness of the output."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (problem.dim,):
        raise DimensionMismatch(f"point has dim {z.size}, problem has dim {problem.dim}")
    if not np.all(np.isfinite(z)):
        raise NonfiniteOutput("operator input contains NaN/Inf")
    out = np.asarray(problem.operator(z), dtype=np.float64)
    if out.shape != (problem.dim,):
        raise DimensionMismatch("operator output has wrong dimension")
    if not np.all(np.isfinite(out)):
        raise NonfiniteOutput("operator output contains NaN/Inf")
    if counter is not None:
        counter.count += 1
    return out


# ---------------------------------------------------------------------------
# Solver configuration


class Algorithm(str, enum.Enum):
    EG_FIXED = "EG_FIXED"
    PF_NE_EG = "PF_NE_EG"
    PF_NE_EG_ADABT = "PF_NE_EG_ADABT"
    PF_NE_EG_BT = "PF_NE_EG_BT"


class LambdaSchedule(str, enum.Enum):
    CONSTANT_ONE = "CONSTANT_ONE"
    LOG_DECAY = "LOG_DECAY"


class StopReason(str, enum.Enum):
    TOL_REACHED = "TOL_REACHED"
    MAX_ITER = "MAX_ITER"
    STATIONARY_POINT = "STATIONARY_POINT"


# one stepsize reduction by rho=0.9 per failure: 200 failures span ~9 orders
# of magnitude, beyond which the operator is effectively not locally Lipschitz
BACKTRACK_FAILURE_LIMIT = 200


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by all solver variants.

    ``eta0`` is the initial (or, for EG_FIXED, constant) stepsize.  The
    stepsize growth factors follow ``lambda_schedule``: LOG_DECAY uses
    1 + 1/log(t+2) (natural log), CONSTANT_ONE keeps stepsizes non-increasing.
    ``stationarity_tol`` is the relative threshold for declaring the
    look-ahead point equal to the iterate, which certifies optimality.
    """

    algorithm: Algorithm = Algorithm.PF_NE_EG
    eta0: float = 0.5
    theta: float = 0.9
    rho: float = 0.9
    lambda_schedule: LambdaSchedule = LambdaSchedule.LOG_DECAY
    max_iter: int = 10_000
    residual_tol: float = 0.0
    stationarity_tol: float = 1e-14
    bt_increase_trick: bool = False
    seed: int = 0

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0,1)")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0,1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.residual_tol < 0 or self.stationarity_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.seed < 0 or self.seed > 2**64 - 1:
            raise ValueError("seed must fit in 64 unsigned bits")

    def lambda_at(self, t: int) -> float:
        """Growth factor lambda_t; >= 1 for all t and -> 1 as t grows."""
        if self.lambda_schedule is LambdaSchedule.CONSTANT_ONE:
            return 1.0
        return 1.0 + 1.0 / math.log(t + 2)


# ---------------------------------------------------------------------------
# Traces and results


@dataclass(slots=True)
class IterationRecord:
    """Per-iteration trace row (iteration counter t starts at 1)."""

    t: int
    eta: float
    L_t: float
    hatL_t: float
    eg_residual: float
    nat_residual: Optional[float] = None
    tan_residual: Optional[float] = None
    gap: Optional[float] = None
    dist_to_solution: Optional[float] = None
    backtrack_failures: int = 0
    elapsed_seconds: float = 0.0


@dataclass
class SolveResult:
    final_point: np.ndarray
    stop_reason: StopReason
    trace: list[IterationRecord]
    ergodic_point: Optional[np.ndarray] = None
    operator_evals: int = 0

    @property
    def iterations(self) -> int:
        return len(self.trace)

    def total_backtrack_failures(self) -> int:
        return sum(r.backtrack_failures for r in self.trace)
