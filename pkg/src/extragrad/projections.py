"""Euclidean projection oracles for every feasible-set variant.

All projections are exact up to floating point: identity on the full space,
componentwise clamping for boxes, sort-and-threshold for the simplex, and a
bisection-plus-exact-refinement threshold search for the capped simplex.
A brute-force active-set oracle (small dimensions only) is provided for
cross-checking in tests.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import (
    Box,
    CappedSimplex,
    DimensionMismatch,
    DimensionTooLarge,
    FeasibleSet,
    FullSpace,
    InvalidCardinality,
    Product,
    Simplex,
)

_BRUTE_FORCE_MAX_DIM = 8


def project(set_: FeasibleSet, z: np.ndarray) -> np.ndarray:
    """argmin_{x in set} ||x - z||_2; idempotent and nonexpansive."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (set_.dim,):
        raise DimensionMismatch(f"point has dim {z.size}, set has dim {set_.dim}")
    if isinstance(set_, FullSpace):
        return z.copy()
    if isinstance(set_, Box):
        return np.clip(z, set_.lo, set_.hi)
    if isinstance(set_, Simplex):
        return project_simplex(z)
    if isinstance(set_, CappedSimplex):
        return project_capped_simplex(z, set_.s)
    if isinstance(set_, Product):
        return np.concatenate([project(f, part) for f, part in zip(set_.factors, set_.split(z))])
    raise TypeError(f"unknown set type {type(set_)!r}")


def project_simplex(z: np.ndarray) -> np.ndarray:
    """Sort-and-threshold projection onto the unit simplex, O(d log d)."""
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - 1.0
    j = np.arange(1, z.size + 1)
    # the largest j with u_j > (cumsum_j - 1)/j is always >= 1
    k = int(np.nonzero(u - css / j > 0)[0][-1]) + 1
    tau = css[k - 1] / k
    return np.maximum(z - tau, 0.0)


def project_capped_simplex(z: np.ndarray, s: int, *, return_tau: bool = False):
    """Projection onto {x in [0,1]^d : sum(x) = s}.

    The KKT conditions give x_i = clamp(z_i - tau, 0, 1) for a scalar
    threshold tau with sum(x) = s.  tau is located by monotone bisection,
    then refined exactly on the active pattern; if that still misses the sum
    constraint a full breakpoint scan is used.  Worst case O(d^2).
    """
    z = np.asarray(z, dtype=np.float64)
    d = z.size
    if not 1 <= s <= d:
        raise InvalidCardinality(f"cardinality s={s} outside 1..{d}")

    if s == d:  # the all-ones vector is the only feasible point
        tau = float(z.min()) - 1.0
        x = np.ones(d)
        return (x, tau) if return_tau else x

    def total(tau: float) -> float:
        return float(np.clip(z - tau, 0.0, 1.0).sum())

    # total() is continuous and non-increasing in tau with total(lo)=d>=s
    # and total(hi)=0<=s
    lo, hi = float(z.min()) - 1.0, float(z.max())
    tol = 1e-14 * max(1.0, float(s))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if total(mid) >= s:
            lo = mid
        else:
            hi = mid
    tau = _refine_tau(z, s, 0.5 * (lo + hi))
    if abs(total(tau) - s) > tol:
        tau = _breakpoint_scan_tau(z, s)
    x = np.clip(z - tau, 0.0, 1.0)
    return (x, tau) if return_tau else x


def _refine_tau(z: np.ndarray, s: int, tau: float) -> float:
    """Solve the sum constraint exactly on the active pattern at tau."""
    y = z - tau
    free = (y > 0.0) & (y < 1.0)
    n_free = int(np.count_nonzero(free))
    if n_free == 0:
        return tau
    n_up = int(np.count_nonzero(y >= 1.0))
    exact = (float(z[free].sum()) + n_up - s) / n_free
    cur = abs(float(np.clip(z - tau, 0.0, 1.0).sum()) - s)
    new = abs(float(np.clip(z - exact, 0.0, 1.0).sum()) - s)
    return exact if new <= cur else tau


def _breakpoint_scan_tau(z: np.ndarray, s: int) -> float:
    """Exact threshold by scanning the 2d breakpoints of the piecewise-linear sum."""
    bps = np.unique(np.concatenate([z, z - 1.0]))
    sums = np.clip(z[None, :] - bps[:, None], 0.0, 1.0).sum(axis=1)  # non-increasing
    idx = int(np.searchsorted(-sums, -float(s), side="left"))
    if idx == 0:
        return float(bps[0])
    lo_bp, hi_bp = float(bps[idx - 1]), float(bps[min(idx, bps.size - 1)])
    tau = _refine_tau(z, s, 0.5 * (lo_bp + hi_bp))
    return min(max(tau, lo_bp), hi_bp)


# ---------------------------------------------------------------------------
# Brute-force oracle (tests only)


def brute_force_projection_oracle(set_: FeasibleSet, z: np.ndarray) -> np.ndarray:
    """Projection by enumerating active-set patterns of the KKT system.

    Deliberately independent of the fast paths above; restricted to
    dim <= 8 because the enumeration is exponential.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (set_.dim,):
        raise DimensionMismatch(f"point has dim {z.size}, set has dim {set_.dim}")
    if set_.dim > _BRUTE_FORCE_MAX_DIM:
        raise DimensionTooLarge(f"brute-force oracle limited to d <= {_BRUTE_FORCE_MAX_DIM}")

    if isinstance(set_, FullSpace):
        return z.copy()
    if isinstance(set_, Product):
        # squared distance is separable across factors
        return np.concatenate(
            [brute_force_projection_oracle(f, part) for f, part in zip(set_.factors, set_.split(z))]
        )
    if isinstance(set_, Box):
        return _bf_box(set_, z)
    if isinstance(set_, Simplex):
        return _bf_simplex(z)
    if isinstance(set_, CappedSimplex):
        return _bf_capped(z, set_.s)
    raise TypeError(f"unknown set type {type(set_)!r}")


def _bf_best(candidates, z):
    best, best_d = None, np.inf
    for x in candidates:
        d = float(np.dot(x - z, x - z))
        if d < best_d:
            best, best_d = x, d
    return best


def _bf_box(set_: Box, z: np.ndarray) -> np.ndarray:
    d = z.size
    feas_tol = 1e-12
    candidates = []
    for pattern in itertools.product((-1, 0, 1), repeat=d):
        x = np.empty(d)
        ok = True
        for i, p in enumerate(pattern):
            if p == -1:
                x[i] = set_.lo[i]
            elif p == 1:
                x[i] = set_.hi[i]
            else:
                x[i] = z[i]
            if not np.isfinite(x[i]):
                ok = False
                break
        if ok and np.all(x >= set_.lo - feas_tol) and np.all(x <= set_.hi + feas_tol):
            candidates.append(x)
    return _bf_best(candidates, z)


def _bf_simplex(z: np.ndarray) -> np.ndarray:
    d = z.size
    feas_tol = 1e-12
    candidates = []
    for mask in itertools.product((False, True), repeat=d):
        free = np.array(mask)
        n_free = int(free.sum())
        if n_free == 0:
            continue
        tau = (float(z[free].sum()) - 1.0) / n_free
        x = np.zeros(d)
        x[free] = z[free] - tau
        if np.all(x >= -feas_tol):
            candidates.append(np.maximum(x, 0.0))
    return _bf_best(candidates, z)


def _bf_capped(z: np.ndarray, s: int) -> np.ndarray:
    d = z.size
    feas_tol = 1e-12
    candidates = []
    for pattern in itertools.product((0, 1, 2), repeat=d):  # 0=zero, 1=one, 2=free
        pat = np.array(pattern)
        free = pat == 2
        ones = pat == 1
        n_free, n_ones = int(free.sum()), int(ones.sum())
        x = np.zeros(d)
        x[ones] = 1.0
        if n_free == 0:
            if n_ones != s:
                continue
        else:
            tau = (float(z[free].sum()) + n_ones - s) / n_free
            x[free] = z[free] - tau
            if np.any(x[free] < -feas_tol) or np.any(x[free] > 1.0 + feas_tol):
                continue
        candidates.append(np.clip(x, 0.0, 1.0))
    return _bf_best(candidates, z)


# ---------------------------------------------------------------------------
# Feasible sampling (tests and statistical checks)


def sample_feasible(set_: FeasibleSet, rng: np.random.Generator,
                    scale: float = 1.0) -> np.ndarray:
    """Draw a random feasible point; unbounded directions use N(0, scale^2)."""
    if isinstance(set_, FullSpace):
        return scale * rng.standard_normal(set_.dim)
    if isinstance(set_, Box):
        # infinite sides become a 2*scale-wide window anchored at the
        # finite bound (or centered at 0 when both sides are infinite)
        lo = np.where(np.isfinite(set_.lo), set_.lo,
                      np.where(np.isfinite(set_.hi), set_.hi - 2 * scale, -scale))
        hi = np.where(np.isfinite(set_.hi), set_.hi, lo + 2 * scale)
        return lo + (hi - lo) * rng.random(set_.dim)
    if isinstance(set_, Simplex):
        return rng.dirichlet(np.ones(set_.dim))
    if isinstance(set_, CappedSimplex):
        return project_capped_simplex(rng.random(set_.dim) * set_.s, set_.s)
    if isinstance(set_, Product):
        return np.concatenate([sample_feasible(f, rng, scale) for f in set_.factors])
    raise TypeError(f"unknown set type {type(set_)!r}")
