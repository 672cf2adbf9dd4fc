"""Benchmark problem generators: bilinear matrix games, the saddle-point
reformulation of LASSO, minimax group-fairness classification, and the
double-scaled log-det relaxation of maximum-entropy subset selection.

Every generator is a pure function of its dimensions and seed.  The two
linear problems (games, LASSO) expose a spectral-norm estimate of their
operator for fixed-stepsize baselines; the fairness and subset-selection
operators are only locally Lipschitz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg

from .core import (
    Box,
    CappedSimplex,
    FullSpace,
    InvalidCardinality,
    LossOverflow,
    Product,
    Simplex,
    SingularMatrix,
    VIProblem,
)
from .metrics import matrix_game_gap

EXP_ARG_LIMIT = 700.0  # exp() overflows float64 just above 709


# ---------------------------------------------------------------------------
# Spectral norm estimation (power iteration)


def spectral_norm(matvec: Callable[[np.ndarray], np.ndarray],
                  rmatvec: Callable[[np.ndarray], np.ndarray],
                  dim: int, iters: int = 50) -> float:
    """Power iteration on K^T K; returns an estimate of ||K||_2."""
    v = np.full(dim, 1.0 / math.sqrt(dim))
    v += 1e-3 * np.sin(np.arange(dim))  # deterministic symmetry breaking
    v /= np.linalg.norm(v)
    for _ in range(iters):
        u = matvec(v)
        if float(np.linalg.norm(u)) == 0.0:
            return 0.0
        v = rmatvec(u)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return 0.0
        v /= nv
    return float(np.linalg.norm(matvec(v)))


# ---------------------------------------------------------------------------
# Bilinear matrix games:  min_{x in simplex} max_{y in simplex} x^T A y


@dataclass(frozen=True, eq=False)
class MatrixGameInstance:
    A: np.ndarray
    kappa: float
    seed: int


def make_matrix_game(d: int, kappa: float, seed: int = 0) -> VIProblem:
    """Random payoff matrix: each entry nonzero with probability kappa, the
    nonzero values uniform on [-1, 1]."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0.0 < kappa <= 1.0:
        raise ValueError("kappa must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random((d, d)) < kappa
    A = rng.uniform(-1.0, 1.0, size=(d, d)) * mask
    return matrix_game_problem(A, name=f"matrix_game(d={d},kappa={kappa},seed={seed})")


def matrix_game_problem(A: np.ndarray, name: str = "matrix_game") -> VIProblem:
    A = np.asarray(A, dtype=np.float64)
    d = A.shape[0]
    if A.shape != (d, d):
        raise ValueError("payoff matrix must be square")

    def operator(z: np.ndarray) -> np.ndarray:
        x, y = z[:d], z[d:]
        return np.concatenate([A @ y, -(A.T @ x)])

    def gap(z: np.ndarray) -> float:
        return matrix_game_gap(A, z[:d], z[d:])

    lip = spectral_norm(lambda v: A @ v, lambda u: A.T @ u, d)
    return VIProblem(dim=2 * d, operator=operator,
                     set=Product((Simplex(d), Simplex(d))),
                     gap_oracle=gap, lipschitz=lip, name=name)


# ---------------------------------------------------------------------------
# LASSO saddle reformulation:
#   min_x max_{|y|_inf <= lam}  0.5 ||A x - b||^2 + <y, x>


@dataclass(frozen=True, eq=False)
class LassoInstance:
    A: np.ndarray
    b: np.ndarray
    lam: float
    x_true: np.ndarray
    noise_sigma: float


def make_lasso_instance(m: int, n: int, sparsity_frac: float, sigma: float,
                        lam: float, seed: int = 0) -> LassoInstance:
    if not m < n:
        raise ValueError("underdetermined systems only (m < n)")
    if not 0.0 < sparsity_frac <= 1.0:
        raise ValueError("sparsity_frac must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    A /= np.linalg.norm(A, axis=0)  # unit-norm columns
    x_true = np.zeros(n)
    support = rng.choice(n, size=max(1, round(sparsity_frac * n)), replace=False)
    x_true[support] = rng.standard_normal(support.size)
    b = A @ x_true + sigma * rng.standard_normal(m)
    return LassoInstance(A=A, b=b, lam=float(lam), x_true=x_true, noise_sigma=float(sigma))


def lasso_problem(inst: LassoInstance, name: str = "lasso") -> VIProblem:
    A, b, lam = inst.A, inst.b, inst.lam
    m, n = A.shape

    def operator(z: np.ndarray) -> np.ndarray:
        x, y = z[:n], z[n:]
        return np.concatenate([A.T @ (A @ x - b) + y, -x])

    # spectral norm of the affine part K = [[A^T A, I], [-I, 0]]
    G = A.T @ A

    def kv(v):
        return np.concatenate([G @ v[:n] + v[n:], -v[:n]])

    def ktu(u):
        return np.concatenate([G @ u[:n] - u[n:], u[:n]])

    lip = spectral_norm(kv, ktu, 2 * n)
    return VIProblem(dim=2 * n, operator=operator,
                     set=Product((FullSpace(n), Box(-lam, lam, d=n))),
                     lipschitz=lip, name=name)


def make_lasso(m: int, n: int, sparsity_frac: float, sigma: float, lam: float,
               seed: int = 0) -> VIProblem:
    inst = make_lasso_instance(m, n, sparsity_frac, sigma, lam, seed)
    return lasso_problem(inst, name=f"lasso(m={m},n={n},s={sparsity_frac},seed={seed})")


# ---------------------------------------------------------------------------
# Minimax group fairness with exponential loss


@dataclass(frozen=True, eq=False)
class FairnessInstance:
    features: tuple[np.ndarray, ...]  # one (n_i, d) block per group
    labels: tuple[np.ndarray, ...]    # entries in {-1, +1}
    seed: int

    @property
    def n_groups(self) -> int:
        return len(self.features)

    @property
    def n_features(self) -> int:
        return self.features[0].shape[1]


def make_fairness_instance(m: int, n: int, d: int, seed: int = 0) -> FairnessInstance:
    """Synthetic heterogeneous groups: class-conditional unit-variance
    Gaussians separated by a unit mean shift, class prior 0.5 + 0.1*(i/m)
    for group i, and a label-noise rate of 10% * (i/m)^2."""
    if min(m, n, d) < 1:
        raise ValueError("m, n, d must all be >= 1")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    features, labels = [], []
    for i in range(1, m + 1):
        prior = 0.5 + 0.1 * (i / m)
        y = np.where(rng.random(n) < prior, 1.0, -1.0)
        X = rng.standard_normal((n, d)) + 0.5 * y[:, None] * direction
        n_flip = round(0.10 * (i / m) ** 2 * n)
        if n_flip:
            flip = rng.choice(n, size=n_flip, replace=False)
            y[flip] = -y[flip]
        features.append(X)
        labels.append(y)
    return FairnessInstance(features=tuple(features), labels=tuple(labels), seed=seed)


def fairness_losses(inst: FairnessInstance, theta: np.ndarray) -> np.ndarray:
    """Per-group exponential losses (1/n_i) sum_j exp(-y_ij theta^T x_ij)."""
    theta = np.asarray(theta, dtype=np.float64)
    out = np.empty(inst.n_groups)
    for i, (X, y) in enumerate(zip(inst.features, inst.labels)):
        arg = -y * (X @ theta)
        peak = float(np.max(arg))
        if peak > EXP_ARG_LIMIT:
            raise LossOverflow(
                f"exponential-loss argument {peak:.3g} exceeds {EXP_ARG_LIMIT:g} in group {i}")
        out[i] = float(np.mean(np.exp(arg)))
    return out


def fairness_operator(inst: FairnessInstance, paper_sign: bool = False) -> VIProblem:
    """Saddle operator of min_theta max_{q in simplex} sum_i q_i loss_i(theta).

    The primal block is +grad_theta of the weighted loss (the standard
    min-max convention, which keeps the operator monotone); ``paper_sign``
    flips it for inspection of the alternative printed convention.
    """
    m, d = inst.n_groups, inst.n_features
    sign = -1.0 if paper_sign else 1.0

    def operator(z: np.ndarray) -> np.ndarray:
        theta, q = z[:d], z[d:]
        gtheta = np.zeros(d)
        losses = np.empty(m)
        for i, (X, y) in enumerate(zip(inst.features, inst.labels)):
            arg = -y * (X @ theta)
            peak = float(np.max(arg))
            if peak > EXP_ARG_LIMIT:
                raise LossOverflow(
                    f"exponential-loss argument {peak:.3g} exceeds {EXP_ARG_LIMIT:g} in group {i}")
            e = np.exp(arg)
            losses[i] = e.mean()
            # grad loss_i = (1/n_i) X^T (-y * e)
            gtheta += q[i] * (X.T @ (-y * e)) / y.size
        return np.concatenate([sign * gtheta, -losses])

    return VIProblem(dim=d + m, operator=operator,
                     set=Product((FullSpace(d), Simplex(m))),
                     name=f"fairness(m={m},d={d},seed={inst.seed})")


def make_fairness(m: int, n: int, d: int, seed: int = 0,
                  paper_sign: bool = False) -> VIProblem:
    return fairness_operator(make_fairness_instance(m, n, d, seed), paper_sign=paper_sign)


# ---------------------------------------------------------------------------
# Maximum-entropy subset selection: double-scaled log-det relaxation
#   min_{x in capped simplex} max_{rho, omega}  phi(x, rho, omega)
#   phi = 0.5<x, rho> + 0.5<1-x, omega>
#         - 0.5 logdet(C D(e^rho) D(x) C + D(e^omega) D(1-x))


@dataclass(frozen=True, eq=False)
class MespInstance:
    C: np.ndarray
    s: int
    seed: int

    @property
    def dim(self) -> int:
        return self.C.shape[0]


def _mesp_matrix(C: np.ndarray, x, e_rho, e_omega) -> np.ndarray:
    M = (C * (e_rho * x)) @ C  # C Diag(e^rho x) C; C is symmetric
    M[np.diag_indices_from(M)] += e_omega * (1.0 - x)
    return 0.5 * (M + M.T)


def _mesp_cholesky(M: np.ndarray):
    try:
        return scipy.linalg.cho_factor(M, lower=True)
    except (scipy.linalg.LinAlgError, ValueError):
        pass
    # one retry with diagonal jitter; M can approach singularity when x has
    # entries near 0/1 under extreme scalings
    jitter = 1e-10 * float(np.trace(M)) / M.shape[0]
    Mj = M + jitter * np.eye(M.shape[0])
    try:
        return scipy.linalg.cho_factor(Mj, lower=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularMatrix("log-det matrix is not positive definite") from exc


def mesp_objective(inst: MespInstance, x: np.ndarray, rho: np.ndarray,
                   omega: np.ndarray) -> float:
    """Double-scaled log-det objective value at (x, rho, omega)."""
    x = np.asarray(x, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    M = _mesp_matrix(inst.C, x, np.exp(rho), np.exp(omega))
    c, _ = _mesp_cholesky(M)
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    return 0.5 * float(x @ rho) + 0.5 * float((1.0 - x) @ omega) - 0.5 * logdet


def mesp_gradients(inst: MespInstance, x, rho, omega):
    """(grad_x, grad_rho, grad_omega) of the objective.

    Derived from d logdet(M) = tr(M^{-1} dM):
      d phi/d x_i     = (rho_i - omega_i)/2 - [ (C M^-1 C)_ii e^rho_i - e^omega_i (M^-1)_ii ]/2
      d phi/d rho_i   = x_i/2 - e^rho_i x_i (C M^-1 C)_ii / 2
      d phi/d omega_i = (1-x_i)/2 - e^omega_i (1-x_i) (M^-1)_ii / 2
    """
    C = inst.C
    x = np.asarray(x, dtype=np.float64)
    e_rho = np.exp(np.asarray(rho, dtype=np.float64))
    e_omega = np.exp(np.asarray(omega, dtype=np.float64))
    M = _mesp_matrix(C, x, e_rho, e_omega)
    cho = _mesp_cholesky(M)
    Minv = scipy.linalg.cho_solve(cho, np.eye(M.shape[0]))
    Minv = 0.5 * (Minv + Minv.T)
    diag_Minv = np.diag(Minv)
    diag_CMC = np.einsum("ij,jk,ki->i", C, Minv, C)
    gx = 0.5 * (np.asarray(rho) - np.asarray(omega)) - 0.5 * (diag_CMC * e_rho - e_omega * diag_Minv)
    grho = 0.5 * x - 0.5 * e_rho * x * diag_CMC
    gomega = 0.5 * (1.0 - x) - 0.5 * e_omega * (1.0 - x) * diag_Minv
    return gx, grho, gomega


def mesp_operator(inst: MespInstance) -> VIProblem:
    """Saddle operator (grad_x, -grad_rho, -grad_omega) on
    capped-simplex x full-space scaling variables."""
    d = inst.dim
    if not 1 <= inst.s <= d:
        raise InvalidCardinality(f"subset size s={inst.s} outside 1..{d}")

    def operator(z: np.ndarray) -> np.ndarray:
        x, rho, omega = z[:d], z[d:2 * d], z[2 * d:]
        gx, grho, gomega = mesp_gradients(inst, x, rho, omega)
        return np.concatenate([gx, -grho, -gomega])

    return VIProblem(dim=3 * d, operator=operator,
                     set=Product((CappedSimplex(d, inst.s), FullSpace(d), FullSpace(d))),
                     name=f"mesp(d={d},s={inst.s},seed={inst.seed})")


def make_mesp_instance(d: int, s: int, seed: int = 0) -> MespInstance:
    """Synthetic well-conditioned PSD covariance: C = G^T G / d + 1e-3 I."""
    if not 1 <= s <= d:
        raise InvalidCardinality(f"subset size s={s} outside 1..{d}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((d, d))
    C = G.T @ G / d + 1e-3 * np.eye(d)
    return MespInstance(C=0.5 * (C + C.T), s=int(s), seed=seed)


def make_mesp(d: int, s: int, seed: int = 0) -> VIProblem:
    return mesp_operator(make_mesp_instance(d, s, seed))


# ---------------------------------------------------------------------------
# Finite-difference oracle (tests)


def finite_difference_gradient(phi: Callable[[np.ndarray], float], z: np.ndarray,
                               h: float = 1e-6) -> np.ndarray:
    """Central differences [phi(z + h e_i) - phi(z - h e_i)] / (2h)."""
    if not h > 0:
        raise ValueError("h must be positive")
    z = np.asarray(z, dtype=np.float64)
    g = np.empty(z.size)
    for i in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[i] += h
        zm[i] -= h
        g[i] = (phi(zp) - phi(zm)) / (2.0 * h)
    return g


# ---------------------------------------------------------------------------
# Dense-matrix text files: first line "d" (games) or "d s" (subset
# selection), then d rows of d whitespace-separated decimals.


def _load_dense(path) -> tuple[list[int], np.ndarray]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    header = [int(tok) for tok in lines[0].split()]
    d = header[0]
    if len(lines) != d + 1:
        raise ValueError(f"{path}: expected {d} matrix rows, found {len(lines) - 1}")
    rows = [np.fromstring(ln, sep=" ") for ln in lines[1:]]
    A = np.vstack(rows)
    if A.shape != (d, d):
        raise ValueError(f"{path}: matrix is not {d}x{d}")
    return header, A


def load_matrix_game(path) -> VIProblem:
    header, A = _load_dense(path)
    return matrix_game_problem(A, name=f"matrix_game({Path(path).name})")


def load_mesp(path) -> VIProblem:
    header, C = _load_dense(path)
    if len(header) < 2:
        raise ValueError(f"{path}: header must contain 'd s'")
    inst = MespInstance(C=0.5 * (C + C.T), s=int(header[1]), seed=0)
    return mesp_operator(inst)


def save_dense(path, A: np.ndarray, s: int | None = None) -> None:
    A = np.asarray(A, dtype=np.float64)
    header = f"{A.shape[0]}" if s is None else f"{A.shape[0]} {s}"
    body = "\n".join(" ".join(f"{v:.17g}" for v in row) for row in A)
    Path(path).write_text(header + "\n" + body + "\n")
