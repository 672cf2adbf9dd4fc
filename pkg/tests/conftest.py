"""Shared test problems with analytically known solutions."""

from __future__ import annotations

import numpy as np
import pytest

from extragrad import Box, FullSpace, VIProblem
from extragrad.problems import matrix_game_problem


def box_qp_problem(a, lo, hi) -> VIProblem:
    """F(z) = z - a on a box; the VI solution is clamp(a)."""
    a = np.asarray(a, dtype=np.float64)
    box = Box(lo, hi, d=a.size)
    sol = np.clip(a, box.lo, box.hi)
    return VIProblem(dim=a.size, operator=lambda z: z - a, set=box,
                     known_solution=sol, lipschitz=1.0, name="box_qp")


def affine_saddle_problem(d: int, seed: int = 0) -> VIProblem:
    """F(z) = M z + q with M = PSD + skew and q chosen so that a fixed
    interior point solves the VI (F vanishes there)."""
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((d, d)) / np.sqrt(d)
    K = rng.standard_normal((d, d))
    M = B.T @ B + (K - K.T)
    z_star = rng.standard_normal(d)
    q = -M @ z_star
    lip = float(np.linalg.svd(M, compute_uv=False)[0])
    return VIProblem(dim=d, operator=lambda z: M @ z + q, set=FullSpace(d),
                     known_solution=z_star, lipschitz=lip, name="affine_saddle")


def identity_game_problem(d: int) -> VIProblem:
    """Bilinear game with identity payoff; the uniform strategies are the
    equilibrium (the gap vanishes there)."""
    prob = matrix_game_problem(np.eye(d), name="identity_game")
    sol = np.full(2 * d, 1.0 / d)
    return VIProblem(dim=prob.dim, operator=prob.operator, set=prob.set,
                     gap_oracle=prob.gap_oracle, known_solution=sol,
                     lipschitz=prob.lipschitz, name=prob.name)


def skew_game_problem() -> VIProblem:
    """A = [[0,1],[-1,0]]; the equilibrium is x* = y* = (0, 1)."""
    prob = matrix_game_problem(np.array([[0.0, 1.0], [-1.0, 0.0]]), name="skew_game")
    sol = np.array([0.0, 1.0, 0.0, 1.0])
    return VIProblem(dim=prob.dim, operator=prob.operator, set=prob.set,
                     gap_oracle=prob.gap_oracle, known_solution=sol,
                     lipschitz=prob.lipschitz, name=prob.name)


@pytest.fixture(scope="session")
def known_solution_problems():
    """(problem, start point) pairs; the start is never the solution
    (the uniform default would solve the identity game outright)."""
    return [
        (box_qp_problem(np.array([2.0, -3.0, 0.25, 0.75]), -1.0, 1.0), None),
        (affine_saddle_problem(6, seed=3), None),
        (identity_game_problem(3), np.array([0.7, 0.2, 0.1, 0.1, 0.3, 0.6])),
        (skew_game_problem(), None),
    ]
