import numpy as np
import pytest

from extragrad import (
    Algorithm,
    BacktrackLimit,
    Box,
    EmptyTrace,
    FullSpace,
    LambdaSchedule,
    NonpositiveStepsize,
    SolverConfig,
    StationaryIterate,
    StopReason,
    VIProblem,
    adaptive_stepsize,
    ergodic_average,
    extragradient_step,
    lipschitz_estimates,
    solve,
    solve_eg_fixed,
    solve_pf_ne_eg,
    solve_pf_ne_eg_adabt,
    solve_pf_ne_eg_bt,
)
from conftest import affine_saddle_problem, box_qp_problem, identity_game_problem, skew_game_problem


def scalar_problem():
    return VIProblem(dim=1, operator=lambda z: z.copy(), set=FullSpace(1))


def constant_problem(c):
    vec = np.atleast_1d(np.asarray(c, dtype=float))
    return VIProblem(dim=vec.size, operator=lambda z: vec.copy(), set=FullSpace(vec.size))


# ---------------------------------------------------------------------------
# extragradient_step / lipschitz_estimates / adaptive_stepsize


def test_step_constant_operator():
    prob = constant_problem([2.0, -1.0])
    z = np.array([0.0, 0.0])
    out = extragradient_step(prob, z, 0.25)
    np.testing.assert_allclose(out.w, [-0.5, 0.25], atol=0)
    np.testing.assert_allclose(out.z_next, [-0.5, 0.25], atol=0)
    assert out.L_t == 0.0 and out.hatL_t == 0.0
    assert not out.stationary


def test_step_scalar_hand_values():
    out = extragradient_step(scalar_problem(), np.array([1.0]), 0.5)
    np.testing.assert_allclose(out.w, [0.5], atol=0)
    np.testing.assert_allclose(out.z_next, [0.75], atol=0)
    assert abs(out.L_t - 1.0) < 1e-12
    assert abs(out.hatL_t - 1.0) < 1e-12


def test_step_signals_stationarity_at_solution():
    prob = constant_problem([0.0])
    out = extragradient_step(prob, np.array([3.0]), 0.5)
    assert out.stationary
    np.testing.assert_array_equal(out.z_next, [3.0])


def test_step_rejects_nonpositive_stepsize():
    with pytest.raises(NonpositiveStepsize):
        extragradient_step(scalar_problem(), np.array([1.0]), 0.0)


def test_lipschitz_estimates_hand_values():
    D = np.array([[2.0, 0.0], [0.0, 5.0]])
    z = np.zeros(2)
    w = np.array([1.0, 0.0])
    z_next = np.array([1.0, 0.0])
    L, hatL = lipschitz_estimates(D @ z, D @ w, D @ z_next, z, w, z_next, 1e-14)
    assert L == 2.0
    assert hatL == 0.0  # w == z_next triggers the 0/0 convention


def test_lipschitz_estimates_stationary_raises():
    z = np.ones(2)
    with pytest.raises(StationaryIterate):
        lipschitz_estimates(z, z, z, z, z.copy(), z, 1e-14)


def test_lipschitz_estimates_bounded_by_global_constant():
    prob = affine_saddle_problem(5, seed=1)
    L = prob.lipschitz
    rng = np.random.default_rng(0)
    for _ in range(100):
        z = rng.standard_normal(5)
        out = extragradient_step(prob, z, 0.3)
        assert out.L_t <= L + 1e-9
        assert out.hatL_t <= L + 1e-9


def test_adaptive_stepsize_arithmetic():
    assert adaptive_stepsize(0.5, 1.0, 3.0, 2.0, 0.9) == pytest.approx(0.3)
    assert adaptive_stepsize(0.5, 1.2, 0.0, 0.0, 0.9) == pytest.approx(0.6)
    assert adaptive_stepsize(0.1, 1.5, 1.0, 1.0, 0.9) == pytest.approx(0.15)


# ---------------------------------------------------------------------------
# Solver loops


def test_pf_ne_eg_matches_scalar_recursion():
    """With lambda = 1 and eta0 below theta/L the stepsize never moves, so
    z_{t+1} = (1 - eta + eta^2) z_t exactly."""
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG, eta0=0.5, theta=0.9,
                       lambda_schedule=LambdaSchedule.CONSTANT_ONE,
                       max_iter=30, residual_tol=0.0)
    res = solve(scalar_problem(), cfg, z0=np.array([1.0]))

    z_ref, factor = 1.0, 1.0 - 0.5 + 0.25
    for rec in res.trace:
        z_ref *= factor
        assert rec.eta == 0.5
    assert res.final_point[0] == pytest.approx(z_ref, rel=1e-12)
    # the residual decreases monotonically on this problem
    egs = [r.eg_residual for r in res.trace]
    assert all(b < a for a, b in zip(egs, egs[1:]))


def test_eg_fixed_contraction_factor():
    cfg = SolverConfig(algorithm=Algorithm.EG_FIXED, eta0=0.9, max_iter=10,
                       residual_tol=0.0)
    res = solve_eg_fixed(scalar_problem(), cfg, z0=np.array([1.0]))
    z_ref = 1.0
    for _ in res.trace:
        z_ref *= 1.0 - 0.9 + 0.81
    assert res.final_point[0] == pytest.approx(z_ref, rel=1e-12)


def test_zero_operator_stationary_immediately():
    cfg = SolverConfig(algorithm=Algorithm.EG_FIXED, eta0=0.5, max_iter=10)
    res = solve(constant_problem([0.0, 0.0]), cfg, z0=np.array([1.0, 2.0]))
    assert res.stop_reason is StopReason.STATIONARY_POINT
    assert res.iterations == 0
    np.testing.assert_array_equal(res.final_point, [1.0, 2.0])


def test_stationary_start_all_algorithms():
    prob = box_qp_problem(np.array([2.0, -3.0]), -1.0, 1.0)
    z_star = prob.known_solution
    for alg in Algorithm:
        cfg = SolverConfig(algorithm=alg, eta0=0.5, max_iter=10)
        res = solve(prob, cfg, z0=z_star)
        assert res.stop_reason is StopReason.STATIONARY_POINT
        np.testing.assert_allclose(res.final_point, z_star, atol=1e-12)


def test_wrappers_enforce_algorithm():
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG)
    with pytest.raises(ValueError):
        solve_eg_fixed(scalar_problem(), cfg)
    with pytest.raises(ValueError):
        solve_pf_ne_eg_adabt(scalar_problem(), cfg)


def test_solver_determinism_bitwise():
    prob = identity_game_problem(4)
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG_ADABT, eta0=0.5, max_iter=200,
                       residual_tol=0.0, seed=123)
    a = solve(prob, cfg, record=("gap",))
    b = solve(prob, cfg, record=("gap",))
    assert len(a.trace) == len(b.trace)
    for ra, rb in zip(a.trace, b.trace):
        assert ra.eta == rb.eta
        assert ra.eg_residual == rb.eg_residual
        assert ra.gap == rb.gap
    np.testing.assert_array_equal(a.final_point, b.final_point)


def test_bt_without_trick_has_nonincreasing_stepsizes():
    prob = affine_saddle_problem(6, seed=5)
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG_BT, eta0=1.0, max_iter=300,
                       residual_tol=0.0, bt_increase_trick=False)
    res = solve_pf_ne_eg_bt(prob, cfg)
    etas = [r.eta for r in res.trace]
    assert all(b <= a for a, b in zip(etas, etas[1:]))


def test_bt_lipschitz_safe_start_keeps_eta0_and_never_fails():
    prob = affine_saddle_problem(6, seed=7)
    eta0 = 0.9 / prob.lipschitz
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG_BT, eta0=eta0, max_iter=300,
                       residual_tol=0.0, bt_increase_trick=False)
    res = solve_pf_ne_eg_bt(prob, cfg)
    assert all(r.eta == eta0 for r in res.trace)
    assert all(r.backtrack_failures == 0 for r in res.trace)


def test_adabt_no_failures_when_safely_initialized():
    """With lambda = 1 and eta0 <= theta/L the trial stepsize stays below
    theta/L, so the first condition holds at every first trial."""
    prob = affine_saddle_problem(5, seed=9)
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG_ADABT, eta0=0.9 / prob.lipschitz,
                       lambda_schedule=LambdaSchedule.CONSTANT_ONE,
                       max_iter=300, residual_tol=0.0)
    res = solve_pf_ne_eg_adabt(prob, cfg)
    assert all(r.backtrack_failures == 0 for r in res.trace)


def test_lambda_schedule_raises_stepsize_above_eta0():
    prob = affine_saddle_problem(5, seed=13)
    eta0 = 0.01 * 0.9 / prob.lipschitz  # deliberately poor initialization
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG, eta0=eta0, max_iter=500,
                       residual_tol=0.0)
    res = solve_pf_ne_eg(prob, cfg)
    assert max(r.eta for r in res.trace) > eta0


def test_backtrack_limit_on_jump_discontinuity():
    """A monotone operator with a large jump at the start point: the ratio
    eta*L_t(eta) tends to J/(J+1) > (theta+1)/2, so no stepsize passes."""

    def op(z):
        return z + 30.0 * (z >= 1.0)

    prob = VIProblem(dim=1, operator=op, set=FullSpace(1))
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG_ADABT, eta0=0.5, max_iter=5)
    with pytest.raises(BacktrackLimit):
        solve(prob, cfg, z0=np.array([1.0]))


# ---------------------------------------------------------------------------
# Lemma-level invariants on runs with known solutions


def _start_point(prob, z0):
    from extragrad import project
    return project(prob.set, np.zeros(prob.dim)) if z0 is None else np.asarray(z0)


def _run(prob, alg, z0=None, **kw):
    cfg = SolverConfig(algorithm=alg, eta0=kw.pop("eta0", 0.5),
                       max_iter=kw.pop("max_iter", 400), residual_tol=0.0, **kw)
    return solve(prob, cfg, z0=z0, record=("dist",))


@pytest.mark.parametrize("alg", [Algorithm.PF_NE_EG_BT, Algorithm.PF_NE_EG_ADABT])
def test_fejer_monotone_distance(known_solution_problems, alg):
    for prob, z0 in known_solution_problems:
        res = _run(prob, alg, z0)
        prev = float(np.linalg.norm(_start_point(prob, z0) - prob.known_solution))
        assert res.trace, prob.name
        for rec in res.trace:
            assert rec.dist_to_solution <= prev + 1e-10, f"{prob.name} t={rec.t}"
            prev = rec.dist_to_solution


@pytest.mark.parametrize("alg", [Algorithm.PF_NE_EG_BT, Algorithm.PF_NE_EG_ADABT])
def test_eg_residual_nonincreasing_backtracking(known_solution_problems, alg):
    for prob, z0 in known_solution_problems:
        res = _run(prob, alg, z0)
        egs = [r.eg_residual for r in res.trace]
        for a, b in zip(egs, egs[1:]):
            assert b <= a + 1e-10, prob.name


def test_eg_residual_nonincreasing_pf_after_onset(known_solution_problems):
    """For the adaptive variant the non-increase lemma applies at steps where
    eta_t * hatL_t <= 1; assert it from the first such step onward."""
    for prob, z0 in known_solution_problems:
        res = _run(prob, Algorithm.PF_NE_EG, z0)
        trace = res.trace
        onset = next((i for i, r in enumerate(trace) if r.eta * r.hatL_t <= 1.0), None)
        assert onset is not None, prob.name
        for i in range(onset + 1, len(trace)):
            if trace[i].eta * trace[i].hatL_t <= 1.0:
                assert trace[i].eg_residual <= trace[i - 1].eg_residual + 1e-10, \
                    f"{prob.name} t={trace[i].t}"


@pytest.mark.parametrize("alg", [Algorithm.PF_NE_EG_BT, Algorithm.PF_NE_EG_ADABT])
def test_telescoped_energy_bound(known_solution_problems, alg):
    theta = 0.9
    for prob, z0 in known_solution_problems:
        res = _run(prob, alg, z0)
        d0 = float(np.linalg.norm(_start_point(prob, z0) - prob.known_solution))
        total = sum((r.eta * r.eg_residual) ** 2 for r in res.trace)
        bound = (6.0 + (theta + 1.0) ** 2) / (1.0 - theta) * d0 ** 2
        assert total <= bound + 1e-6, prob.name


def test_stepsize_floor_pf_on_lipschitz_problem():
    prob = affine_saddle_problem(6, seed=21)
    for eta0 in (0.01, 0.5, 5.0):
        cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG, eta0=eta0, max_iter=400,
                           residual_tol=0.0)
        res = solve(prob, cfg)
        floor = min(eta0, 0.9 / prob.lipschitz)
        assert min(r.eta for r in res.trace) >= floor - 1e-12
        assert min(r.eta for r in res.trace) > 0.0


# ---------------------------------------------------------------------------
# Ergodic averaging


def test_ergodic_average_examples():
    one = [np.array([2.0, 3.0])]
    np.testing.assert_array_equal(ergodic_average(one), [2.0, 3.0])

    two = [np.array([0.0]), np.array([2.0])]
    np.testing.assert_array_equal(ergodic_average(two), [1.0])

    np.testing.assert_allclose(
        ergodic_average(two, "stepsize_weighted", [0.3, 0.3]),
        ergodic_average(two), atol=1e-15)

    np.testing.assert_allclose(
        ergodic_average(two, "stepsize_weighted", [1.0, 3.0]), [1.5], atol=1e-15)

    with pytest.raises(EmptyTrace):
        ergodic_average([])
    with pytest.raises(ValueError):
        ergodic_average(two, "stepsize_weighted")


def test_solver_populates_ergodic_point():
    prob = identity_game_problem(3)
    cfg = SolverConfig(algorithm=Algorithm.EG_FIXED, eta0=0.2, max_iter=100,
                       residual_tol=0.0)
    res = solve(prob, cfg, z0=np.array([0.7, 0.2, 0.1, 0.1, 0.3, 0.6]))
    assert res.ergodic_point is not None
    # averages of simplex-feasible look-ahead points stay feasible
    from extragrad import check_feasible
    assert check_feasible(prob.set, res.ergodic_point, 1e-9)


def test_operator_eval_budget_pf():
    """Two fresh evaluations per iteration plus the initial one."""
    prob = affine_saddle_problem(4, seed=2)
    cfg = SolverConfig(algorithm=Algorithm.PF_NE_EG, eta0=0.2, max_iter=50,
                       residual_tol=0.0)
    res = solve(prob, cfg)
    assert res.operator_evals == 1 + 2 * len(res.trace)
