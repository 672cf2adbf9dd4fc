"""Parameter-free extragradient solvers for constrained monotone
variational inequalities, with projection oracles, convergence metrics,
benchmark problem families and a deterministic experiment harness."""

from .core import (
    Algorithm,
    BacktrackLimit,
    Box,
    CappedSimplex,
    ConfigError,
    DimensionMismatch,
    DimensionTooLarge,
    EmptyTrace,
    EvalCounter,
    ExtragradError,
    FeasibleSet,
    FullSpace,
    InfeasibleInput,
    InvalidCardinality,
    IterationRecord,
    LambdaSchedule,
    LossOverflow,
    NonfiniteOutput,
    NonpositiveStepsize,
    Product,
    Simplex,
    SingularMatrix,
    SolveResult,
    SolverConfig,
    StationaryIterate,
    StopReason,
    VIProblem,
    check_feasible,
    evaluate_operator,
)
from .metrics import (
    ResidualSnapshot,
    extragradient_residual,
    matrix_game_gap,
    natural_residual,
    projection_residual,
    residual_snapshot,
    tangent_residual,
)
from .projections import (
    brute_force_projection_oracle,
    project,
    project_capped_simplex,
    project_simplex,
    sample_feasible,
)
from .solvers import (
    StepOutcome,
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
from . import problems
from .harness import ExperimentConfig, parse_config, read_trace, run_experiment

__version__ = "0.1.0"
