"""Solver workbench for coalition values of symmetric zero-sum games.

Three values are attached to a symmetric multiplayer zero-sum game, all
from player 1's perspective: the Nash value (zero by symmetry), the
synchronous coalition value where the opponents coordinate through one
joint distribution, and the asynchronous value where they agree on
individual mixed strategies but randomize independently. The package
computes all three for dense 3-player payoff tensors, carries exact
benchmark families with known values, an analytic treatment of
continuous 3-player Guts poker, smoothed-surrogate optimizers,
fictitious-play dynamics, and campaign harnesses over random games.
"""

from .benchmarks import (
    BenchmarkSolution,
    all_benchmark_games,
    classify_222,
    family_222_tensor,
    odd_man_tensor,
    odds_evens,
    omo_expected_returns,
    recursive_toy_2x2,
    rps,
)
from .engine import (
    SolveOutcome,
    SolverConfig,
    exact_maximin_value,
    exact_minimax_value,
    maximin_objective,
    minimax_objective,
    solve_matrix_game,
    solve_maximin,
    solve_minimax,
)
from .experiments import (
    CampaignConfig,
    GapCampaignResult,
    GapSample,
    ValueGapRow,
    read_samples_csv,
    report_to_json,
    run_gap_campaign,
    solve_game,
    summarize_value_gaps,
    value_gap_benchmark,
    write_histogram_csv,
    write_samples_csv,
)
from .fictitious import (
    FpTrace,
    JointFpBatch,
    fp_2player,
    joint_fp,
    joint_fp_trials,
    parse_theta,
    sync_fp,
    sync_matrix,
    verify_joint_nash,
)
from .games import (
    PayoffMatrix2,
    PayoffTensor3,
    StrategySimplex,
    SymmetryReport,
    ValueReport,
    best_pure_response_p1,
    coalition_pair_payoffs,
    expected_payoff,
    load_tensor,
    negative_transpose,
    player1_pure_payoffs,
    project_to_simplex,
    random_symmetric_tensor,
    save_tensor,
    uniform_simplex_sample,
    validate_symmetry,
    worst_pure_pair,
)
from .guts import (
    AsyncCertificate,
    BestResponse,
    CoalitionMixture,
    GutsPoint,
    RecursiveTrace,
    SyncValue,
    alpha,
    async_certificate,
    best_response,
    beta,
    discretize_guts,
    grad_alpha,
    gradient_bound,
    optimal_coalition_mixture,
    recursive_fixed_point,
    response_curve,
    sync_value,
)
from .smoothing import (
    SmoothingSpec,
    smooth_max,
    smooth_max_grad,
    smooth_min,
    smooth_min_grad,
)

__all__ = [
    "AsyncCertificate",
    "BenchmarkSolution",
    "BestResponse",
    "CampaignConfig",
    "CoalitionMixture",
    "FpTrace",
    "GapCampaignResult",
    "GapSample",
    "GutsPoint",
    "JointFpBatch",
    "PayoffMatrix2",
    "PayoffTensor3",
    "RecursiveTrace",
    "SmoothingSpec",
    "SolveOutcome",
    "SolverConfig",
    "StrategySimplex",
    "SymmetryReport",
    "SyncValue",
    "ValueGapRow",
    "ValueReport",
    "all_benchmark_games",
    "alpha",
    "async_certificate",
    "best_pure_response_p1",
    "best_response",
    "beta",
    "classify_222",
    "coalition_pair_payoffs",
    "discretize_guts",
    "exact_maximin_value",
    "exact_minimax_value",
    "expected_payoff",
    "family_222_tensor",
    "fp_2player",
    "grad_alpha",
    "gradient_bound",
    "joint_fp",
    "joint_fp_trials",
    "load_tensor",
    "maximin_objective",
    "minimax_objective",
    "negative_transpose",
    "odd_man_tensor",
    "odds_evens",
    "omo_expected_returns",
    "optimal_coalition_mixture",
    "parse_theta",
    "player1_pure_payoffs",
    "project_to_simplex",
    "random_symmetric_tensor",
    "read_samples_csv",
    "recursive_fixed_point",
    "recursive_toy_2x2",
    "report_to_json",
    "response_curve",
    "rps",
    "run_gap_campaign",
    "save_tensor",
    "smooth_max",
    "smooth_max_grad",
    "smooth_min",
    "smooth_min_grad",
    "solve_game",
    "solve_matrix_game",
    "solve_maximin",
    "solve_minimax",
    "summarize_value_gaps",
    "sync_fp",
    "sync_matrix",
    "sync_value",
    "uniform_simplex_sample",
    "validate_symmetry",
    "value_gap_benchmark",
    "verify_joint_nash",
    "write_histogram_csv",
    "write_samples_csv",
]
