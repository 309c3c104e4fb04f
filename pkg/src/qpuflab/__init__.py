"""Numerical laboratory for unforgeability of unitary challenge-response devices.

Exact statevector simulation of Haar-random unitary devices, the
sample-based emulation attack against them, equality testing, and
game-based (existential / selective) unforgeability experiments, plus a
Monte Carlo audit battery for every quantitative law the laboratory relies
on.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    BudgetRefusal,
    DimensionCapExceeded,
    DimensionMismatch,
    InvalidQuantumObject,
    MuViolation,
    PostSelectionFailure,
    PreconditionViolation,
    PrivilegeRequired,
    QpufLabError,
)
from .numerics import (
    CONSTRUCTION_TOL,
    DERIVED_TOL,
    RANK_TOL,
    DensityMatrix,
    Projector,
    StateVector,
    UnitaryMatrix,
    apply,
    fidelity_mixed,
    fidelity_pure,
    haar_state,
    haar_unitary,
    max_dim,
    partial_trace,
    span_projector,
    sqrt_fidelity_mixed,
    tensor,
    trace_distance,
)
from .qpuf import (
    Depolarizing,
    EpsilonDisturbedChannel,
    MaximallyMixedReplacer,
    QPufGenParams,
    QPufInstance,
    RequirementThresholds,
    channel_apply,
    check_collision,
    check_robustness,
    from_json,
    qeval,
    qgen,
    to_json,
    uniqueness_distance,
)
from .emulator import (
    INPUT_LABEL,
    ClosedFormTerm,
    QeConfig,
    QeRunResult,
    block_unitary,
    closed_form_state,
    controlled_reflection,
    reflection,
    run_full,
    run_stage1,
    stage1_closed_form,
)
from .testers import (
    IDEAL,
    SWAP,
    TestConfig,
    TestOutcome,
    expected_acceptance,
    run_test,
    swap_test_once,
    swap_test_pass_prob,
    worst_case_error,
)
from .games import (
    QEX,
    QSEL,
    AdversaryInterface,
    GameConfig,
    SealedOracle,
    Transcript,
    WinRateEstimate,
    estimate_win_rate,
    mu_check,
    run_game,
    transcript_record,
)
from .adversaries import (
    ForgerPlan,
    ForgeryReport,
    PrivilegedReadout,
    QeForger,
    RandomGuesser,
    SubspaceAdversary,
    SubspaceKnowledge,
    TomographyAdversary,
    default_mu_margin,
    forgery_fidelity_bound,
    make_forger_plan,
    run_forgery,
    subspace_adversary,
    tomography_adversary,
)
from .verify import (
    CheckReport,
    closed_form_check,
    distance_contraction_check,
    fidelity_disturbance_check,
    haar_subspace_weight_check,
    joint_concavity_check,
    negative_control_check,
    orthogonal_challenge_check,
    pure_state_distance_bound,
    recovery_floor_check,
    run_all_checks,
    swap_statistics_check,
)

__all__ = [
    "__version__",
    # errors
    "QpufLabError",
    "DimensionMismatch",
    "DimensionCapExceeded",
    "InvalidQuantumObject",
    "PreconditionViolation",
    "PostSelectionFailure",
    "MuViolation",
    "BudgetExceeded",
    "BudgetRefusal",
    "PrivilegeRequired",
    # numerics
    "CONSTRUCTION_TOL",
    "DERIVED_TOL",
    "RANK_TOL",
    "StateVector",
    "DensityMatrix",
    "UnitaryMatrix",
    "Projector",
    "tensor",
    "apply",
    "fidelity_pure",
    "fidelity_mixed",
    "sqrt_fidelity_mixed",
    "trace_distance",
    "partial_trace",
    "span_projector",
    "haar_state",
    "haar_unitary",
    "max_dim",
    # device model
    "QPufGenParams",
    "QPufInstance",
    "RequirementThresholds",
    "MaximallyMixedReplacer",
    "Depolarizing",
    "EpsilonDisturbedChannel",
    "qgen",
    "qeval",
    "channel_apply",
    "check_robustness",
    "check_collision",
    "uniqueness_distance",
    "to_json",
    "from_json",
    # emulation circuit
    "INPUT_LABEL",
    "QeConfig",
    "QeRunResult",
    "ClosedFormTerm",
    "reflection",
    "controlled_reflection",
    "block_unitary",
    "run_stage1",
    "stage1_closed_form",
    "closed_form_state",
    "run_full",
    # equality tests
    "SWAP",
    "IDEAL",
    "TestConfig",
    "TestOutcome",
    "swap_test_pass_prob",
    "swap_test_once",
    "expected_acceptance",
    "worst_case_error",
    "run_test",
    # games
    "QEX",
    "QSEL",
    "AdversaryInterface",
    "SealedOracle",
    "GameConfig",
    "Transcript",
    "WinRateEstimate",
    "mu_check",
    "run_game",
    "estimate_win_rate",
    "transcript_record",
    # adversaries
    "ForgerPlan",
    "ForgeryReport",
    "QeForger",
    "RandomGuesser",
    "SubspaceKnowledge",
    "SubspaceAdversary",
    "subspace_adversary",
    "PrivilegedReadout",
    "TomographyAdversary",
    "tomography_adversary",
    "default_mu_margin",
    "make_forger_plan",
    "forgery_fidelity_bound",
    "run_forgery",
    # audits
    "CheckReport",
    "pure_state_distance_bound",
    "haar_subspace_weight_check",
    "recovery_floor_check",
    "closed_form_check",
    "orthogonal_challenge_check",
    "distance_contraction_check",
    "fidelity_disturbance_check",
    "joint_concavity_check",
    "swap_statistics_check",
    "negative_control_check",
    "run_all_checks",
]
