"""Risk-limiting audits of multiple overlapping races from one batch sample.

The package audits every race at once by scoring each audited batch with
its maximum across-race relative overstatement (MARROP), sampling batches
in proportion to the worst error they could hide (PPEB), and driving a
Kaplan-Markov sequential P-value that certifies all reported outcomes
together the moment it falls below the risk limit.
"""

from .bounds import (
    BatchDiscrepancy,
    ErrorBoundTable,
    batch_discrepancy,
    batch_error_bound,
    batch_marrop,
    relative_overstatement,
    taint,
    total_error_bound,
    total_marrop,
)
from .election import (
    BatchSpec,
    ElectionSpec,
    HandCount,
    RaceSpec,
    validate_election,
    validate_hand_count,
)
from .errors import (
    AllBoundsZero,
    AlreadyTerminal,
    AuditError,
    BoundNotAboveOne,
    BudgetInfeasible,
    CandidateCapExceeded,
    CorruptDocument,
    DuplicateId,
    HandCountBatchMismatch,
    InvalidRiskLimit,
    MarginNotPositive,
    MissingBatches,
    NotSameRace,
    NotWinnerLoserPair,
    ParseError,
    RaceAbsentEverywhere,
    SchemaVersionMismatch,
    TaintAboveOne,
    TieAtBoundary,
    Unattainable,
    UnknownReference,
    ValidationError,
    WrongBatch,
    ZeroBoundBatch,
)
from .fixtures import cartoon_dir, cartoon_election
from .io_formats import (
    ElectionFileSet,
    decision_line,
    load_election,
    load_hand_counts_csv,
    load_session,
    save_election,
    save_session,
    session_report_dict,
    session_report_text,
    write_session,
)
from .kaplan_markov import (
    AWAITING_COUNTS,
    CERTIFIABLE,
    ESCALATE_FULL_COUNT,
    EXHAUSTED,
    AuditSession,
    HandCountInvalid,
    TaintRecord,
    km_factors,
    km_pvalue,
    km_pvalue_history,
    open_session,
)
from .planner import (
    ZERO_HYPOTHESIS,
    PlanRow,
    PlanTable,
    TaintHypothesis,
    compare_plans,
    fwer_split,
    minimal_draws,
    plan_or_certify,
)
from .sampling import (
    DrawSequence,
    WorkloadExpectation,
    expected_ballots,
    expected_combined_independent,
    expected_distinct_batches,
    expected_votes,
    inclusion_probability,
    ppeb_draw,
)
from .simulator import (
    OutcomeReport,
    SimulationReport,
    TrueTallySet,
    outcome_oracle,
    plant_errors,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "AWAITING_COUNTS",
    "AllBoundsZero",
    "AlreadyTerminal",
    "AuditError",
    "AuditSession",
    "BatchDiscrepancy",
    "BatchSpec",
    "BoundNotAboveOne",
    "BudgetInfeasible",
    "CERTIFIABLE",
    "CandidateCapExceeded",
    "CorruptDocument",
    "DrawSequence",
    "DuplicateId",
    "ESCALATE_FULL_COUNT",
    "EXHAUSTED",
    "ElectionFileSet",
    "ElectionSpec",
    "ErrorBoundTable",
    "HandCount",
    "HandCountBatchMismatch",
    "HandCountInvalid",
    "InvalidRiskLimit",
    "MarginNotPositive",
    "MissingBatches",
    "NotSameRace",
    "NotWinnerLoserPair",
    "OutcomeReport",
    "ParseError",
    "PlanRow",
    "PlanTable",
    "RaceAbsentEverywhere",
    "RaceSpec",
    "SchemaVersionMismatch",
    "SimulationReport",
    "TaintAboveOne",
    "TaintHypothesis",
    "TaintRecord",
    "TieAtBoundary",
    "TrueTallySet",
    "Unattainable",
    "UnknownReference",
    "ValidationError",
    "WorkloadExpectation",
    "WrongBatch",
    "ZERO_HYPOTHESIS",
    "ZeroBoundBatch",
    "batch_discrepancy",
    "batch_error_bound",
    "batch_marrop",
    "cartoon_dir",
    "cartoon_election",
    "compare_plans",
    "decision_line",
    "expected_ballots",
    "expected_combined_independent",
    "expected_distinct_batches",
    "expected_votes",
    "fwer_split",
    "inclusion_probability",
    "km_factors",
    "km_pvalue",
    "km_pvalue_history",
    "load_election",
    "load_hand_counts_csv",
    "load_session",
    "minimal_draws",
    "open_session",
    "outcome_oracle",
    "plan_or_certify",
    "plant_errors",
    "ppeb_draw",
    "relative_overstatement",
    "save_election",
    "save_session",
    "session_report_dict",
    "session_report_text",
    "simulate",
    "taint",
    "total_error_bound",
    "total_marrop",
    "validate_election",
    "validate_hand_count",
    "write_session",
]
