"""Exception taxonomy for the audit engine.

Every domain failure raises an AuditError subclass so callers (CLI, API)
can separate bad input from bugs. Validation problems with the election
definition itself are ValidationError; problems with audit state or
arithmetic preconditions get their own leaf classes.
"""


class AuditError(Exception):
    """Base class for every anticipated domain failure."""


class ValidationError(AuditError):
    """An election definition or hand count violates a structural rule."""


class DuplicateId(ValidationError):
    """A race, candidate, or batch identifier occurs more than once."""


class UnknownReference(ValidationError):
    """An identifier refers to a race, candidate, or batch that does not exist."""


class CandidateCapExceeded(ValidationError):
    """Reported or hand-counted votes exceed a ballot cap."""


class RaceAbsentEverywhere(ValidationError):
    """A declared race appears on no batch."""


class MarginNotPositive(ValidationError):
    """A winner does not strictly beat a loser in the reported totals."""


class TieAtBoundary(MarginNotPositive):
    """The decisive winner/loser boundary of a race is a tie."""


class NotSameRace(AuditError):
    """A candidate pair spans two different races."""


class NotWinnerLoserPair(AuditError):
    """A candidate pair is not (reported winner, reported loser) of its race."""


class HandCountBatchMismatch(AuditError):
    """A hand count's batch does not match the batch being scored."""


class MissingBatches(AuditError):
    """A whole-election computation was given hand counts for only some batches."""


class ZeroBoundBatch(AuditError):
    """Taint is undefined: the batch has an error bound of zero."""


class AllBoundsZero(AuditError):
    """No batch has positive error bound, so sampling weights are undefined."""


class BoundNotAboveOne(AuditError):
    """The sequential test needs a total error bound strictly above 1."""


class TaintAboveOne(AuditError):
    """An observed taint exceeds 1, outside the test's domain."""


class InvalidRiskLimit(AuditError):
    """Risk limit must lie strictly between 0 and 1."""


class WrongBatch(AuditError):
    """A hand count was recorded for a batch other than the next pending draw."""


class AlreadyTerminal(AuditError):
    """The session has already reached a terminal status."""


class Unattainable(AuditError):
    """No draw count up to the scan ceiling meets the risk target."""


class BudgetInfeasible(AuditError):
    """The requested error budget cannot be planted within the ballot caps."""


class ParseError(AuditError):
    """A delimited input file is malformed.

    Attributes
    ----------
    line : int or None
        1-based line number of the offending record, when known.
    column : str or None
        Field name of the offending value, when known.
    """

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaVersionMismatch(AuditError):
    """A persisted document was written by an incompatible schema version."""


class CorruptDocument(AuditError):
    """A persisted document is missing required structure."""
