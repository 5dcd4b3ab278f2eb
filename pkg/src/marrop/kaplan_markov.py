"""Kaplan-Markov sequential P-value and the live audit session.

After j PPEB draws with observed taints T_1..T_j, the quantity

    P = min over prefixes j of  prod_{i<=j} (1 - 1/U) / (1 - T_i)

is a valid P-value for the hypothesis "some audited outcome is wrong".
The audit stops and certifies as soon as P drops below the risk limit.
Each factor compares the per-draw evidence against the worst case: zero
taint shrinks the product by (1 - 1/U); a taint equal to 1 makes the
factor infinite, after which the running product can never fall again
and only the pre-existing prefix minimum survives.

AuditSession is the single-writer state machine an audit runs on: open
with a seed and a planned draw count, record hand counts in draw order,
watch P, stop at certifiable, run out at exhausted, or escalate to a
full hand count at any time before certifying.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import ErrorBoundTable, batch_marrop, total_error_bound
from .election import ElectionSpec, HandCount, validate_hand_count
from .errors import (
    AlreadyTerminal,
    BoundNotAboveOne,
    InvalidRiskLimit,
    TaintAboveOne,
    UnknownReference,
    ValidationError,
    WrongBatch,
    ZeroBoundBatch,
)
from .sampling import ppeb_draw

AWAITING_COUNTS = "awaiting-counts"
CERTIFIABLE = "certifiable"
EXHAUSTED = "exhausted"
ESCALATE_FULL_COUNT = "escalate-full-count"

TERMINAL_STATUSES = frozenset({CERTIFIABLE, ESCALATE_FULL_COUNT})


class HandCountInvalid(ValidationError):
    """A recorded hand count failed structural validation."""


def km_factors(taints, total_bound: float) -> np.ndarray:
    """Per-draw factors (1 - 1/U) / (1 - T_i); +inf where T_i = 1."""
    if not total_bound > 1.0:
        raise BoundNotAboveOne(
            f"total error bound must exceed 1 for the sequential test, "
            f"got {total_bound}"
        )
    t = np.asarray(list(taints), dtype=float)
    if t.size and float(t.max()) > 1.0:
        raise TaintAboveOne(f"taint {float(t.max())} exceeds 1")
    shrink = 1.0 - 1.0 / total_bound
    with np.errstate(divide="ignore"):
        return np.where(t == 1.0, np.inf, shrink / (1.0 - t))


def km_pvalue_history(taints, total_bound: float) -> np.ndarray:
    """Running P after each draw: prefix-min of the factor products, capped at 1."""
    factors = km_factors(taints, total_bound)
    products = np.cumprod(factors)
    return np.minimum(1.0, np.minimum.accumulate(products))


def km_pvalue(taints, total_bound: float) -> float:
    """The sequential P-value over a full taint history (1.0 when empty)."""
    history = km_pvalue_history(taints, total_bound)
    return float(history[-1]) if history.size else 1.0


@dataclass(frozen=True)
class TaintRecord:
    """One recorded draw: index (1-based), batch, e_p, u_p, and T_j = e_p/u_p."""

    draw_index: int
    batch_id: str
    observed_marrop: float
    bound: float
    taint: float


class AuditSession:
    """Live audit state: draws, records, current P, and the stop decision.

    Create with :func:`open_session` (from a validated election) or
    :meth:`AuditSession.from_bounds` (from a raw bound table, used by tools
    and tests that need direct control over U). Mutations are
    ``record_batch``, ``generate_draws``, and ``escalate``; everything else
    is a read.

    Status values: awaiting-counts (more hand counts wanted), certifiable
    (P < risk limit; terminal), exhausted (planned draws all recorded with
    P >= risk limit; escalation or a fresh plan required), and
    escalate-full-count (operator abandoned sampling; terminal).

    A total bound below 1 certifies at open: no hand count could produce
    enough error to overturn any audited outcome, so current_p is reported
    as 0.0 with zero draws.
    """

    def __init__(self, *, bounds, risk_limit, seed, planned_draws, draws,
                 spec, records, hand_counts, status, current_p):
        self.bounds = bounds
        self.risk_limit = risk_limit
        self.seed = seed
        self.planned_draws = planned_draws
        self.draws = tuple(draws)
        self.spec = spec
        self.records = list(records)
        self.hand_counts = dict(hand_counts)
        self.status = status
        self.current_p = current_p

    def __eq__(self, other):
        if not isinstance(other, AuditSession):
            return NotImplemented
        # spec intentionally excluded: a reloaded session rebinds its election
        return (
            self.bounds == other.bounds
            and self.risk_limit == other.risk_limit
            and self.seed == other.seed
            and self.planned_draws == other.planned_draws
            and self.draws == other.draws
            and self.records == other.records
            and self.hand_counts == other.hand_counts
            and self.status == other.status
            and self.current_p == other.current_p
        )

    def __repr__(self):
        return (
            f"AuditSession(status={self.status!r}, risk_limit={self.risk_limit}, "
            f"records={len(self.records)}/{self.planned_draws}, "
            f"P={self.current_p!r})"
        )

    @classmethod
    def from_bounds(
        cls,
        bounds: ErrorBoundTable,
        risk_limit: float,
        seed: int | None = None,
        planned_draws: int = 0,
        spec: ElectionSpec | None = None,
    ) -> "AuditSession":
        """Open a session directly on a bound table.

        With ``seed`` given, the PPEB draw sequence is generated immediately;
        otherwise the session waits for :meth:`generate_draws` (the public
        seed ceremony often happens after the audit is opened). A session
        without a bound election can replay and report but not record.
        """
        if not 0.0 < risk_limit < 1.0:
            raise InvalidRiskLimit(
                f"risk limit must be in (0, 1), got {risk_limit}"
            )
        total = bounds.total
        if total < 1.0:
            # nothing to audit: even the worst case cannot reach E = 1
            return cls(
                bounds=bounds, risk_limit=risk_limit, seed=seed,
                planned_draws=0, draws=(), spec=spec, records=(),
                hand_counts={}, status=CERTIFIABLE, current_p=0.0,
            )
        if not total > 1.0:
            raise BoundNotAboveOne(
                "total error bound is exactly 1: the test cannot converge "
                "and the bound cannot certify; audit the election fully"
            )
        session = cls(
            bounds=bounds, risk_limit=risk_limit, seed=None,
            planned_draws=0, draws=(), spec=spec, records=(),
            hand_counts={}, status=AWAITING_COUNTS, current_p=1.0,
        )
        if seed is not None:
            session.generate_draws(seed, planned_draws)
        elif planned_draws:
            raise ValidationError("planned draws require a seed")
        return session

    # ---- reads ----

    @property
    def total_bound(self) -> float:
        return self.bounds.total

    @property
    def audited_races(self) -> tuple[str, ...]:
        return self.bounds.audited_races

    @property
    def pending(self) -> tuple[str, ...]:
        return self.draws[len(self.records):]

    @property
    def next_batch(self) -> str | None:
        pending = self.pending
        return pending[0] if pending else None

    @property
    def taints(self) -> tuple[float, ...]:
        return tuple(r.taint for r in self.records)

    @property
    def escalation_recommended(self) -> bool:
        """True when sampling can no longer certify or has run out.

        A recorded taint of 1 freezes the running product at infinity; if
        the prefix minimum was not already below the risk limit, no number
        of further clean draws can certify. Exhausting the planned draws
        with P at or above the risk limit is the other trigger.
        """
        if self.status == EXHAUSTED:
            return True
        if self.status != AWAITING_COUNTS:
            return False
        return any(r.taint == 1.0 for r in self.records)

    def replay_pvalue(self) -> float:
        """Recompute P from the recorded taints (equals current_p always)."""
        if not self.records and self.total_bound < 1.0:
            return 0.0
        return km_pvalue(self.taints, self.total_bound)

    # ---- mutations ----

    def generate_draws(self, seed: int, planned_draws: int) -> "AuditSession":
        """Run the seeded PPEB draw: fixes the whole batch sequence at once."""
        if self.status in TERMINAL_STATUSES:
            # certifiable here means a sub-1 total bound: no draws to make
            raise AlreadyTerminal(f"session is {self.status}")
        if self.draws:
            raise ValidationError(
                "draw sequence already generated; open a new session to redraw"
            )
        if planned_draws < 1:
            raise ValidationError(
                f"planned draws must be >= 1, got {planned_draws}"
            )
        sequence = ppeb_draw(self.bounds, planned_draws, seed)
        self.seed = seed
        self.planned_draws = planned_draws
        self.draws = sequence.draws
        return self

    def record_batch(self, count: HandCount) -> "AuditSession":
        """Record the hand count for the next pending draw and update P.

        The count must name the batch of the next pending draw (WrongBatch
        otherwise) and validate against the election (HandCountInvalid).
        When the same batch comes up again later in the sequence, its
        stored count is consumed automatically: a hand count is a physical
        fact about the batch, and each repeat draw still contributes an
        independent factor to P.

        Recording may continue after the session is already certifiable
        (extra clean draws only strengthen the evidence); an escalated
        session is immutable, and an exhausted one has nothing pending.
        """
        if self.status == ESCALATE_FULL_COUNT:
            raise AlreadyTerminal(f"session is {self.status}")
        expected = self.next_batch
        if expected is None:
            raise WrongBatch("no pending draws")
        if count.batch_id != expected:
            raise WrongBatch(
                f"next pending draw is batch {expected!r}, "
                f"got a count for {count.batch_id!r}"
            )
        if self.spec is None:
            raise ValidationError(
                "session has no bound election; cannot score hand counts"
            )
        try:
            validate_hand_count(self.spec, count)
        except ValidationError as exc:
            raise HandCountInvalid(str(exc)) from exc
        self._append(count)
        self._consume_repeats()
        return self

    def escalate(self) -> "AuditSession":
        """Abandon sampling for a full hand count. Terminal and immutable."""
        if self.status not in (AWAITING_COUNTS, EXHAUSTED):
            raise AlreadyTerminal(f"session is {self.status}")
        self.status = ESCALATE_FULL_COUNT
        return self

    # ---- internals ----

    def _append(self, count: HandCount) -> None:
        batch_id = count.batch_id
        u = self.bounds.bound(batch_id)
        if u <= 0.0:
            raise ZeroBoundBatch(
                f"batch {batch_id!r} has zero error bound and cannot be drawn"
            )
        e = batch_marrop(self.spec, batch_id, count, self.audited_races)
        t = e / u
        if t > 1.0:
            raise TaintAboveOne(
                f"batch {batch_id!r}: taint {t} exceeds 1 "
                f"(bound table inconsistent with the election)"
            )
        self.records.append(
            TaintRecord(
                draw_index=len(self.records) + 1,
                batch_id=batch_id,
                observed_marrop=e,
                bound=u,
                taint=t,
            )
        )
        self.hand_counts[batch_id] = count
        self.current_p = km_pvalue(self.taints, self.total_bound)
        if self.current_p < self.risk_limit:
            self.status = CERTIFIABLE
        elif not self.pending:
            self.status = EXHAUSTED
        else:
            self.status = AWAITING_COUNTS

    def _consume_repeats(self) -> None:
        while self.status != ESCALATE_FULL_COUNT:
            upcoming = self.next_batch
            if upcoming is None or upcoming not in self.hand_counts:
                break
            self._append(self.hand_counts[upcoming])


def open_session(
    spec: ElectionSpec,
    audited_races,
    risk_limit: float,
    seed: int | None,
    planned_draws: int = 0,
) -> AuditSession:
    """Open a live audit on a validated election.

    Computes exact per-batch bounds for the audited races, then generates
    the full PPEB draw sequence from the ceremony seed. A None seed defers
    drawing to :meth:`AuditSession.generate_draws`.
    """
    races = tuple(sorted(set(audited_races))) if audited_races else ()
    if not races:
        raise ValidationError("audited_races must name at least one race")
    for r in races:
        if r not in spec.race_by_id:
            raise UnknownReference(f"unknown race {r!r}")
    bounds = total_error_bound(spec, races)
    return AuditSession.from_bounds(
        bounds, risk_limit, seed=seed, planned_draws=planned_draws, spec=spec
    )
