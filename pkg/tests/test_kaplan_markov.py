"""Sequential P-value arithmetic and the audit session state machine."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marrop import (
    AWAITING_COUNTS,
    CERTIFIABLE,
    ESCALATE_FULL_COUNT,
    EXHAUSTED,
    AlreadyTerminal,
    AuditSession,
    BoundNotAboveOne,
    ErrorBoundTable,
    HandCount,
    HandCountInvalid,
    InvalidRiskLimit,
    TaintAboveOne,
    UnknownReference,
    ValidationError,
    WrongBatch,
    km_factors,
    km_pvalue,
    km_pvalue_history,
    open_session,
    ppeb_draw,
    total_error_bound,
)

SEED = 20260814
EXACT_U = 22.716666666666667

FIVE_TAINTED = [0.04] * 5 + [0.0] * 31


def clean_count(spec, batch_id):
    return HandCount(batch_id, dict(spec.batch_by_id[batch_id].reported_votes))


class TestFactors:
    def test_zero_taint(self):
        f = km_factors([0.0, 0.0], 10.0)
        assert np.allclose(f, 0.9)

    def test_taint_one_is_infinite(self):
        f = km_factors([0.0, 1.0], 10.0)
        assert f[1] == np.inf

    def test_negative_taint_shrinks_harder(self):
        f = km_factors([-0.5, 0.0], 10.0)
        assert f[0] < f[1]
        assert f[0] == pytest.approx(0.9 / 1.5, abs=1e-15)

    def test_bound_must_exceed_one(self):
        for u in (1.0, 0.5, 0.0):
            with pytest.raises(BoundNotAboveOne):
                km_factors([0.0], u)

    def test_taint_above_one(self):
        with pytest.raises(TaintAboveOne):
            km_factors([1.0001], 10.0)


class TestPvalue:
    def test_empty_history(self):
        assert km_pvalue([], 10.0) == 1.0
        assert km_pvalue_history([], 10.0).size == 0

    def test_single_clean_draw_exact_bound(self):
        assert km_pvalue([0.0], EXACT_U) == pytest.approx(
            0.9559794570799707, abs=1e-15
        )

    def test_thirty_six_clean_draws_exact_bound(self):
        p = km_pvalue([0.0] * 36, EXACT_U)
        assert p == pytest.approx(0.19776441803386605, abs=1e-15)
        assert f"{p:.3f}" == "0.198"

    def test_five_tainted_published_bound(self):
        assert km_pvalue(FIVE_TAINTED, 22.718) == pytest.approx(
            0.24256841130354442, abs=1e-15
        )

    def test_five_tainted_single_race_bounds(self):
        assert km_pvalue(FIVE_TAINTED, 21.0) == pytest.approx(
            0.21175275445168626, abs=1e-15
        )
        assert km_pvalue(FIVE_TAINTED[:33], 21.0) == pytest.approx(
            0.24513028237213336, abs=1e-15
        )

    def test_capped_at_one(self):
        # a huge early taint pushes the raw product above 1
        assert km_pvalue([0.99], 10.0) == 1.0

    def test_prefix_minimum_survives_later_errors(self):
        # history is the min over prefixes, so a late taint cannot raise it
        clean = [0.0] * 30
        p_clean = km_pvalue(clean, 10.0)
        p_spoiled = km_pvalue(clean + [0.999], 10.0)
        assert p_spoiled == p_clean

    def test_taint_one_freezes_product(self):
        # after an infinite factor, further clean draws change nothing
        base = [0.0] * 5 + [1.0]
        extended = base + [0.0] * 50
        assert km_pvalue(extended, 10.0) == km_pvalue(base, 10.0)
        assert km_pvalue(base, 10.0) == km_pvalue([0.0] * 5, 10.0)

    def test_history_is_nonincreasing(self):
        rng = np.random.default_rng(11)
        t = rng.uniform(0.0, 0.9, size=200)
        h = km_pvalue_history(t, 8.0)
        assert (np.diff(h) <= 1e-15).all()
        assert h.max() <= 1.0


@settings(max_examples=200, deadline=None)
@given(
    taints=st.lists(st.floats(min_value=0.0, max_value=0.99), min_size=1, max_size=40),
    bump_at=st.integers(min_value=0, max_value=39),
    total=st.floats(min_value=1.01, max_value=60.0),
)
def test_pvalue_monotone_in_taint(taints, bump_at, total):
    """Raising any single taint can only raise (or keep) the P-value."""
    base = km_pvalue(taints, total)
    bumped = list(taints)
    i = bump_at % len(bumped)
    bumped[i] = min(1.0, bumped[i] + 0.005)
    assert km_pvalue(bumped, total) >= base - 1e-12


@settings(max_examples=200, deadline=None)
@given(
    taints=st.lists(st.floats(min_value=0.0, max_value=0.99), max_size=40),
    total=st.floats(min_value=1.01, max_value=60.0),
)
def test_appending_clean_draw_never_raises_pvalue(taints, total):
    assert km_pvalue(taints + [0.0], total) <= km_pvalue(taints, total) + 1e-15


class TestSessionLifecycle:
    def test_open_full_audit(self, cartoon):
        s = open_session(cartoon, ("A", "B", "C"), 0.25, SEED, 36)
        assert s.status == AWAITING_COUNTS
        assert s.total_bound == pytest.approx(EXACT_U, abs=1e-12)
        assert len(s.draws) == 36
        assert s.next_batch == "P150-VBM"
        assert s.current_p == 1.0
        assert s.pending == s.draws

    def test_record_first_clean_count(self, cartoon):
        s = open_session(cartoon, ("A", "B", "C"), 0.25, SEED, 36)
        s.record_batch(clean_count(cartoon, s.next_batch))
        assert len(s.records) == 1
        assert s.records[0].draw_index == 1
        assert s.records[0].taint == 0.0
        assert s.current_p == pytest.approx(0.9559794570799707, abs=1e-15)
        assert s.status == AWAITING_COUNTS

    def test_record_all_clean_counts(self, cartoon):
        s = open_session(cartoon, ("A", "B", "C"), 0.25, SEED, 36)
        became_certifiable_at = None
        while s.next_batch is not None:
            s.record_batch(clean_count(cartoon, s.next_batch))
            if became_certifiable_at is None and s.status == CERTIFIABLE:
                became_certifiable_at = len(s.records)
        assert len(s.records) == 36
        assert s.status == CERTIFIABLE
        # P crosses the limit before the plan runs out, yet recording the
        # remaining draws is allowed and only strengthens the evidence
        assert became_certifiable_at < 36
        assert s.current_p == pytest.approx(0.19776441803386605, abs=1e-15)
        assert not s.escalation_recommended

    def test_wrong_batch_rejected_without_mutation(self, cartoon):
        s = open_session(cartoon, ("A", "B", "C"), 0.25, SEED, 36)
        wrong = s.draws[1]
        with pytest.raises(WrongBatch):
            s.record_batch(clean_count(cartoon, wrong))
        assert s.records == []
        assert s.current_p == 1.0

    def test_invalid_count_rejected_without_mutation(self, cartoon):
        s = open_session(cartoon, ("A", "B", "C"), 0.25, SEED, 36)
        with pytest.raises(HandCountInvalid):
            s.record_batch(HandCount(s.next_batch, {"A1": 100000}))
        assert s.records == []

    def test_no_pending_draws(self, cartoon):
        s = open_session(cartoon, ("A", "B", "C"), 0.25, SEED, 2)
        s.record_batch(clean_count(cartoon, s.next_batch))
        s.record_batch(clean_count(cartoon, s.next_batch))
        with pytest.raises(WrongBatch):
            s.record_batch(clean_count(cartoon, s.draws[0]))

    def test_exhausted_when_plan_runs_out_above_limit(self, desk):
        s = open_session(desk, ("X", "Y"), 0.001, 3, 2)
        while s.next_batch is not None:
            s.record_batch(clean_count(desk, s.next_batch))
        assert s.status == EXHAUSTED
        assert s.escalation_recommended
        assert s.current_p > s.risk_limit

    def test_repeat_draws_consume_stored_count(self, desk):
        # 12 draws from 20 batches repeat some batch for any seed that
        # produces a collision; a stored count is then reused per draw
        seed = next(
            sd
            for sd in range(100)
            if len(set(ppeb_draw(total_error_bound(desk), 12, sd).draws)) < 12
        )
        s = open_session(desk, ("X", "Y"), 0.05, seed, 12)
        calls = 0
        while s.next_batch is not None:
            s.record_batch(clean_count(desk, s.next_batch))
            calls += 1
        assert calls == len(set(s.draws))
        assert len(s.records) == 12
        # every draw contributed its own factor
        assert s.current_p == pytest.approx(
            km_pvalue([0.0] * 12, s.total_bound), abs=1e-15
        )

    def test_escalate_from_awaiting(self, cartoon):
        s = open_session(cartoon, ("A",), 0.25, SEED, 5)
        s.escalate()
        assert s.status == ESCALATE_FULL_COUNT
        with pytest.raises(AlreadyTerminal):
            s.record_batch(clean_count(cartoon, s.draws[0]))
        with pytest.raises(AlreadyTerminal):
            s.escalate()

    def test_escalate_from_exhausted(self, desk):
        s = open_session(desk, ("X",), 0.001, 3, 1)
        s.record_batch(clean_count(desk, s.next_batch))
        assert s.status == EXHAUSTED
        s.escalate()
        assert s.status == ESCALATE_FULL_COUNT

    def test_escalate_after_certifiable_rejected(self, desk):
        s = open_session(desk, ("X", "Y"), 0.9, 3, 1)
        s.record_batch(clean_count(desk, s.next_batch))
        assert s.status == CERTIFIABLE
        with pytest.raises(AlreadyTerminal):
            s.escalate()

    def test_taint_one_recommends_escalation(self, desk):
        s = open_session(desk, ("X", "Y"), 0.25, 3, 12)
        batch = desk.batch_by_id[s.next_batch]
        worst = {"X1": 0, "X2": 100}
        if batch.has_race("Y"):
            worst.update({"Y1": 0, "Y2": 100})
        s.record_batch(HandCount(batch.batch_id, worst))
        assert s.records[0].taint == 1.0
        assert s.current_p == 1.0
        assert s.status == AWAITING_COUNTS
        assert s.escalation_recommended
        # clean follow-ups cannot rescue the frozen product
        while s.next_batch is not None:
            s.record_batch(clean_count(desk, s.next_batch))
        assert s.status == EXHAUSTED

    def test_replay_matches_current(self, cartoon):
        s = open_session(cartoon, ("A", "B", "C"), 0.25, SEED, 36)
        for _ in range(7):
            s.record_batch(clean_count(cartoon, s.next_batch))
        assert s.replay_pvalue() == s.current_p


class TestSessionOpening:
    def test_risk_limit_bounds(self, cartoon):
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(InvalidRiskLimit):
                open_session(cartoon, ("A",), bad, SEED, 5)

    def test_unknown_race(self, cartoon):
        with pytest.raises(UnknownReference):
            open_session(cartoon, ("Z",), 0.25, SEED, 5)

    def test_no_races(self, cartoon):
        with pytest.raises(ValidationError):
            open_session(cartoon, (), 0.25, SEED, 5)

    def test_deferred_seed(self, cartoon):
        s = open_session(cartoon, ("A",), 0.25, None)
        assert s.draws == ()
        assert s.seed is None
        s.generate_draws(SEED, 10)
        assert len(s.draws) == 10
        with pytest.raises(ValidationError):
            s.generate_draws(SEED, 10)

    def test_planned_draws_require_seed(self, cartoon):
        with pytest.raises(ValidationError):
            open_session(cartoon, ("A",), 0.25, None, 10)

    def test_generate_draws_needs_positive_plan(self, cartoon):
        s = open_session(cartoon, ("A",), 0.25, None)
        with pytest.raises(ValidationError):
            s.generate_draws(SEED, 0)

    def test_sub_one_bound_certifies_at_open(self):
        table = ErrorBoundTable(("R",), ("a", "b"), (0.3, 0.4))
        s = AuditSession.from_bounds(table, 0.25)
        assert s.status == CERTIFIABLE
        assert s.current_p == 0.0
        assert s.draws == ()
        assert s.replay_pvalue() == 0.0
        with pytest.raises(AlreadyTerminal):
            s.generate_draws(SEED, 5)
        with pytest.raises(WrongBatch):
            s.record_batch(HandCount("a", {}))
        with pytest.raises(AlreadyTerminal):
            s.escalate()

    def test_bound_exactly_one_rejected(self):
        table = ErrorBoundTable(("R",), ("a", "b"), (0.5, 0.5))
        with pytest.raises(BoundNotAboveOne):
            AuditSession.from_bounds(table, 0.25)

    def test_from_bounds_without_spec_cannot_record(self):
        table = ErrorBoundTable(("R",), ("a", "b"), (1.5, 1.5))
        s = AuditSession.from_bounds(table, 0.25, seed=SEED, planned_draws=3)
        with pytest.raises(ValidationError):
            s.record_batch(HandCount(s.next_batch, {}))

    def test_session_equality_ignores_spec(self, cartoon):
        a = open_session(cartoon, ("A",), 0.25, SEED, 5)
        b = open_session(cartoon, ("A",), 0.25, SEED, 5)
        assert a == b
        b.record_batch(clean_count(cartoon, b.next_batch))
        assert a != b
