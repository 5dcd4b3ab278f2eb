"""PPEB draws: determinism, prefix stability, distribution, expectations."""

import numpy as np
import pytest

from marrop import (
    AllBoundsZero,
    ErrorBoundTable,
    ValidationError,
    expected_ballots,
    expected_combined_independent,
    expected_distinct_batches,
    expected_votes,
    inclusion_probability,
    ppeb_draw,
    total_error_bound,
)

SEED = 20260814


class TestDraws:
    def test_deterministic(self, cartoon):
        table = total_error_bound(cartoon)
        a = ppeb_draw(table, 36, SEED)
        b = ppeb_draw(table, 36, SEED)
        assert a.draws == b.draws
        assert a.seed == SEED

    def test_frozen_first_draws(self, cartoon):
        # pinned so a seed ceremony can be re-verified years later
        table = total_error_bound(cartoon)
        seq = ppeb_draw(table, 4, SEED)
        assert seq.draws == ("P150-VBM", "P025-IP", "P198-IP", "P055-IP")

    def test_prefix_stable(self, cartoon):
        table = total_error_bound(cartoon)
        assert ppeb_draw(table, 50, SEED).draws[:36] == ppeb_draw(table, 36, SEED).draws

    def test_zero_draws(self, cartoon):
        assert ppeb_draw(total_error_bound(cartoon), 0, SEED).draws == ()

    def test_negative_draws(self, cartoon):
        with pytest.raises(ValidationError):
            ppeb_draw(total_error_bound(cartoon), -1, SEED)

    def test_different_seeds_differ(self, cartoon):
        table = total_error_bound(cartoon)
        assert ppeb_draw(table, 36, 1).draws != ppeb_draw(table, 36, 2).draws

    def test_zero_bound_batches_never_drawn(self, cartoon):
        # audit B alone: 200 of the 400 batches have zero bound
        table = total_error_bound(cartoon, ("B",))
        seq = ppeb_draw(table, 2000, SEED)
        assert all(cartoon.batch_by_id[b].has_race("B") for b in seq.draws)

    def test_all_zero_bounds(self):
        table = ErrorBoundTable(("R",), ("a", "b"), (0.0, 0.0))
        with pytest.raises(AllBoundsZero):
            ppeb_draw(table, 1, SEED)

    def test_negative_bound_rejected(self):
        table = ErrorBoundTable(("R",), ("a", "b"), (0.5, -0.1))
        with pytest.raises(ValidationError):
            ppeb_draw(table, 1, SEED)

    def test_frequencies_track_bounds(self, desk):
        # 40k draws: per-batch frequency within 5 sigma of u/U
        table = total_error_bound(desk)
        n = 40_000
        seq = ppeb_draw(table, n, SEED)
        counts = {b: 0 for b in table.batch_ids}
        for b in seq.draws:
            counts[b] += 1
        for batch_id, u in table.per_batch.items():
            p = u / table.total
            sigma = (n * p * (1 - p)) ** 0.5
            assert abs(counts[batch_id] - n * p) < 5 * sigma


class TestInclusionProbability:
    def test_edge_values(self):
        assert inclusion_probability(0.3, 1.0, 0) == 0.0
        assert inclusion_probability(0.0, 1.0, 10) == 0.0
        assert inclusion_probability(1.0, 1.0, 3) == 1.0

    def test_formula(self):
        assert inclusion_probability(0.3, 1.0, 2) == pytest.approx(1 - 0.49, abs=1e-15)

    def test_errors(self):
        with pytest.raises(AllBoundsZero):
            inclusion_probability(0.0, 0.0, 1)
        with pytest.raises(ValidationError):
            inclusion_probability(0.3, 1.0, -1)
        with pytest.raises(ValidationError):
            inclusion_probability(1.5, 1.0, 1)


class TestExpectations:
    def test_distinct_batches_by_hand(self):
        # u = (0.3, 0.7), n = 2: inclusions 0.51 and 0.91
        table = ErrorBoundTable(("R",), ("a", "b"), (0.3, 0.7))
        assert expected_distinct_batches(table, 2) == pytest.approx(1.42, abs=1e-12)
        assert expected_distinct_batches(table, 0) == 0.0

    def test_single_draw_identities(self, desk):
        # with one draw, inclusion = u/U: expected distinct batches is 1 and,
        # since every batch holds 100 ballots, expected ballots is 100
        table = total_error_bound(desk)
        assert expected_distinct_batches(table, 1) == pytest.approx(1.0, abs=1e-12)
        assert expected_ballots(desk, table, 1) == pytest.approx(100.0, abs=1e-9)
        # votes: (14*100*0.3 + 6*200*(130/180)) / (128/15) = 150.78125
        assert expected_votes(desk, table, 1) == pytest.approx(150.78125, abs=1e-9)

    def test_misaligned_table(self, desk, cartoon):
        table = total_error_bound(cartoon)
        with pytest.raises(ValidationError):
            expected_ballots(desk, table, 1)

    def test_matches_monte_carlo(self, desk):
        table = total_error_bound(desk)
        n = 12
        reps = 4000
        rng = np.random.default_rng(5)
        v = np.asarray(table.values)
        cum = np.cumsum(v)
        got = 0.0
        for _ in range(reps):
            pts = rng.random(n) * cum[-1]
            idx = np.minimum(np.searchsorted(cum, pts, side="right"), v.size - 1)
            got += len(set(idx.tolist()))
        got /= reps
        want = expected_distinct_batches(table, n)
        # binomial-ish spread per batch, conservative 4 sigma window
        sigma = (len(v) * 0.25 / reps) ** 0.5
        assert abs(got - want) < 4 * sigma


class TestCombinedIndependent:
    def test_empty(self, desk):
        w = expected_combined_independent(desk, [])
        assert (w.batches, w.ballots, w.votes) == (0.0, 0.0, 0.0)

    def test_same_audit_twice_is_double_length(self, desk):
        # two independent n-draw audits of one race miss a batch exactly as
        # often as a single 2n-draw audit, while reading work doubles
        table = total_error_bound(desk, ("X",))
        combined = expected_combined_independent(desk, [(table, 6), (table, 6)])
        assert combined.batches == pytest.approx(expected_distinct_batches(table, 12), abs=1e-12)
        assert combined.ballots == pytest.approx(expected_ballots(desk, table, 12), abs=1e-9)
        assert combined.votes == pytest.approx(2 * expected_votes(desk, table, 6), abs=1e-9)

    def test_overlap_saves_retrievals(self, cartoon):
        # B (precincts 1-100) and C (71-130) share 30 precincts, so the
        # combined expectation is strictly below the sum of the two audits
        tb = total_error_bound(cartoon, ("B",))
        tc = total_error_bound(cartoon, ("C",))
        combined = expected_combined_independent(cartoon, [(tb, 10), (tc, 10)])
        separate = (
            expected_distinct_batches(tb, 10) + expected_distinct_batches(tc, 10)
        )
        assert combined.batches < separate
