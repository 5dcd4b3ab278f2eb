"""Monte Carlo verification that the audit is risk-limiting.

The risk-limit claim is statistical: when some audited outcome is wrong,
the chance the audit certifies anyway is at most the risk limit. That is
not a number one can print from a formula, so this module builds ground
truths (hand counts for every batch, optionally with planted errors),
checks them with an outcome oracle, and measures the empirical certify
rate over many independent simulated audits.

Planted errors move whole votes from a winner to a loser of the target
race, the most margin-efficient manipulation: each moved vote adds
2/V_wl of relative overstatement. Spreading the moved votes over many
batches keeps each batch's taint small, which is exactly the adversarial
shape the sequential test has to withstand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .bounds import batch_marrop, total_error_bound, total_marrop
from .election import ElectionSpec, HandCount
from .errors import (
    BoundNotAboveOne,
    BudgetInfeasible,
    InvalidRiskLimit,
    MissingBatches,
    TaintAboveOne,
    UnknownReference,
    ValidationError,
)


@dataclass(frozen=True)
class TrueTallySet:
    """A complete ground truth: one HandCount per batch."""

    counts: dict[str, HandCount]

    def count_for(self, batch_id: str) -> HandCount:
        return self.counts[batch_id]

    def actual_totals(self, spec: ElectionSpec) -> dict[str, int]:
        """A_k: true votes per candidate, over batches where the race appears."""
        totals = {k: 0 for k in spec.race_of}
        for b in spec.batches:
            c = self.counts.get(b.batch_id)
            if c is None:
                raise MissingBatches(f"no truth for batch {b.batch_id!r}")
            for k, v in c.actual_votes.items():
                totals[k] += v
        return totals


@dataclass(frozen=True)
class RaceOutcome:
    """One race's true verdict: the smallest actual winner-loser margin."""

    race_id: str
    min_actual_margin: int
    correct: bool


@dataclass(frozen=True)
class OutcomeReport:
    """Ground-truth check: per-race verdicts, total MARROP E, implication."""

    races: tuple[RaceOutcome, ...]
    total_marrop: float
    implication_ok: bool

    @property
    def all_correct(self) -> bool:
        return all(r.correct for r in self.races)

    def race(self, race_id: str) -> RaceOutcome:
        for r in self.races:
            if r.race_id == race_id:
                return r
        raise KeyError(race_id)


def outcome_oracle(spec: ElectionSpec, truth: TrueTallySet) -> OutcomeReport:
    """Judge every reported outcome against the truth and compute E.

    A race's reported outcome is correct when every reported winner truly
    beats every reported loser (strictly). The report also checks the
    implication E < 1 => all outcomes correct, which is the arithmetic
    fact the whole audit rests on.
    """
    missing = [b for b in spec.batch_ids if b not in truth.counts]
    if missing:
        raise MissingBatches(
            f"truth missing for {len(missing)} batches (first: {missing[0]!r})"
        )
    totals = truth.actual_totals(spec)
    races = []
    for r in spec.races:
        margins = [
            totals[w] - totals[l] for w, l in spec.winner_loser_pairs(r.race_id)
        ]
        m = min(margins)
        races.append(
            RaceOutcome(race_id=r.race_id, min_actual_margin=m, correct=m > 0)
        )
    total = total_marrop(spec, truth.counts)
    all_correct = all(r.correct for r in races)
    report = OutcomeReport(
        races=tuple(races),
        total_marrop=total,
        implication_ok=(not total < 1.0) or all_correct,
    )
    return report


def plant_errors(
    spec: ElectionSpec,
    race_id: str,
    budget: float,
    spread: int,
    seed: int,
) -> TrueTallySet:
    """Build a truth whose total overstatement of one race equals ``budget``.

    Votes move from the race's minimum-margin winner to the matching loser
    in round(budget * V_wl / 2) whole votes (one vote's granularity),
    spread over ``spread`` batches drawn uniformly (seeded) from those with
    room to absorb errors. Room in a batch is min(v_w, cap - v_l): the
    winner cannot go below zero and the loser cannot exceed the ballot cap.
    A budget of 0 returns the reported results as truth. A budget of 1
    lands the race exactly on a tie; one more vote makes the outcome wrong.
    """
    if race_id not in spec.race_by_id:
        raise UnknownReference(f"unknown race {race_id!r}")
    if budget < 0.0:
        raise ValidationError(f"budget must be >= 0, got {budget}")
    truth = {
        b.batch_id: HandCount(b.batch_id, dict(b.reported_votes))
        for b in spec.batches
    }
    pairs = spec.winner_loser_pairs(race_id)
    winner, loser = min(pairs, key=lambda wl: spec.totals[wl[0]] - spec.totals[wl[1]])
    margin = spec.totals[winner] - spec.totals[loser]
    to_move = int(round(budget * margin / 2.0))
    if to_move == 0:
        return TrueTallySet(counts=truth)
    if spread < 1:
        raise ValidationError(f"spread must be >= 1 to plant errors, got {spread}")

    eligible = []
    for b in spec.batches:
        if not b.has_race(race_id):
            continue
        room = min(b.votes(winner), b.ballot_caps[race_id] - b.votes(loser))
        if room > 0:
            eligible.append((b.batch_id, room))
    if spread > len(eligible):
        raise BudgetInfeasible(
            f"requested spread {spread} exceeds the {len(eligible)} batches "
            f"able to absorb errors"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    chosen_idx = rng.choice(len(eligible), size=spread, replace=False)
    chosen = [eligible[i] for i in sorted(chosen_idx)]
    capacity = sum(room for _, room in chosen)
    if to_move > capacity:
        raise BudgetInfeasible(
            f"budget needs {to_move} votes moved but the chosen {spread} "
            f"batches can absorb only {capacity}"
        )

    base, extra = divmod(to_move, spread)
    planned = {
        batch_id: min(room, base + (1 if i < extra else 0))
        for i, (batch_id, room) in enumerate(chosen)
    }
    leftover = to_move - sum(planned.values())
    for batch_id, room in chosen:
        if leftover == 0:
            break
        spill = min(leftover, room - planned[batch_id])
        planned[batch_id] += spill
        leftover -= spill

    for batch_id, moved in planned.items():
        if moved == 0:
            continue
        votes = dict(truth[batch_id].actual_votes)
        votes[winner] = votes.get(winner, 0) - moved
        votes[loser] = votes.get(loser, 0) + moved
        truth[batch_id] = HandCount(batch_id, votes)
    return TrueTallySet(counts=truth)


@dataclass(frozen=True)
class SimulationReport:
    """Empirical certify rate over independent simulated audits."""

    trials: int
    certify_count: int
    certify_rate: float
    interval_low: float
    interval_high: float
    interval_confidence: float
    risk_limit: float
    planned_draws: int
    seed: int
    draws_mean: float
    draws_min: int
    draws_max: int

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "certify_count": self.certify_count,
            "certify_rate": self.certify_rate,
            "interval": {
                "confidence": self.interval_confidence,
                "low": self.interval_low,
                "high": self.interval_high,
            },
            "risk_limit": self.risk_limit,
            "planned_draws": self.planned_draws,
            "seed": self.seed,
            "draws_to_decision": {
                "mean": self.draws_mean,
                "min": self.draws_min,
                "max": self.draws_max,
            },
        }

    def to_text(self) -> str:
        pct = 100.0 * self.interval_confidence
        return (
            f"trials            {self.trials}\n"
            f"certified         {self.certify_count} "
            f"(rate {self.certify_rate:.4f})\n"
            f"{pct:.0f}% interval      "
            f"[{self.interval_low:.4f}, {self.interval_high:.4f}]\n"
            f"risk limit        {self.risk_limit}\n"
            f"planned draws     {self.planned_draws}\n"
            f"draws to decision mean {self.draws_mean:.2f}, "
            f"min {self.draws_min}, max {self.draws_max}\n"
            f"seed              {self.seed}\n"
        )


def simulate(
    spec: ElectionSpec,
    truth: TrueTallySet,
    risk_limit: float,
    planned_draws: int,
    trials: int,
    seed: int,
    audited_races=None,
) -> SimulationReport:
    """Run independent audits against one truth and count certifications.

    Every trial draws its own PPEB sample (generator seeded from
    (seed, trial_index), so results are reproducible and order-independent)
    and certifies when the running prefix-min P drops below the risk
    limit within the planned draws. Batch taints are precomputed once from
    the truth: a hand count is a fixed fact, so repeat draws of a batch
    reuse its taint.
    """
    if not 0.0 < risk_limit < 1.0:
        raise InvalidRiskLimit(f"risk limit must be in (0, 1), got {risk_limit}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    races = tuple(sorted(set(audited_races))) if audited_races else spec.race_ids
    bounds = total_error_bound(spec, races)
    total = bounds.total
    if total < 1.0:
        # certification without sampling: no legal truth can reach E = 1
        ci = binomtest(trials, trials).proportion_ci(confidence_level=0.99)
        return SimulationReport(
            trials=trials, certify_count=trials, certify_rate=1.0,
            interval_low=float(ci.low), interval_high=float(ci.high),
            interval_confidence=0.99, risk_limit=risk_limit,
            planned_draws=0, seed=seed,
            draws_mean=0.0, draws_min=0, draws_max=0,
        )
    if not total > 1.0:
        raise BoundNotAboveOne("total error bound is exactly 1; audit fully")
    if planned_draws < 1:
        raise ValidationError(
            f"planned draws must be >= 1, got {planned_draws}"
        )
    missing = [b for b in spec.batch_ids if b not in truth.counts]
    if missing:
        raise MissingBatches(
            f"truth missing for {len(missing)} batches (first: {missing[0]!r})"
        )

    values = np.asarray(bounds.values, dtype=float)
    cum = np.cumsum(values)
    factors = np.empty(values.size, dtype=float)
    shrink = 1.0 - 1.0 / total
    for i, batch_id in enumerate(bounds.batch_ids):
        u = values[i]
        if u <= 0.0:
            factors[i] = np.nan  # unreachable: draw probability is zero
            continue
        e = batch_marrop(spec, batch_id, truth.counts[batch_id], races)
        t = e / u
        if t > 1.0:
            raise TaintAboveOne(
                f"batch {batch_id!r}: truth taint {t} exceeds 1"
            )
        factors[i] = math.inf if t == 1.0 else shrink / (1.0 - t)

    certify_count = 0
    draws_used = np.empty(trials, dtype=np.int64)
    for trial in range(trials):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((seed, trial)))
        )
        points = rng.random(planned_draws) * cum[-1]
        idx = np.minimum(
            np.searchsorted(cum, points, side="right"), values.size - 1
        )
        products = np.cumprod(factors[idx])
        running = np.minimum.accumulate(products)
        hits = running < risk_limit
        if hits.any():
            certify_count += 1
            draws_used[trial] = int(np.argmax(hits)) + 1
        else:
            draws_used[trial] = planned_draws

    ci = binomtest(certify_count, trials).proportion_ci(confidence_level=0.99)
    return SimulationReport(
        trials=trials,
        certify_count=certify_count,
        certify_rate=certify_count / trials,
        interval_low=float(ci.low),
        interval_high=float(ci.high),
        interval_confidence=0.99,
        risk_limit=risk_limit,
        planned_draws=planned_draws,
        seed=seed,
        draws_mean=float(draws_used.mean()),
        draws_min=int(draws_used.min()),
        draws_max=int(draws_used.max()),
    )
