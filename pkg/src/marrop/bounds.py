"""Across-race relative overstatement and its per-batch error bounds.

For a (winner, loser) pair (w, l) of race r with reported margin
V_wl = V_w - V_l > 0, the relative overstatement of the pair in batch p is

    e_pwl = ((v_wp - v_lp) - (a_wp - a_lp)) / V_wl

when race r is present in p, and 0 otherwise: v are reported votes, a are
hand-counted actual votes. The batch's MARROP is the maximum of e_pwl over
every audited race present in the batch and every (winner, loser) pair of
that race. Summed over all batches the maxima give the total MARROP E, and
E < 1 implies every audited reported outcome matches the full hand count:
if some pair actually tied or flipped, its overstatements would have to sum
to at least 1, and each batch's max dominates each pair's term.

The batch error bound u_p is the largest value e_p can take over legal hand
counts, reached by a_wp = 0 and a_lp = cap:

    u_p = max over audited races r present in p, pairs (w, l) of
          (v_wp - v_lp + b_rp) / V_wl

with b_rp the batch's ballot cap for race r. The total bound U = sum u_p
scales the sequential test, and the taint of an audited batch is
e_p / u_p <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .election import ElectionSpec, HandCount, validate_hand_count
from .errors import (
    HandCountBatchMismatch,
    MissingBatches,
    UnknownReference,
    ZeroBoundBatch,
)


def _resolve_races(spec: ElectionSpec, audited_races) -> tuple[str, ...]:
    if audited_races is None:
        return spec.race_ids
    races = tuple(sorted(set(audited_races)))
    for r in races:
        if r not in spec.race_by_id:
            raise UnknownReference(f"unknown race {r!r}")
    return races


def _checked(spec: ElectionSpec, batch_id: str, count: HandCount) -> HandCount:
    if count.batch_id != batch_id:
        raise HandCountBatchMismatch(
            f"hand count is for batch {count.batch_id!r}, expected {batch_id!r}"
        )
    return validate_hand_count(spec, count)


def relative_overstatement(
    spec: ElectionSpec,
    batch_id: str,
    count: HandCount,
    winner_id: str,
    loser_id: str,
) -> float:
    """e_pwl for one batch and one (winner, loser) pair.

    Zero when the pair's race is not present in the batch. Negative values
    mean the hand count found the pair doing better than reported.
    """
    margin = spec.pairwise_margin(winner_id, loser_id)
    _checked(spec, batch_id, count)
    batch = spec.batch_by_id.get(batch_id)
    if batch is None:
        raise UnknownReference(f"unknown batch {batch_id!r}")
    race_id = spec.race_of[winner_id]
    if not batch.has_race(race_id):
        return 0.0
    reported = batch.votes(winner_id) - batch.votes(loser_id)
    actual = count.votes(winner_id) - count.votes(loser_id)
    return (reported - actual) / margin


def batch_marrop(
    spec: ElectionSpec,
    batch_id: str,
    count: HandCount,
    audited_races=None,
) -> float:
    """Maximum relative overstatement of the batch across audited races.

    An audited race absent from the batch contributes exactly 0 to the
    maximum, so the value can only be negative (an understatement) when the
    batch contains every audited race. Dropping the absent races' zeros
    instead would let understatements in partial batches offset another
    race's overstatements, and E < 1 would no longer certify anything.
    """
    races = _resolve_races(spec, audited_races)
    _checked(spec, batch_id, count)
    batch = spec.batch_by_id.get(batch_id)
    if batch is None:
        raise UnknownReference(f"unknown batch {batch_id!r}")
    best = None
    absent = False
    for race_id in races:
        if not batch.has_race(race_id):
            absent = True
            continue
        for w, l in spec.winner_loser_pairs(race_id):
            margin = spec.totals[w] - spec.totals[l]
            reported = batch.votes(w) - batch.votes(l)
            actual = count.votes(w) - count.votes(l)
            e = (reported - actual) / margin
            if best is None or e > best:
                best = e
    if best is None:
        return 0.0
    return max(best, 0.0) if absent else best


def batch_error_bound(
    spec: ElectionSpec,
    batch_id: str,
    audited_races=None,
) -> float:
    """u_p: the largest batch MARROP any legal hand count could produce."""
    races = _resolve_races(spec, audited_races)
    batch = spec.batch_by_id.get(batch_id)
    if batch is None:
        raise UnknownReference(f"unknown batch {batch_id!r}")
    best = 0.0
    for race_id in races:
        if not batch.has_race(race_id):
            continue
        cap = batch.ballot_caps[race_id]
        for w, l in spec.winner_loser_pairs(race_id):
            margin = spec.totals[w] - spec.totals[l]
            u = (batch.votes(w) - batch.votes(l) + cap) / margin
            if u > best:
                best = u
    return best


@dataclass(frozen=True)
class ErrorBoundTable:
    """Per-batch error bounds u_p for one set of audited races.

    ``values`` aligns with ``batch_ids`` (canonical id order). ``decimals``
    records the quantization applied to each u_p: None means exact doubles,
    an integer means every value was rounded to that many decimal places
    (the convention used for published planning tables). ``total`` is the
    exactly rounded sum of ``values``.
    """

    audited_races: tuple[str, ...]
    batch_ids: tuple[str, ...]
    values: tuple[float, ...]
    decimals: int | None = None

    @property
    def total(self) -> float:
        return math.fsum(self.values)

    def bound(self, batch_id: str) -> float:
        try:
            return self.values[self.batch_ids.index(batch_id)]
        except ValueError:
            raise UnknownReference(f"batch {batch_id!r} not in bound table") from None

    @property
    def per_batch(self) -> dict[str, float]:
        return dict(zip(self.batch_ids, self.values))


def total_error_bound(
    spec: ElectionSpec,
    audited_races=None,
    decimals: int | None = None,
) -> ErrorBoundTable:
    """Error bound table over all batches, in canonical batch order.

    ``decimals`` rounds each per-batch bound before summing; planning tables
    use 4 so that published figures can be reproduced digit for digit. Leave
    it None for live audit arithmetic: rounding a bound down can push a
    legal taint above 1.
    """
    races = _resolve_races(spec, audited_races)
    values = []
    for b in spec.batches:
        u = batch_error_bound(spec, b.batch_id, races)
        if decimals is not None:
            u = round(u, decimals)
        values.append(u)
    return ErrorBoundTable(
        audited_races=races,
        batch_ids=spec.batch_ids,
        values=tuple(values),
        decimals=decimals,
    )


def taint(
    spec: ElectionSpec,
    batch_id: str,
    count: HandCount,
    audited_races=None,
) -> float:
    """e_p / u_p for one audited batch. Undefined (ZeroBoundBatch) when u_p = 0."""
    u = batch_error_bound(spec, batch_id, audited_races)
    if u <= 0.0:
        raise ZeroBoundBatch(
            f"batch {batch_id!r} has zero error bound; taint is undefined"
        )
    return batch_marrop(spec, batch_id, count, audited_races) / u


@dataclass(frozen=True)
class BatchDiscrepancy:
    """Every pairwise overstatement of one audited batch, plus the summary.

    ``overstatements`` maps (winner_id, loser_id) -> e_pwl for each pair of
    each audited race present in the batch. ``taint`` is None when the batch
    bound is zero.
    """

    batch_id: str
    overstatements: dict[tuple[str, str], float]
    batch_marrop: float
    bound: float
    taint: float | None


def batch_discrepancy(
    spec: ElectionSpec,
    batch_id: str,
    count: HandCount,
    audited_races=None,
) -> BatchDiscrepancy:
    """Score one batch's hand count: pair overstatements, max, bound, taint."""
    races = _resolve_races(spec, audited_races)
    _checked(spec, batch_id, count)
    batch = spec.batch_by_id.get(batch_id)
    if batch is None:
        raise UnknownReference(f"unknown batch {batch_id!r}")
    overs: dict[tuple[str, str], float] = {}
    for race_id in races:
        if not batch.has_race(race_id):
            continue
        for w, l in spec.winner_loser_pairs(race_id):
            margin = spec.totals[w] - spec.totals[l]
            reported = batch.votes(w) - batch.votes(l)
            actual = count.votes(w) - count.votes(l)
            overs[(w, l)] = (reported - actual) / margin
    e = max(overs.values()) if overs else 0.0
    u = batch_error_bound(spec, batch_id, races)
    return BatchDiscrepancy(
        batch_id=batch_id,
        overstatements=overs,
        batch_marrop=e,
        bound=u,
        taint=(e / u) if u > 0.0 else None,
    )


def total_marrop(
    spec: ElectionSpec,
    counts,
    audited_races=None,
) -> float:
    """Total MARROP E = sum of batch maxima over a complete set of hand counts.

    ``counts`` maps batch_id -> HandCount (or is an iterable of HandCount)
    and must cover every batch. E < 1 implies all audited outcomes are
    correct.
    """
    if not isinstance(counts, dict):
        counts = {c.batch_id: c for c in counts}
    missing = [b for b in spec.batch_ids if b not in counts]
    if missing:
        raise MissingBatches(
            f"hand counts missing for {len(missing)} of {len(spec.batch_ids)} "
            f"batches (first: {missing[0]!r})"
        )
    return math.fsum(
        batch_marrop(spec, b, counts[b], audited_races) for b in spec.batch_ids
    )
