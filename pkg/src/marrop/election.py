"""Election domain model: races, batches, reported results, hand counts.

The model is deliberately batch-centric. A contest is audited from the same
physical batches that produced the reported totals, and every quantity the
audit needs (margins, error bounds, vote caps) is derived from per-batch
reported votes plus per-batch ballot caps.

Vote maps are sparse: a candidate missing from a batch's map reported zero
votes there. A race is "present" in a batch exactly when the batch carries a
ballot cap for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    CandidateCapExceeded,
    DuplicateId,
    MarginNotPositive,
    NotSameRace,
    NotWinnerLoserPair,
    RaceAbsentEverywhere,
    TieAtBoundary,
    UnknownReference,
    ValidationError,
)


@dataclass(frozen=True)
class RaceSpec:
    """A single contest.

    Parameters
    ----------
    race_id : str
        Unique identifier.
    allowed_votes : int
        Number of votes each ballot may cast in this race (1 for a plain
        plurality race, k for vote-for-k). Also the number of winners.
    candidate_ids : tuple of str
        Candidates, in canonical (input) order.
    """

    race_id: str
    allowed_votes: int
    candidate_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "candidate_ids", tuple(self.candidate_ids))


@dataclass(frozen=True)
class BatchSpec:
    """One auditable reporting batch.

    ``ballot_caps`` maps race_id -> maximum ballots of this batch that contain
    the race; its key set is the set of races present in the batch. A cap of
    ``None`` in the constructor input means "all ballots of the batch".
    ``reported_votes`` maps candidate_id -> reported votes, sparse.
    """

    batch_id: str
    total_ballots: int
    ballot_caps: Mapping[str, int]
    reported_votes: Mapping[str, int]

    def __post_init__(self):
        caps = {
            r: (self.total_ballots if c is None else int(c))
            for r, c in dict(self.ballot_caps).items()
        }
        object.__setattr__(self, "ballot_caps", caps)
        object.__setattr__(
            self, "reported_votes", {k: int(v) for k, v in dict(self.reported_votes).items()}
        )

    def votes(self, candidate_id: str) -> int:
        return self.reported_votes.get(candidate_id, 0)

    def has_race(self, race_id: str) -> bool:
        return race_id in self.ballot_caps


@dataclass(frozen=True)
class HandCount:
    """A hand-to-eye count of one batch: candidate_id -> actual votes, sparse."""

    batch_id: str
    actual_votes: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(
            self, "actual_votes", {k: int(v) for k, v in dict(self.actual_votes).items()}
        )

    def votes(self, candidate_id: str) -> int:
        return self.actual_votes.get(candidate_id, 0)


@dataclass(frozen=True)
class ElectionSpec:
    """A fully validated election: races plus batches in canonical id order.

    Construction validates everything (see :func:`validate_election` for the
    rule list) and precomputes reported totals, winners, and losers. Derived
    fields do not participate in equality.
    """

    races: tuple[RaceSpec, ...]
    batches: tuple[BatchSpec, ...]
    totals: dict[str, int] = field(init=False, compare=False, repr=False)
    winners: dict[str, tuple[str, ...]] = field(init=False, compare=False, repr=False)
    losers: dict[str, tuple[str, ...]] = field(init=False, compare=False, repr=False)
    race_of: dict[str, str] = field(init=False, compare=False, repr=False)
    batch_by_id: dict[str, BatchSpec] = field(init=False, compare=False, repr=False)
    race_by_id: dict[str, RaceSpec] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        races = tuple(sorted(self.races, key=lambda r: r.race_id))
        batches = tuple(sorted(self.batches, key=lambda b: b.batch_id))
        object.__setattr__(self, "races", races)
        object.__setattr__(self, "batches", batches)
        _validate_structure(races, batches)
        totals = _reported_totals(races, batches)
        winners, losers = _derive_outcomes(races, totals)
        object.__setattr__(self, "totals", totals)
        object.__setattr__(self, "winners", winners)
        object.__setattr__(self, "losers", losers)
        object.__setattr__(
            self, "race_of", {k: r.race_id for r in races for k in r.candidate_ids}
        )
        object.__setattr__(self, "batch_by_id", {b.batch_id: b for b in batches})
        object.__setattr__(self, "race_by_id", {r.race_id: r for r in races})

    @property
    def race_ids(self) -> tuple[str, ...]:
        return tuple(r.race_id for r in self.races)

    @property
    def batch_ids(self) -> tuple[str, ...]:
        return tuple(b.batch_id for b in self.batches)

    def pairwise_margin(self, winner_id: str, loser_id: str) -> int:
        """Reported margin V_w - V_l for a (winner, loser) pair of one race.

        Raises UnknownReference, NotSameRace, or NotWinnerLoserPair when the
        pair is not a winner and a loser of the same race. Margins of a
        validated election are always strictly positive.
        """
        for k in (winner_id, loser_id):
            if k not in self.race_of:
                raise UnknownReference(f"unknown candidate {k!r}")
        race = self.race_of[winner_id]
        if race != self.race_of[loser_id]:
            raise NotSameRace(
                f"{winner_id!r} and {loser_id!r} belong to different races"
            )
        if winner_id not in self.winners[race] or loser_id not in self.losers[race]:
            raise NotWinnerLoserPair(
                f"({winner_id!r}, {loser_id!r}) is not a (winner, loser) pair of race {race!r}"
            )
        return self.totals[winner_id] - self.totals[loser_id]

    def winner_loser_pairs(self, race_id: str):
        """All (winner, loser) candidate pairs of one race."""
        if race_id not in self.race_by_id:
            raise UnknownReference(f"unknown race {race_id!r}")
        return [
            (w, l) for w in self.winners[race_id] for l in self.losers[race_id]
        ]


def _validate_structure(races, batches):
    if not races:
        raise ValidationError("election defines no races")
    seen_races: set[str] = set()
    seen_candidates: set[str] = set()
    candidates_of: dict[str, tuple[str, ...]] = {}
    allowed: dict[str, int] = {}
    for r in races:
        if not r.race_id:
            raise ValidationError("race_id must be non-empty")
        if r.race_id in seen_races:
            raise DuplicateId(f"duplicate race id {r.race_id!r}")
        seen_races.add(r.race_id)
        if r.allowed_votes < 1:
            raise ValidationError(
                f"race {r.race_id!r}: allowed_votes must be >= 1, got {r.allowed_votes}"
            )
        for k in r.candidate_ids:
            if not k:
                raise ValidationError(f"race {r.race_id!r}: empty candidate id")
            if k in seen_candidates:
                raise DuplicateId(f"duplicate candidate id {k!r}")
            seen_candidates.add(k)
        if len(r.candidate_ids) <= r.allowed_votes:
            raise ValidationError(
                f"race {r.race_id!r}: needs more candidates than allowed_votes "
                f"({len(r.candidate_ids)} <= {r.allowed_votes})"
            )
        candidates_of[r.race_id] = r.candidate_ids
        allowed[r.race_id] = r.allowed_votes
    race_of = {k: r for r, ks in candidates_of.items() for k in ks}

    seen_batches: set[str] = set()
    races_seen_somewhere: set[str] = set()
    for b in batches:
        if not b.batch_id:
            raise ValidationError("batch_id must be non-empty")
        if b.batch_id in seen_batches:
            raise DuplicateId(f"duplicate batch id {b.batch_id!r}")
        seen_batches.add(b.batch_id)
        if b.total_ballots < 0:
            raise ValidationError(
                f"batch {b.batch_id!r}: total_ballots must be >= 0"
            )
        for race_id, cap in b.ballot_caps.items():
            if race_id not in seen_races:
                raise UnknownReference(
                    f"batch {b.batch_id!r}: unknown race {race_id!r}"
                )
            if not 0 <= cap <= b.total_ballots:
                raise ValidationError(
                    f"batch {b.batch_id!r}, race {race_id!r}: ballot cap {cap} "
                    f"outside [0, {b.total_ballots}]"
                )
            races_seen_somewhere.add(race_id)
        race_sums: dict[str, int] = {}
        for k, v in b.reported_votes.items():
            race_id = race_of.get(k)
            if race_id is None:
                raise UnknownReference(
                    f"batch {b.batch_id!r}: unknown candidate {k!r}"
                )
            if race_id not in b.ballot_caps:
                raise UnknownReference(
                    f"batch {b.batch_id!r}: candidate {k!r} belongs to race "
                    f"{race_id!r} which is not present in the batch"
                )
            if v < 0:
                raise ValidationError(
                    f"batch {b.batch_id!r}: negative votes for {k!r}"
                )
            if v > b.ballot_caps[race_id]:
                raise CandidateCapExceeded(
                    f"batch {b.batch_id!r}: {v} votes for {k!r} exceed the "
                    f"race {race_id!r} ballot cap {b.ballot_caps[race_id]}"
                )
            race_sums[race_id] = race_sums.get(race_id, 0) + v
        for race_id, s in race_sums.items():
            limit = allowed[race_id] * b.ballot_caps[race_id]
            if s > limit:
                raise CandidateCapExceeded(
                    f"batch {b.batch_id!r}, race {race_id!r}: {s} total votes "
                    f"exceed allowed_votes * cap = {limit}"
                )

    missing = seen_races - races_seen_somewhere
    if missing:
        raise RaceAbsentEverywhere(
            f"races present in no batch: {sorted(missing)}"
        )


def _reported_totals(races, batches):
    totals = {k: 0 for r in races for k in r.candidate_ids}
    for b in batches:
        for k, v in b.reported_votes.items():
            totals[k] += v
    return totals


def _derive_outcomes(races, totals):
    winners: dict[str, tuple[str, ...]] = {}
    losers: dict[str, tuple[str, ...]] = {}
    for r in races:
        # stable order: votes descending, then candidate id
        ranked = sorted(r.candidate_ids, key=lambda k: (-totals[k], k))
        f = r.allowed_votes
        if totals[ranked[f - 1]] == totals[ranked[f]]:
            raise TieAtBoundary(
                f"race {r.race_id!r}: tie at the winner/loser boundary "
                f"({ranked[f - 1]!r} and {ranked[f]!r} both have "
                f"{totals[ranked[f]]} votes)"
            )
        winners[r.race_id] = tuple(ranked[:f])
        losers[r.race_id] = tuple(ranked[f:])
    return winners, losers


def validate_election(races_or_spec, batches=None) -> ElectionSpec:
    """Build (or re-check) a validated election.

    Accepts either an existing ElectionSpec, which is returned unchanged
    (validation happened at construction and is deterministic), or a
    (races, batches) pair.

    Rules enforced, in order: non-empty unique race ids; allowed_votes >= 1;
    globally unique candidate ids; more candidates than allowed_votes per
    race; unique batch ids; non-negative ballot totals; ballot caps that
    reference declared races and fit in [0, total_ballots]; reported votes
    that reference candidates of races present in the batch, are
    non-negative, and respect both the per-candidate cap and the per-race
    allowed_votes * cap sum; every race present in at least one batch;
    no tie at any race's winner/loser boundary.
    """
    if isinstance(races_or_spec, ElectionSpec):
        if batches is not None:
            raise ValueError("pass either a spec or (races, batches), not both")
        return races_or_spec
    return ElectionSpec(tuple(races_or_spec), tuple(batches or ()))


def validate_hand_count(spec: ElectionSpec, count: HandCount) -> HandCount:
    """Check a hand count against its batch's structure.

    The count may only name candidates of races present in the batch, votes
    must be non-negative, within the race ballot cap, and race totals within
    allowed_votes * cap. Missing candidates are zeros.
    """
    batch = spec.batch_by_id.get(count.batch_id)
    if batch is None:
        raise UnknownReference(f"unknown batch {count.batch_id!r}")
    race_sums: dict[str, int] = {}
    for k, v in count.actual_votes.items():
        race_id = spec.race_of.get(k)
        if race_id is None:
            raise UnknownReference(
                f"hand count for batch {count.batch_id!r}: unknown candidate {k!r}"
            )
        if not batch.has_race(race_id):
            raise UnknownReference(
                f"hand count for batch {count.batch_id!r}: race {race_id!r} "
                f"is not present in the batch"
            )
        if v < 0:
            raise ValidationError(
                f"hand count for batch {count.batch_id!r}: negative votes for {k!r}"
            )
        cap = batch.ballot_caps[race_id]
        if v > cap:
            raise CandidateCapExceeded(
                f"hand count for batch {count.batch_id!r}: {v} votes for {k!r} "
                f"exceed the race {race_id!r} ballot cap {cap}"
            )
        race_sums[race_id] = race_sums.get(race_id, 0) + v
    for race_id, s in race_sums.items():
        limit = spec.race_by_id[race_id].allowed_votes * batch.ballot_caps[race_id]
        if s > limit:
            raise CandidateCapExceeded(
                f"hand count for batch {count.batch_id!r}, race {race_id!r}: "
                f"{s} total votes exceed allowed_votes * cap = {limit}"
            )
    return count
