"""Sampling batches with probability proportional to error bound (PPEB).

Draws are i.i.d. with replacement: each draw lands on batch p with
probability u_p / U. Sampling uses cumulative-weight inversion over the
batches in canonical id order, driven by a PCG64 generator seeded with the
audit's public ceremony seed, so a seed fully determines the sequence.

The expectation helpers quantify workload before any ballot is touched:
a batch enters the sample at least once with probability
1 - (1 - u_p/U)^n, and summing that inclusion probability against per-batch
weights gives the expected number of distinct batches, ballots, and votes
to hand-count. For several independent single-race audits the miss
probabilities multiply, which is how a shared batch is counted once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import ErrorBoundTable
from .election import ElectionSpec
from .errors import AllBoundsZero, ValidationError

__all__ = [
    "DrawSequence",
    "WorkloadExpectation",
    "ppeb_draw",
    "inclusion_probability",
    "expected_distinct_batches",
    "expected_ballots",
    "expected_votes",
    "expected_combined_independent",
]


@dataclass(frozen=True)
class DrawSequence:
    """An ordered PPEB sample: the seed, the source table, and the batch ids."""

    seed: int
    bounds: ErrorBoundTable
    draws: tuple[str, ...]


def _weights(bounds: ErrorBoundTable) -> np.ndarray:
    v = np.asarray(bounds.values, dtype=float)
    if v.size == 0 or not v.sum() > 0.0:
        raise AllBoundsZero("every batch has zero error bound; nothing to sample")
    if (v < 0.0).any():
        raise ValidationError("error bounds must be non-negative")
    return v


def ppeb_draw(bounds: ErrorBoundTable, n: int, seed: int) -> DrawSequence:
    """Draw n batches i.i.d. with probability proportional to u_p.

    The same (bounds, n, seed) always yields the same sequence; the first
    m draws of an n-draw sequence equal the m-draw sequence, so an audit
    can be extended without redrawing.
    """
    if n < 0:
        raise ValidationError(f"draw count must be >= 0, got {n}")
    v = _weights(bounds)
    cum = np.cumsum(v)
    rng = np.random.Generator(np.random.PCG64(seed))
    points = rng.random(n) * cum[-1]
    idx = np.searchsorted(cum, points, side="right")
    # guard the measure-zero edge where points == cum[-1]
    idx = np.minimum(idx, v.size - 1)
    ids = tuple(bounds.batch_ids[i] for i in idx)
    return DrawSequence(seed=seed, bounds=bounds, draws=ids)


def inclusion_probability(bound: float, total: float, n: int) -> float:
    """Probability a batch with bound u enters an n-draw PPEB sample."""
    if not total > 0.0:
        raise AllBoundsZero("total error bound must be positive")
    if n < 0:
        raise ValidationError(f"draw count must be >= 0, got {n}")
    if not 0.0 <= bound <= total:
        raise ValidationError("per-batch bound must lie in [0, total]")
    return 1.0 - (1.0 - bound / total) ** n


def _inclusion_vector(bounds: ErrorBoundTable, n: int) -> np.ndarray:
    if n < 0:
        raise ValidationError(f"draw count must be >= 0, got {n}")
    v = _weights(bounds)
    return 1.0 - (1.0 - v / bounds.total) ** n


def expected_distinct_batches(bounds: ErrorBoundTable, n: int) -> float:
    """Expected number of distinct batches in an n-draw sample."""
    return float(_inclusion_vector(bounds, n).sum())


def _aligned(spec: ElectionSpec, bounds: ErrorBoundTable) -> None:
    if bounds.batch_ids != spec.batch_ids:
        raise ValidationError("bound table does not align with the election's batches")


def expected_ballots(spec: ElectionSpec, bounds: ErrorBoundTable, n: int) -> float:
    """Expected ballots to retrieve: sum of b_p over batches ever drawn."""
    _aligned(spec, bounds)
    ballots = np.array([b.total_ballots for b in spec.batches], dtype=float)
    return float((ballots * _inclusion_vector(bounds, n)).sum())


def _vote_weights(spec: ElectionSpec, audited_races) -> np.ndarray:
    races = set(audited_races)
    return np.array(
        [
            sum(cap for r, cap in b.ballot_caps.items() if r in races)
            for b in spec.batches
        ],
        dtype=float,
    )


def expected_votes(spec: ElectionSpec, bounds: ErrorBoundTable, n: int) -> float:
    """Expected voting possibilities to hand-read.

    A drawn batch costs one ballot cap's worth of reading per audited race
    present in it, so a batch shared by several audited races is more work
    than its ballot count alone suggests.
    """
    _aligned(spec, bounds)
    w = _vote_weights(spec, bounds.audited_races)
    return float((w * _inclusion_vector(bounds, n)).sum())


@dataclass(frozen=True)
class WorkloadExpectation:
    """Expected distinct batches, ballots, and votes for a sampling plan."""

    batches: float
    ballots: float
    votes: float


def expected_combined_independent(
    spec: ElectionSpec,
    audits: Sequence[tuple[ErrorBoundTable, int]],
) -> WorkloadExpectation:
    """Workload when several audits sample independently from the same batches.

    ``audits`` pairs each audit's bound table with its draw count. A batch is
    retrieved unless every audit misses it, so the miss probabilities
    multiply; votes accumulate per audit because each audit reads only its
    own races from a shared batch.
    """
    if not audits:
        return WorkloadExpectation(0.0, 0.0, 0.0)
    miss = np.ones(len(spec.batches), dtype=float)
    votes = 0.0
    for bounds, n in audits:
        _aligned(spec, bounds)
        inc = _inclusion_vector(bounds, n)
        miss *= 1.0 - inc
        votes += float((_vote_weights(spec, bounds.audited_races) * inc).sum())
    hit = 1.0 - miss
    ballots = np.array([b.total_ballots for b in spec.batches], dtype=float)
    return WorkloadExpectation(
        batches=float(hit.sum()),
        ballots=float((ballots * hit).sum()),
        votes=votes,
    )
