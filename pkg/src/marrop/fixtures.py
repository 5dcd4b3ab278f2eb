"""The bundled demonstration election.

A stylized county with 200 precincts, each reporting an in-precinct (IP)
batch of 400 ballots and a vote-by-mail (VBM) batch of 200. Three
two-candidate races overlap: race A is on every ballot, race B runs in
precincts 1-100, race C in precincts 71-130. Reported votes are uniform
within a batch kind, so the 400 batches fall into a handful of classes
with known error bounds, which makes every audit quantity checkable by
hand. Reported margins: A and B 6000, C 5400.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .election import BatchSpec, ElectionSpec, RaceSpec

IP_VOTES = {"A1": 200, "A2": 180, "B1": 200, "B2": 160, "C1": 200, "C2": 140}
VBM_VOTES = {"A1": 100, "A2": 90, "B1": 100, "B2": 80, "C1": 100, "C2": 70}


def _races_in_precinct(precinct: int) -> tuple[str, ...]:
    races = ["A"]
    if precinct <= 100:
        races.append("B")
    if 71 <= precinct <= 130:
        races.append("C")
    return tuple(races)


def cartoon_election() -> ElectionSpec:
    """Build the demonstration election programmatically."""
    races = (
        RaceSpec("A", 1, ("A1", "A2")),
        RaceSpec("B", 1, ("B1", "B2")),
        RaceSpec("C", 1, ("C1", "C2")),
    )
    batches = []
    for precinct in range(1, 201):
        present = _races_in_precinct(precinct)
        for kind, total, votes in (("IP", 400, IP_VOTES), ("VBM", 200, VBM_VOTES)):
            batches.append(
                BatchSpec(
                    batch_id=f"P{precinct:03d}-{kind}",
                    total_ballots=total,
                    ballot_caps={r: None for r in present},
                    reported_votes={
                        k: v
                        for k, v in votes.items()
                        if k[0] in present
                    },
                )
            )
    return ElectionSpec(races=races, batches=tuple(batches))


def cartoon_dir() -> Path:
    """Path to the bundled CSV copy of the demonstration election."""
    return Path(resources.files("marrop").joinpath("data", "cartoon"))
