import sys

import pytest

from marrop.election import BatchSpec, ElectionSpec, RaceSpec
from marrop.fixtures import cartoon_election


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def build_desk_election() -> ElectionSpec:
    """A 20-batch election small enough for exhaustive simulation.

    Race X runs in all 20 batches (100 ballots each, reported 55/35 per
    batch, margin 400); race Y runs in batches D01-D06 (reported 60/30,
    margin 180). Total error bound 8.5333.
    """
    races = (
        RaceSpec("X", 1, ("X1", "X2")),
        RaceSpec("Y", 1, ("Y1", "Y2")),
    )
    batches = []
    for i in range(1, 21):
        present = {"X": None}
        votes = {"X1": 55, "X2": 35}
        if i <= 6:
            present["Y"] = None
            votes.update({"Y1": 60, "Y2": 30})
        batches.append(
            BatchSpec(
                batch_id=f"D{i:02d}",
                total_ballots=100,
                ballot_caps=present,
                reported_votes=votes,
            )
        )
    return ElectionSpec(races=races, batches=tuple(batches))


@pytest.fixture(scope="session")
def cartoon() -> ElectionSpec:
    return cartoon_election()


@pytest.fixture(scope="session")
def desk() -> ElectionSpec:
    return build_desk_election()
