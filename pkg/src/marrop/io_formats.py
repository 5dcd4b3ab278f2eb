"""File formats: election CSV bundles, session JSON, report emission.

An election arrives as five small relational CSV files so that races can
appear on arbitrary subsets of batches without a ragged wide table:

    races.csv:          race_id,allowed_votes
    candidates.csv:     candidate_id,race_id
    batches.csv:        batch_id,total_ballots
    batch_races.csv:    batch_id,race_id,ballot_cap
    reported_votes.csv: batch_id,candidate_id,votes

A row in batch_races.csv is what makes a race present in a batch; an
empty ballot_cap defaults to the batch's total ballots. Votes are sparse
(absent row = zero).

Sessions persist as versioned JSON. P-values, taints, and bounds are
serialized as shortest round-trip decimal strings so a reloaded session
replays to bit-identical numbers on any platform. File writes go through
a write-temp-then-rename so a crash cannot leave a half-written document.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .bounds import ErrorBoundTable, total_error_bound
from .election import BatchSpec, ElectionSpec, HandCount, RaceSpec
from .errors import (
    CorruptDocument,
    DuplicateId,
    ParseError,
    SchemaVersionMismatch,
    UnknownReference,
    ValidationError,
)
from .kaplan_markov import (
    AWAITING_COUNTS,
    CERTIFIABLE,
    ESCALATE_FULL_COUNT,
    EXHAUSTED,
    AuditSession,
    TaintRecord,
)

SESSION_SCHEMA_VERSION = 1

ELECTION_FILES = (
    "races.csv",
    "candidates.csv",
    "batches.csv",
    "batch_races.csv",
    "reported_votes.csv",
)


@dataclass(frozen=True)
class ElectionFileSet:
    """The five election inputs, as paths or readable text/byte streams."""

    races: object
    candidates: object
    batches: object
    batch_races: object
    reported_votes: object

    @classmethod
    def from_dir(cls, directory) -> "ElectionFileSet":
        d = Path(directory)
        return cls(*(d / name for name in ELECTION_FILES))


def _rows(source, expected_header: tuple[str, ...], filename: str):
    """Yield (line_number, row_dict) after checking the exact header."""
    if hasattr(source, "read"):
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    else:
        path = Path(source)
        if not path.exists():
            raise ParseError(f"{filename}: file not found: {path}", line=None)
        text = path.read_text(encoding="utf-8-sig")
    # text streams may still carry a decoded BOM character
    text = text.lstrip("﻿")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{filename}: empty file", line=1) from None
    header = tuple(h.strip() for h in header)
    if header != expected_header:
        raise ParseError(
            f"{filename}: expected header {','.join(expected_header)!r}, "
            f"got {','.join(header)!r}",
            line=1,
        )
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(expected_header):
            raise ParseError(
                f"{filename}: expected {len(expected_header)} fields, "
                f"got {len(row)}",
                line=line_no,
            )
        yield line_no, dict(zip(expected_header, (cell.strip() for cell in row)))


def _int_field(row, column, filename, line_no, allow_empty=False):
    raw = row[column]
    if raw == "" and allow_empty:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ParseError(
            f"{filename}: {column} must be an integer, got {raw!r}",
            line=line_no,
            column=column,
        ) from None


def load_election(files) -> ElectionSpec:
    """Load and validate an election from a file set or a directory."""
    if not isinstance(files, ElectionFileSet):
        files = ElectionFileSet.from_dir(files)

    allowed: dict[str, int] = {}
    race_order: list[str] = []
    for line_no, row in _rows(files.races, ("race_id", "allowed_votes"), "races.csv"):
        race_id = row["race_id"]
        if race_id in allowed:
            raise DuplicateId(f"races.csv line {line_no}: duplicate race {race_id!r}")
        allowed[race_id] = _int_field(row, "allowed_votes", "races.csv", line_no)
        race_order.append(race_id)

    candidates: dict[str, list[str]] = {r: [] for r in race_order}
    for line_no, row in _rows(
        files.candidates, ("candidate_id", "race_id"), "candidates.csv"
    ):
        race_id = row["race_id"]
        if race_id not in candidates:
            raise UnknownReference(
                f"candidates.csv line {line_no}: unknown race {race_id!r}"
            )
        candidates[race_id].append(row["candidate_id"])

    totals: dict[str, int] = {}
    batch_order: list[str] = []
    for line_no, row in _rows(
        files.batches, ("batch_id", "total_ballots"), "batches.csv"
    ):
        batch_id = row["batch_id"]
        if batch_id in totals:
            raise DuplicateId(
                f"batches.csv line {line_no}: duplicate batch {batch_id!r}"
            )
        totals[batch_id] = _int_field(row, "total_ballots", "batches.csv", line_no)
        batch_order.append(batch_id)

    caps: dict[str, dict[str, int | None]] = {b: {} for b in batch_order}
    for line_no, row in _rows(
        files.batch_races, ("batch_id", "race_id", "ballot_cap"), "batch_races.csv"
    ):
        batch_id, race_id = row["batch_id"], row["race_id"]
        if batch_id not in caps:
            raise ParseError(
                f"batch_races.csv line {line_no}: unknown batch {batch_id!r}",
                line=line_no,
                column="batch_id",
            )
        if race_id in caps[batch_id]:
            raise DuplicateId(
                f"batch_races.csv line {line_no}: duplicate (batch, race) "
                f"({batch_id!r}, {race_id!r})"
            )
        caps[batch_id][race_id] = _int_field(
            row, "ballot_cap", "batch_races.csv", line_no, allow_empty=True
        )

    votes: dict[str, dict[str, int]] = {b: {} for b in batch_order}
    for line_no, row in _rows(
        files.reported_votes, ("batch_id", "candidate_id", "votes"), "reported_votes.csv"
    ):
        batch_id, cand = row["batch_id"], row["candidate_id"]
        if batch_id not in votes:
            raise ParseError(
                f"reported_votes.csv line {line_no}: unknown batch {batch_id!r}",
                line=line_no,
                column="batch_id",
            )
        if cand in votes[batch_id]:
            raise DuplicateId(
                f"reported_votes.csv line {line_no}: duplicate (batch, candidate) "
                f"({batch_id!r}, {cand!r})"
            )
        votes[batch_id][cand] = _int_field(row, "votes", "reported_votes.csv", line_no)

    races = tuple(
        RaceSpec(
            race_id=r,
            allowed_votes=allowed[r],
            candidate_ids=tuple(candidates[r]),
        )
        for r in race_order
    )
    batches = tuple(
        BatchSpec(
            batch_id=b,
            total_ballots=totals[b],
            ballot_caps=caps[b],
            reported_votes=votes[b],
        )
        for b in batch_order
    )
    return ElectionSpec(races=races, batches=batches)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_election(spec: ElectionSpec, directory) -> None:
    """Write the five CSVs for a validated election into a directory."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)

    def table(header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()

    _atomic_write(
        d / "races.csv",
        table(
            ("race_id", "allowed_votes"),
            ((r.race_id, r.allowed_votes) for r in spec.races),
        ),
    )
    _atomic_write(
        d / "candidates.csv",
        table(
            ("candidate_id", "race_id"),
            ((k, r.race_id) for r in spec.races for k in r.candidate_ids),
        ),
    )
    _atomic_write(
        d / "batches.csv",
        table(
            ("batch_id", "total_ballots"),
            ((b.batch_id, b.total_ballots) for b in spec.batches),
        ),
    )
    _atomic_write(
        d / "batch_races.csv",
        table(
            ("batch_id", "race_id", "ballot_cap"),
            (
                (b.batch_id, race_id, cap)
                for b in spec.batches
                for race_id, cap in sorted(b.ballot_caps.items())
            ),
        ),
    )
    _atomic_write(
        d / "reported_votes.csv",
        table(
            ("batch_id", "candidate_id", "votes"),
            (
                (b.batch_id, k, v)
                for b in spec.batches
                for k, v in sorted(b.reported_votes.items())
            ),
        ),
    )


# ---- session documents ----


def save_session(session: AuditSession) -> dict:
    """Serialize a session to a JSON-ready document.

    P, taints, observed errors, and bounds become shortest round-trip
    decimal strings; float() on them restores the exact doubles.
    """
    b = session.bounds
    return {
        "schema_version": SESSION_SCHEMA_VERSION,
        "kind": "audit-session",
        "risk_limit": repr(float(session.risk_limit)),
        "audited_races": list(b.audited_races),
        "seed": session.seed,
        "planned_draws": session.planned_draws,
        "bounds": {
            "decimals": b.decimals,
            "batch_ids": list(b.batch_ids),
            "values": [repr(v) for v in b.values],
            "total": repr(b.total),
        },
        "draws": list(session.draws),
        "records": [
            {
                "draw_index": r.draw_index,
                "batch_id": r.batch_id,
                "observed_marrop": repr(r.observed_marrop),
                "bound": repr(r.bound),
                "taint": repr(r.taint),
            }
            for r in session.records
        ],
        "hand_counts": {
            batch_id: dict(sorted(hc.actual_votes.items()))
            for batch_id, hc in sorted(session.hand_counts.items())
        },
        "current_p": repr(session.current_p),
        "status": session.status,
    }


def _require(doc: dict, key: str):
    try:
        return doc[key]
    except (KeyError, TypeError):
        raise CorruptDocument(f"session document missing {key!r}") from None


def load_session(document, spec: ElectionSpec | None = None) -> AuditSession:
    """Rebuild a session from a document (or a JSON file path).

    When an election is supplied, the stored bound table is checked
    against a fresh recomputation so a session cannot silently run against
    edited data; without one the session can be inspected and replayed but
    not record new counts.
    """
    if not isinstance(document, dict):
        path = Path(document)
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CorruptDocument(f"no session document at {path}") from None
        except json.JSONDecodeError as exc:
            raise CorruptDocument(f"session document is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise CorruptDocument("session document must be a JSON object")
    version = _require(document, "schema_version")
    if version != SESSION_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"session schema_version {version!r}; this build reads "
            f"{SESSION_SCHEMA_VERSION}"
        )
    raw_bounds = _require(document, "bounds")
    try:
        bounds = ErrorBoundTable(
            audited_races=tuple(_require(document, "audited_races")),
            batch_ids=tuple(_require(raw_bounds, "batch_ids")),
            values=tuple(float(v) for v in _require(raw_bounds, "values")),
            decimals=_require(raw_bounds, "decimals"),
        )
        records = tuple(
            TaintRecord(
                draw_index=int(_require(r, "draw_index")),
                batch_id=str(_require(r, "batch_id")),
                observed_marrop=float(_require(r, "observed_marrop")),
                bound=float(_require(r, "bound")),
                taint=float(_require(r, "taint")),
            )
            for r in _require(document, "records")
        )
        hand_counts = {
            batch_id: HandCount(batch_id, votes)
            for batch_id, votes in _require(document, "hand_counts").items()
        }
        session = AuditSession(
            bounds=bounds,
            risk_limit=float(_require(document, "risk_limit")),
            seed=_require(document, "seed"),
            planned_draws=int(_require(document, "planned_draws")),
            draws=tuple(_require(document, "draws")),
            spec=spec,
            records=records,
            hand_counts=hand_counts,
            status=str(_require(document, "status")),
            current_p=float(_require(document, "current_p")),
        )
    except (ValueError, AttributeError) as exc:
        raise CorruptDocument(f"session document malformed: {exc}") from None
    if session.status not in {
        AWAITING_COUNTS, CERTIFIABLE, EXHAUSTED, ESCALATE_FULL_COUNT
    }:
        raise CorruptDocument(f"unknown session status {session.status!r}")
    if session.replay_pvalue() != session.current_p:
        raise CorruptDocument(
            "stored P does not replay from the stored taint records"
        )
    if spec is not None:
        recomputed = total_error_bound(
            spec, bounds.audited_races, decimals=bounds.decimals
        )
        if recomputed != bounds:
            raise ValidationError(
                "session bound table does not match this election"
            )
    return session


def write_session(session: AuditSession, path) -> None:
    """Persist a session document atomically."""
    doc = save_session(session)
    _atomic_write(path, json.dumps(doc, indent=2) + "\n")


# ---- reports ----


def session_report_dict(session: AuditSession) -> dict:
    """Session snapshot for reporting: same numbers the state machine holds."""
    return {
        "status": session.status,
        "risk_limit": session.risk_limit,
        "total_bound": session.total_bound,
        "audited_races": list(session.audited_races),
        "seed": session.seed,
        "planned_draws": session.planned_draws,
        "recorded": len(session.records),
        "pending": len(session.pending),
        "current_p": session.current_p,
        "escalation_recommended": session.escalation_recommended,
        "records": [
            {
                "draw_index": r.draw_index,
                "batch_id": r.batch_id,
                "observed_marrop": r.observed_marrop,
                "bound": r.bound,
                "taint": r.taint,
            }
            for r in session.records
        ],
    }


def decision_line(session: AuditSession) -> str:
    """One-line decision summary, e.g. 'certifiable, P=0.243 < 0.25'."""
    p = session.current_p
    a = session.risk_limit
    if session.status == CERTIFIABLE:
        if not session.records and session.total_bound < 1.0:
            return (
                f"certifiable, total error bound {session.total_bound:.3f} < 1 "
                f"(no audit needed)"
            )
        return f"certifiable, P={p:.3f} < {a:g}"
    if session.status == ESCALATE_FULL_COUNT:
        return "escalated to a full hand count"
    if session.status == EXHAUSTED:
        return f"exhausted, P={p:.3f} >= {a:g}; escalate or replan"
    line = f"awaiting counts, P={p:.3f} >= {a:g}, {len(session.pending)} draws pending"
    if session.escalation_recommended:
        line += "; escalation recommended (a taint of 1 was recorded)"
    return line


def session_report_text(session: AuditSession) -> str:
    lines = [
        f"audited races     {', '.join(session.audited_races)}",
        f"total error bound {session.total_bound:.3f}",
        f"risk limit        {session.risk_limit:g}",
        f"seed              {session.seed}",
        f"draws             {len(session.records)} recorded of "
        f"{session.planned_draws} planned",
        f"current P         {session.current_p:.6f}",
        f"decision          {decision_line(session)}",
    ]
    if session.records:
        lines.append("records           idx  batch            taint")
        for r in session.records:
            lines.append(
                f"                  {r.draw_index:>3}  {r.batch_id:<15}  {r.taint:.5f}"
            )
    return "\n".join(lines) + "\n"


def load_hand_counts_csv(source) -> list[HandCount]:
    """Read hand counts (batch_id,candidate_id,votes), grouped by batch.

    Rows for one batch must be contiguous or at least unique per
    (batch, candidate); the result keeps first-appearance batch order.
    """
    grouped: dict[str, dict[str, int]] = {}
    order: list[str] = []
    for line_no, row in _rows(
        source, ("batch_id", "candidate_id", "votes"), "hand_counts.csv"
    ):
        batch_id, cand = row["batch_id"], row["candidate_id"]
        votes = _int_field(row, "votes", "hand_counts.csv", line_no)
        if batch_id not in grouped:
            grouped[batch_id] = {}
            order.append(batch_id)
        if cand in grouped[batch_id]:
            raise DuplicateId(
                f"hand_counts.csv line {line_no}: duplicate (batch, candidate) "
                f"({batch_id!r}, {cand!r})"
            )
        grouped[batch_id][cand] = votes
    return [HandCount(b, grouped[b]) for b in order]
