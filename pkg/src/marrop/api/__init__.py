"""HTTP service for the audit console.

JSON over HTTP; every session response is the full recomputed snapshot,
so clients render numbers rather than computing them. Mutations carry
the resource version they were computed against and are rejected loudly
(409) when stale: an audit room needs a second writer to find out, not
to be queued.

Error payloads are {code, message} with the domain exception class name
as the machine-readable code. Uploads that fail validation return 400;
invalid hand counts and other domain violations 422; state and version
conflicts 409; unknown ids 404.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..election import ElectionSpec, HandCount
from ..errors import (
    AlreadyTerminal,
    AuditError,
    ParseError,
    WrongBatch,
)
from ..io_formats import ElectionFileSet, decision_line, load_election
from ..kaplan_markov import AuditSession, open_session
from .models import (
    BatchView,
    ElectionSummary,
    ErrorPayload,
    EscalateRequest,
    HandCountRequest,
    OpenSessionRequest,
    ProjectionsView,
    RaceSummary,
    SessionView,
    TaintRecordView,
    WorkloadView,
)
from .storage import NotFound, SessionState, Store, VersionConflict


def _status_for(exc: AuditError) -> int:
    if isinstance(exc, NotFound):
        return 404
    if isinstance(exc, (VersionConflict, WrongBatch, AlreadyTerminal)):
        return 409
    if isinstance(exc, ParseError):
        return 400
    return 422


def _election_summary(election_id: str, spec: ElectionSpec) -> ElectionSummary:
    races = []
    for r in spec.races:
        margins = [
            spec.totals[w] - spec.totals[l]
            for w, l in spec.winner_loser_pairs(r.race_id)
        ]
        races.append(
            RaceSummary(
                race_id=r.race_id,
                allowed_votes=r.allowed_votes,
                candidates=list(r.candidate_ids),
                winners=list(spec.winners[r.race_id]),
                losers=list(spec.losers[r.race_id]),
                min_margin=min(margins),
            )
        )
    return ElectionSummary(
        election_id=election_id, batches=len(spec.batches), races=races
    )


def _workload(session: AuditSession, spec: ElectionSpec, n: int,
              exclude_counted: bool) -> WorkloadView:
    bounds = session.bounds
    total = bounds.total
    if n <= 0 or not total > 0.0:
        return WorkloadView(batches=0.0, ballots=0.0, votes=0.0)
    v = np.asarray(bounds.values, dtype=float)
    inc = 1.0 - (1.0 - v / total) ** n
    if exclude_counted:
        counted = np.array(
            [b in session.hand_counts for b in bounds.batch_ids], dtype=bool
        )
        inc = np.where(counted, 0.0, inc)
    ballots = np.array([b.total_ballots for b in spec.batches], dtype=float)
    audited = set(bounds.audited_races)
    votes = np.array(
        [
            sum(cap for r, cap in b.ballot_caps.items() if r in audited)
            for b in spec.batches
        ],
        dtype=float,
    )
    return WorkloadView(
        batches=float(inc.sum()),
        ballots=float((ballots * inc).sum()),
        votes=float((votes * inc).sum()),
    )


def _batch_view(spec: ElectionSpec, session: AuditSession,
                batch_id: str) -> BatchView:
    batch = spec.batch_by_id[batch_id]
    audited = set(session.audited_races)
    present = [r for r in spec.race_ids if r in audited and batch.has_race(r)]
    candidates = {r: list(spec.race_by_id[r].candidate_ids) for r in present}
    shown = {k for ks in candidates.values() for k in ks}
    return BatchView(
        batch_id=batch_id,
        total_ballots=batch.total_ballots,
        ballot_caps={r: batch.ballot_caps[r] for r in present},
        candidates=candidates,
        reported_votes={
            k: batch.votes(k) for k in shown
        },
    )


def _session_view(session_id: str, state: SessionState,
                  spec: ElectionSpec) -> SessionView:
    session = state.session
    next_batch = session.next_batch
    return SessionView(
        session_id=session_id,
        election_id=state.election_id,
        version=state.version,
        status=session.status,
        decision=decision_line(session),
        risk_limit=session.risk_limit,
        seed=session.seed,
        planned_draws=session.planned_draws,
        total_bound=session.total_bound,
        audited_races=list(session.audited_races),
        draws=list(session.draws),
        records=[
            TaintRecordView(
                draw_index=r.draw_index,
                batch_id=r.batch_id,
                observed_marrop=r.observed_marrop,
                bound=r.bound,
                taint=r.taint,
            )
            for r in session.records
        ],
        current_p=session.current_p,
        pending=len(session.pending),
        next_batch=next_batch,
        next_batch_detail=(
            _batch_view(spec, session, next_batch) if next_batch else None
        ),
        escalation_recommended=session.escalation_recommended,
        projections=ProjectionsView(
            planned=_workload(session, spec, session.planned_draws, False),
            remaining=_workload(session, spec, len(session.pending), True),
        ),
    )


def create_app(data_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="marrop audit service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = Store(data_dir)
    app.state.store = store

    @app.exception_handler(AuditError)
    async def _domain_error(request, exc: AuditError):
        payload = ErrorPayload(code=type(exc).__name__, message=str(exc))
        return JSONResponse(status_code=_status_for(exc), content=payload.model_dump())

    @app.post("/elections", response_model=ElectionSummary, status_code=201)
    async def upload_election(
        races: UploadFile = File(...),
        candidates: UploadFile = File(...),
        batches: UploadFile = File(...),
        batch_races: UploadFile = File(...),
        reported_votes: UploadFile = File(...),
    ):
        files = ElectionFileSet(
            races=io.BytesIO(await races.read()),
            candidates=io.BytesIO(await candidates.read()),
            batches=io.BytesIO(await batches.read()),
            batch_races=io.BytesIO(await batch_races.read()),
            reported_votes=io.BytesIO(await reported_votes.read()),
        )
        try:
            spec = load_election(files)
        except AuditError as exc:
            payload = ErrorPayload(code=type(exc).__name__, message=str(exc))
            return JSONResponse(status_code=400, content=payload.model_dump())
        election_id = store.add_election(spec)
        return _election_summary(election_id, spec)

    @app.get("/elections/{election_id}", response_model=ElectionSummary)
    async def get_election(election_id: str):
        return _election_summary(election_id, store.get_election(election_id))

    @app.post(
        "/elections/{election_id}/sessions",
        response_model=SessionView,
        status_code=201,
    )
    async def open_audit(election_id: str, request: OpenSessionRequest):
        spec = store.get_election(election_id)
        session = open_session(
            spec, request.races, request.alpha, request.seed, request.n
        )
        session_id = store.add_session(session, election_id)
        return _session_view(session_id, store.get_session(session_id), spec)

    @app.get("/sessions/{session_id}", response_model=SessionView)
    async def get_session(session_id: str):
        state = store.get_session(session_id)
        spec = store.get_election(state.election_id)
        return _session_view(session_id, state, spec)

    @app.post("/sessions/{session_id}/handcounts", response_model=SessionView)
    async def record_hand_count(session_id: str, request: HandCountRequest):
        count = HandCount(request.batch_id, request.counts)
        state = store.mutate(
            session_id, request.version, lambda s: s.record_batch(count)
        )
        spec = store.get_election(state.election_id)
        return _session_view(session_id, state, spec)

    @app.post("/sessions/{session_id}/escalate", response_model=SessionView)
    async def escalate(session_id: str, request: EscalateRequest):
        state = store.mutate(session_id, request.version, lambda s: s.escalate())
        spec = store.get_election(state.election_id)
        return _session_view(session_id, state, spec)

    return app


__all__ = ["create_app"]
