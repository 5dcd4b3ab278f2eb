"""Request and response bodies for the audit service.

Responses embed the full recomputed session snapshot: the console never
derives a statistic locally, it renders what the server sends.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class ErrorPayload(BaseModel):
    code: str
    message: str


class RaceSummary(BaseModel):
    race_id: str
    allowed_votes: int
    candidates: list[str]
    winners: list[str]
    losers: list[str]
    min_margin: int


class ElectionSummary(BaseModel):
    election_id: str
    batches: int
    races: list[RaceSummary]


class OpenSessionRequest(BaseModel):
    alpha: float
    seed: int
    n: int = Field(ge=1)
    races: list[str] = Field(min_length=1)


class HandCountRequest(BaseModel):
    batch_id: str
    counts: dict[str, int]
    version: int


class EscalateRequest(BaseModel):
    version: int


class TaintRecordView(BaseModel):
    draw_index: int
    batch_id: str
    observed_marrop: float
    bound: float
    taint: float


class WorkloadView(BaseModel):
    batches: float
    ballots: float
    votes: float


class ProjectionsView(BaseModel):
    planned: WorkloadView
    remaining: WorkloadView


class BatchView(BaseModel):
    """What the console needs to render one hand-count entry card."""

    batch_id: str
    total_ballots: int
    ballot_caps: dict[str, int]
    candidates: dict[str, list[str]]  # race_id -> candidate ids, audited races
    reported_votes: dict[str, int]


class SessionView(BaseModel):
    session_id: str
    election_id: str
    version: int
    status: str
    decision: str
    risk_limit: float
    seed: int | None
    planned_draws: int
    total_bound: float
    audited_races: list[str]
    draws: list[str]
    records: list[TaintRecordView]
    current_p: float
    pending: int
    next_batch: str | None
    next_batch_detail: BatchView | None
    escalation_recommended: bool
    projections: ProjectionsView
