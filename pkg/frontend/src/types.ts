/** JSON shapes served by the audit service. Mirrors its response models. */

export interface RaceSummary {
  race_id: string;
  allowed_votes: number;
  candidates: string[];
  winners: string[];
  losers: string[];
  min_margin: number;
}

export interface ElectionSummary {
  election_id: string;
  batches: number;
  races: RaceSummary[];
}

export interface WorkloadView {
  batches: number;
  ballots: number;
  votes: number;
}

export interface ProjectionsView {
  planned: WorkloadView;
  remaining: WorkloadView;
}

export interface TaintRecordView {
  draw_index: number;
  batch_id: string;
  observed_marrop: number;
  bound: number;
  taint: number;
}

export interface BatchView {
  batch_id: string;
  total_ballots: number;
  // race id -> cap / candidate ids, audited races present in the batch only
  ballot_caps: Record<string, number>;
  candidates: Record<string, string[]>;
  reported_votes: Record<string, number>;
}

export interface SessionView {
  session_id: string;
  election_id: string;
  version: number;
  status: string;
  decision: string;
  risk_limit: number;
  seed: number | null;
  planned_draws: number;
  total_bound: number;
  audited_races: string[];
  draws: string[];
  records: TaintRecordView[];
  current_p: number;
  pending: number;
  next_batch: string | null;
  next_batch_detail: BatchView | null;
  escalation_recommended: boolean;
  projections: ProjectionsView;
}

export interface ErrorPayload {
  code: string;
  message: string;
}
