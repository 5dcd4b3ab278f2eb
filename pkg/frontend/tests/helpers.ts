/** Canned server shapes and fixture loading shared by the test files. */

import { readFileSync } from "node:fs";
import type {
  BatchView,
  ElectionSummary,
  SessionView,
  WorkloadView,
} from "../src/types.js";
import type { RaceEntryContext } from "../src/validation.js";

export interface CapVector {
  name: string;
  counts: Record<string, number | string>;
  expect: "accepted" | "rejected";
}

export interface CapVectorFile {
  batch_id: string;
  open: { alpha: number; seed: number; n: number; races: string[] };
  context: RaceEntryContext[];
  vectors: CapVector[];
}

export function loadCapVectors(): CapVectorFile {
  const url = new URL("./fixtures/cap_vectors.json", import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as CapVectorFile;
}

/** Form inputs hold strings; vectors store what the auditor would type. */
export function asFormValues(
  counts: Record<string, number | string>,
): Record<string, string> {
  return Object.fromEntries(
    Object.entries(counts).map(([k, v]) => [k, String(v)]),
  );
}

export function makeElection(): ElectionSummary {
  return {
    election_id: "e-test",
    batches: 4,
    races: [
      {
        race_id: "A",
        allowed_votes: 1,
        candidates: ["A1", "A2"],
        winners: ["A1"],
        losers: ["A2"],
        min_margin: 6000,
      },
      {
        race_id: "B",
        allowed_votes: 1,
        candidates: ["B1", "B2"],
        winners: ["B1"],
        losers: ["B2"],
        min_margin: 6000,
      },
      {
        race_id: "C",
        allowed_votes: 1,
        candidates: ["C1", "C2"],
        winners: ["C1"],
        losers: ["C2"],
        min_margin: 5400,
      },
    ],
  };
}

export function makeBatch(overrides: Partial<BatchView> = {}): BatchView {
  return {
    batch_id: "P085-IP",
    total_ballots: 400,
    ballot_caps: { A: 400, B: 400, C: 400 },
    candidates: { A: ["A1", "A2"], B: ["B1", "B2"], C: ["C1", "C2"] },
    reported_votes: {
      A1: 200,
      A2: 180,
      B1: 200,
      B2: 160,
      C1: 200,
      C2: 140,
    },
    ...overrides,
  };
}

const ZERO_WORK: WorkloadView = { batches: 0, ballots: 0, votes: 0 };

export function makeSession(overrides: Partial<SessionView> = {}): SessionView {
  return {
    session_id: "s-test",
    election_id: "e-test",
    version: 0,
    status: "awaiting-counts",
    decision: "awaiting counts, P=1.000 >= 0.25, 3 draws pending",
    risk_limit: 0.25,
    seed: 7,
    planned_draws: 3,
    total_bound: 8.533333333333333,
    audited_races: ["A", "B", "C"],
    draws: ["P085-IP", "P101-IP", "P085-IP"],
    records: [],
    current_p: 1.0,
    pending: 3,
    next_batch: "P085-IP",
    next_batch_detail: makeBatch(),
    escalation_recommended: false,
    projections: {
      planned: { batches: 2.8, ballots: 990.5, votes: 1750.25 },
      remaining: { batches: 2.8, ballots: 990.5, votes: 1750.25 },
    },
    ...overrides,
  };
}

export function terminalSession(
  status: string,
  overrides: Partial<SessionView> = {},
): SessionView {
  return makeSession({
    status,
    pending: 0,
    next_batch: null,
    next_batch_detail: null,
    projections: { planned: { batches: 2.8, ballots: 990.5, votes: 1750.25 }, remaining: ZERO_WORK },
    ...overrides,
  });
}
