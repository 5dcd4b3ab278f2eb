/** Client-side hand-count validation.
 *
 * Mirrors the service's rules exactly so an entry is either blocked here
 * and would be rejected there, or passes here and is accepted there:
 * counts must name known candidates of races present in the batch, be
 * whole numbers, non-negative, per candidate at most the race ballot cap,
 * and per race sum to at most allowed_votes * cap. A blank field is an
 * uncounted candidate and submits as zero, which the service also accepts.
 */

import type { BatchView, ElectionSummary } from "./types.js";

export interface RaceEntryContext {
  raceId: string;
  cap: number;
  allowedVotes: number;
  candidateIds: string[];
}

export interface FieldIssue {
  /** candidate id, "race:<id>" for a race-total issue, or the unknown key */
  field: string;
  message: string;
}

export interface EntryCheck {
  /** parsed counts ready to submit, or null when any issue was found */
  counts: Record<string, number> | null;
  issues: FieldIssue[];
}

/** Entry contexts for the audited races present in a batch. */
export function entryContexts(
  batch: BatchView,
  election: ElectionSummary,
): RaceEntryContext[] {
  const allowed = new Map(
    election.races.map((r) => [r.race_id, r.allowed_votes]),
  );
  return Object.keys(batch.candidates).map((raceId) => ({
    raceId,
    cap: batch.ballot_caps[raceId],
    allowedVotes: allowed.get(raceId) ?? 1,
    candidateIds: batch.candidates[raceId],
  }));
}

const WHOLE_NUMBER = /^[+-]?\d+$/;

export function checkEntry(
  contexts: RaceEntryContext[],
  values: Record<string, string>,
): EntryCheck {
  const raceOf = new Map<string, RaceEntryContext>();
  for (const ctx of contexts) {
    for (const cid of ctx.candidateIds) {
      raceOf.set(cid, ctx);
    }
  }

  const issues: FieldIssue[] = [];
  const counts: Record<string, number> = {};
  const raceSums = new Map<string, number>();

  for (const [key, raw] of Object.entries(values)) {
    const ctx = raceOf.get(key);
    if (!ctx) {
      issues.push({ field: key, message: `unknown candidate ${key}` });
      continue;
    }
    const text = raw.trim();
    const value = text === "" ? 0 : Number(text);
    if (text !== "" && !WHOLE_NUMBER.test(text)) {
      issues.push({ field: key, message: "must be a whole number of votes" });
      continue;
    }
    if (value < 0) {
      issues.push({ field: key, message: "cannot be negative" });
      continue;
    }
    if (value > ctx.cap) {
      issues.push({
        field: key,
        message: `exceeds the race ${ctx.raceId} ballot cap ${ctx.cap}`,
      });
      continue;
    }
    counts[key] = value;
    raceSums.set(ctx.raceId, (raceSums.get(ctx.raceId) ?? 0) + value);
  }

  for (const ctx of contexts) {
    const sum = raceSums.get(ctx.raceId) ?? 0;
    const limit = ctx.allowedVotes * ctx.cap;
    if (sum > limit) {
      issues.push({
        field: `race:${ctx.raceId}`,
        message:
          `race ${ctx.raceId} counts sum to ${sum}, ` +
          `more than allowed votes x cap = ${limit}`,
      });
    }
  }

  return issues.length ? { counts: null, issues } : { counts, issues };
}
