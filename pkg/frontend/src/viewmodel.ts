/** Pure derivations from server snapshots to render models.
 *
 * Nothing here computes a statistic: every number is lifted verbatim from
 * the latest session snapshot and only formatted for display.
 */

import { formatBatches, formatStat, formatVolume } from "./format.js";
import type { SessionView } from "./types.js";

/** Session header, e.g. "U = 22.717, expected batches 34.3". */
export function headerLine(session: SessionView): string {
  const u = formatStat(session.total_bound);
  const batches = formatBatches(session.projections.planned.batches);
  return `U = ${u}, expected batches ${batches}`;
}

export interface PBadge {
  text: string;
  /** full-precision value for the hover title */
  raw: string;
}

export function pBadge(session: SessionView): PBadge {
  return { text: formatStat(session.current_p), raw: String(session.current_p) };
}

export interface DecisionPanelModel {
  status: string;
  /** the server's one-line decision, shown as the banner text */
  message: string;
  certifyEnabled: boolean;
  escalateEnabled: boolean;
  escalationRecommended: boolean;
  remainingBatches: string;
  remainingBallots: string;
  remainingVotes: string;
}

export function decisionPanel(session: SessionView): DecisionPanelModel {
  const remaining = session.projections.remaining;
  return {
    status: session.status,
    message: session.decision,
    certifyEnabled: session.status === "certifiable",
    // the service refuses to escalate a session that already reached a
    // terminal state, so the control follows the same rule
    escalateEnabled:
      session.status === "awaiting-counts" || session.status === "exhausted",
    escalationRecommended: session.escalation_recommended,
    remainingBatches: formatBatches(remaining.batches),
    remainingBallots: formatVolume(remaining.ballots),
    remainingVotes: formatVolume(remaining.votes),
  };
}

/** Session id carried in the URL fragment, "#/sessions/<id>". */
export function sessionIdFromHash(hash: string): string | null {
  const match = /^#\/sessions\/([^/]+)$/.exec(hash);
  return match ? decodeURIComponent(match[1]) : null;
}

export function hashForSession(sessionId: string): string {
  return `#/sessions/${encodeURIComponent(sessionId)}`;
}
