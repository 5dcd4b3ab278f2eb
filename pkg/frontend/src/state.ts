/** Console state: one setup screen, then one live audit screen. */

import type { FilePart } from "./api.js";
import type { FieldIssue } from "./validation.js";
import type { ElectionSummary, SessionView } from "./types.js";

export const UPLOAD_SLOTS = [
  "races",
  "candidates",
  "batches",
  "batch_races",
  "reported_votes",
] as const;

export type UploadSlot = (typeof UPLOAD_SLOTS)[number];

export interface Banner {
  kind: "error" | "unreachable";
  message: string;
}

export interface SetupState {
  files: Partial<Record<UploadSlot, FilePart>>;
  election: ElectionSummary | null;
  fields: { alpha: string; seed: string; n: string };
  racesChecked: Record<string, boolean>;
  fieldErrors: Record<string, string>;
  banner: Banner | null;
}

export interface AuditState {
  election: ElectionSummary;
  session: SessionView;
  entryValues: Record<string, string>;
  entryIssues: FieldIssue[];
  /** a mutation hit a stale version; prompt for a refresh */
  conflict: boolean;
  banner: Banner | null;
  /** the auditor clicked certify on a certifiable session */
  certified: boolean;
}

export interface AppState {
  phase: "setup" | "audit";
  busy: boolean;
  setup: SetupState;
  audit: AuditState | null;
}

export function initialState(): AppState {
  return {
    phase: "setup",
    busy: false,
    setup: {
      files: {},
      election: null,
      fields: { alpha: "", seed: "", n: "" },
      racesChecked: {},
      fieldErrors: {},
      banner: null,
    },
    audit: null,
  };
}
