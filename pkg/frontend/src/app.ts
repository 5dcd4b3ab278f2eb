/** Controller: owns the state, talks to the service, renders after every
 * completed action. Actions run strictly one at a time so a slow response
 * can never interleave with the next click; tests await idle() to observe
 * the settled state.
 */

import { ApiError, AuditApi, ServiceUnreachable } from "./api.js";
import { checkEntry, entryContexts } from "./validation.js";
import { initialState, UPLOAD_SLOTS } from "./state.js";
import { render } from "./render.js";
import type { AppState, Banner, UploadSlot } from "./state.js";

export interface UrlState {
  read(): string | null;
  write(sessionId: string): void;
}

export interface AppOptions {
  api: AuditApi;
  url?: UrlState;
}

type Command = () => Promise<void>;

const INTEGER = /^[+-]?\d+$/;

/** Read a picked file; falls back to FileReader where Blob.arrayBuffer
 * is missing, taking the constructor from the file input's own window.
 */
function readFileBytes(
  file: File,
  view: (Window & typeof globalThis) | null,
): Promise<Uint8Array> {
  if (typeof file.arrayBuffer === "function") {
    return file.arrayBuffer().then((buffer) => new Uint8Array(buffer));
  }
  const Reader =
    view?.FileReader ??
    (typeof FileReader !== "undefined" ? FileReader : undefined);
  if (!Reader) {
    return Promise.reject(new Error("no way to read the picked file"));
  }
  return new Promise((resolve, reject) => {
    const reader = new Reader();
    reader.onerror = () => reject(reader.error);
    reader.onload = () => resolve(new Uint8Array(reader.result as ArrayBuffer));
    reader.readAsArrayBuffer(file);
  });
}

export class AppController {
  readonly state: AppState = initialState();
  private tail: Promise<void> = Promise.resolve();
  private lastFailed: Command | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: AuditApi,
    private readonly url?: UrlState,
  ) {}

  /** Resolves once every queued action has settled. */
  idle(): Promise<void> {
    return this.tail;
  }

  start(): void {
    this.listen();
    this.render();
    const sessionId = this.url?.read() ?? null;
    if (sessionId) {
      this.run(() => this.resume(sessionId));
    }
  }

  render(): void {
    render(this.root, this.state);
  }

  private run(command: Command): void {
    this.tail = this.tail.then(async () => {
      this.state.busy = true;
      this.render();
      try {
        await command();
      } catch (err) {
        this.handleError(err, command);
      } finally {
        this.state.busy = false;
        this.render();
      }
    });
  }

  private setBanner(banner: Banner | null): void {
    if (this.state.phase === "audit" && this.state.audit) {
      this.state.audit.banner = banner;
    } else {
      this.state.setup.banner = banner;
    }
  }

  private handleError(err: unknown, retry: Command): void {
    if (err instanceof ServiceUnreachable) {
      this.lastFailed = retry;
      this.setBanner({
        kind: "unreachable",
        message: "audit service unreachable",
      });
      return;
    }
    if (err instanceof ApiError) {
      if (this.state.phase === "audit" && err.status === 409) {
        if (this.state.audit) this.state.audit.conflict = true;
        return;
      }
      if (this.state.phase === "setup" && err.code === "InvalidRiskLimit") {
        this.state.setup.fieldErrors = { alpha: err.message };
        return;
      }
      this.setBanner({ kind: "error", message: `${err.code}: ${err.message}` });
      return;
    }
    this.setBanner({ kind: "error", message: String(err) });
  }

  // ---- event wiring ----

  private listen(): void {
    this.root.addEventListener("click", (event) => {
      const target = (event.target as HTMLElement).closest?.("[data-action]");
      if (!target || this.state.busy) return;
      const action = (target as HTMLElement).dataset.action;
      if (action === "upload") this.run(() => this.upload());
      else if (action === "open") this.run(() => this.openSession());
      else if (action === "record") this.run(() => this.record());
      else if (action === "escalate") this.run(() => this.escalate());
      else if (action === "certify") this.certify();
      else if (action === "refresh") this.run(() => this.refresh());
      else if (action === "retry") this.retry();
    });

    this.root.addEventListener("input", (event) => {
      const el = event.target as HTMLInputElement;
      const field = el.dataset?.field;
      if (field && field in this.state.setup.fields) {
        this.state.setup.fields[field as "alpha" | "seed" | "n"] = el.value;
        return;
      }
      const candidate = el.dataset?.count;
      if (candidate && this.state.audit) {
        this.state.audit.entryValues[candidate] = el.value;
      }
    });

    this.root.addEventListener("change", (event) => {
      const el = event.target as HTMLInputElement;
      const slot = el.dataset?.file as UploadSlot | undefined;
      if (slot) {
        const file = el.files?.[0];
        if (file) {
          const view = el.ownerDocument.defaultView;
          this.run(async () => {
            const bytes = await readFileBytes(file, view);
            this.state.setup.files[slot] = { name: file.name, data: bytes };
          });
        }
        return;
      }
      const race = el.dataset?.race;
      if (race) {
        this.state.setup.racesChecked[race] = el.checked;
      }
    });
  }

  // ---- commands ----

  private async resume(sessionId: string): Promise<void> {
    const session = await this.api.getSession(sessionId);
    const election = await this.api.getElection(session.election_id);
    this.state.audit = {
      election,
      session,
      entryValues: {},
      entryIssues: [],
      conflict: false,
      banner: null,
      certified: false,
    };
    this.state.phase = "audit";
  }

  private async upload(): Promise<void> {
    const setup = this.state.setup;
    setup.fieldErrors = {};
    setup.banner = null;
    const missing = UPLOAD_SLOTS.filter((slot) => !setup.files[slot]);
    if (missing.length) {
      setup.fieldErrors = {
        files: `attach all five CSV files (missing: ${missing.join(", ")})`,
      };
      return;
    }
    const files = setup.files as Required<typeof setup.files>;
    const election = await this.api.uploadElection({
      races: files.races,
      candidates: files.candidates,
      batches: files.batches,
      batch_races: files.batch_races,
      reported_votes: files.reported_votes,
    });
    setup.election = election;
    setup.racesChecked = Object.fromEntries(
      election.races.map((r) => [r.race_id, true]),
    );
  }

  private async openSession(): Promise<void> {
    const setup = this.state.setup;
    if (!setup.election) return;
    setup.banner = null;
    const errors: Record<string, string> = {};
    const alphaText = setup.fields.alpha.trim();
    if (alphaText === "") {
      errors.alpha = "enter a risk limit";
    } else if (Number.isNaN(Number(alphaText))) {
      errors.alpha = "risk limit must be a number";
    }
    const seedText = setup.fields.seed.trim();
    if (seedText === "") {
      errors.seed = "enter the ceremony seed";
    } else if (!INTEGER.test(seedText)) {
      errors.seed = "seed must be an integer";
    }
    const nText = setup.fields.n.trim();
    if (nText === "") {
      errors.n = "enter the number of draws";
    } else if (!INTEGER.test(nText) || Number(nText) < 1) {
      errors.n = "draws must be a whole number of at least 1";
    }
    const races = setup.election.races
      .map((r) => r.race_id)
      .filter((raceId) => setup.racesChecked[raceId]);
    if (!races.length) {
      errors.races = "pick at least one race to audit";
    }
    setup.fieldErrors = errors;
    if (Object.keys(errors).length) return;

    const session = await this.api.openSession(setup.election.election_id, {
      alpha: Number(alphaText),
      seed: Number(seedText),
      n: Number(nText),
      races,
    });
    this.state.audit = {
      election: setup.election,
      session,
      entryValues: {},
      entryIssues: [],
      conflict: false,
      banner: null,
      certified: false,
    };
    this.state.phase = "audit";
    this.url?.write(session.session_id);
  }

  private async record(): Promise<void> {
    const audit = this.state.audit;
    if (!audit) return;
    const batch = audit.session.next_batch_detail;
    if (!batch) return;
    audit.banner = null;

    const contexts = entryContexts(batch, audit.election);
    const values: Record<string, string> = {};
    for (const ctx of contexts) {
      for (const cid of ctx.candidateIds) {
        values[cid] = audit.entryValues[cid] ?? "";
      }
    }
    const check = checkEntry(contexts, values);
    audit.entryIssues = check.issues;
    if (!check.counts) return;

    audit.session = await this.api.recordHandCount(audit.session.session_id, {
      batch_id: batch.batch_id,
      counts: check.counts,
      version: audit.session.version,
    });
    audit.entryValues = {};
    audit.entryIssues = [];
  }

  private async escalate(): Promise<void> {
    const audit = this.state.audit;
    if (!audit) return;
    audit.banner = null;
    audit.session = await this.api.escalate(
      audit.session.session_id,
      audit.session.version,
    );
  }

  private certify(): void {
    const audit = this.state.audit;
    if (!audit || audit.session.status !== "certifiable") return;
    audit.certified = true;
    this.render();
  }

  private async refresh(): Promise<void> {
    const audit = this.state.audit;
    if (!audit) return;
    audit.session = await this.api.getSession(audit.session.session_id);
    audit.conflict = false;
    audit.entryValues = {};
    audit.entryIssues = [];
  }

  private retry(): void {
    const command = this.lastFailed;
    if (!command) return;
    this.lastFailed = null;
    this.setBanner(null);
    this.run(command);
  }
}

export function boot(root: HTMLElement, options: AppOptions): AppController {
  const controller = new AppController(root, options.api, options.url);
  controller.start();
  return controller;
}
