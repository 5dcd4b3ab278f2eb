/** HTML rendering for the console. State in, markup out; event wiring
 * stays in the controller via delegation on data-action attributes.
 */

import { decisionPanel, headerLine, pBadge } from "./viewmodel.js";
import { entryContexts } from "./validation.js";
import { formatStat } from "./format.js";
import { UPLOAD_SLOTS } from "./state.js";
import type { AppState, AuditState, Banner, SetupState } from "./state.js";
import type { FieldIssue } from "./validation.js";

function esc(text: unknown): string {
  return String(text)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function bannerHtml(banner: Banner | null): string {
  if (!banner) return "";
  const retry =
    banner.kind === "unreachable"
      ? ' <button type="button" data-action="retry" data-testid="retry-btn">retry</button>'
      : "";
  return (
    `<div class="banner banner-${banner.kind}" data-testid="banner" ` +
    `data-kind="${banner.kind}">${esc(banner.message)}${retry}</div>`
  );
}

function fieldError(errors: Record<string, string>, name: string): string {
  const message = errors[name];
  if (!message) return "";
  return (
    `<div class="field-error" data-testid="setup-error-${name}">` +
    `${esc(message)}</div>`
  );
}

function setupHtml(setup: SetupState, busy: boolean): string {
  const fileInputs = UPLOAD_SLOTS.map((slot) => {
    const loaded = setup.files[slot];
    const note = loaded ? ` <span class="loaded">${esc(loaded.name)}</span>` : "";
    return (
      `<label class="file-slot">${slot}.csv ` +
      `<input type="file" accept=".csv" data-file="${slot}" ` +
      `data-testid="file-${slot}">${note}</label>`
    );
  }).join("\n");

  let openSection = "";
  const election = setup.election;
  if (election) {
    const raceRows = election.races
      .map(
        (r) =>
          `<tr><td>${esc(r.race_id)}</td>` +
          `<td>${esc(r.winners.join(", "))}</td>` +
          `<td>${esc(r.min_margin)}</td>` +
          `<td><input type="checkbox" data-race="${esc(r.race_id)}" ` +
          `data-testid="race-${esc(r.race_id)}"` +
          `${setup.racesChecked[r.race_id] ? " checked" : ""}></td></tr>`,
      )
      .join("\n");
    openSection = `
      <div data-testid="election-summary">
        <p>election ${esc(election.election_id)}: ${election.batches} batches</p>
        <table>
          <thead><tr><th>race</th><th>winners</th><th>margin</th><th>audit</th></tr></thead>
          <tbody>${raceRows}</tbody>
        </table>
        ${fieldError(setup.fieldErrors, "races")}
      </div>
      <div class="open-fields">
        <label>risk limit &alpha;
          <input data-field="alpha" data-testid="field-alpha" value="${esc(setup.fields.alpha)}">
        </label>
        ${fieldError(setup.fieldErrors, "alpha")}
        <label>ceremony seed
          <input data-field="seed" data-testid="field-seed" value="${esc(setup.fields.seed)}">
        </label>
        ${fieldError(setup.fieldErrors, "seed")}
        <label>planned draws
          <input data-field="n" data-testid="field-n" value="${esc(setup.fields.n)}">
        </label>
        ${fieldError(setup.fieldErrors, "n")}
        <button type="button" data-action="open" data-testid="open-btn"${busy ? " disabled" : ""}>
          Open audit
        </button>
      </div>`;
  }

  return `
    <section data-testid="setup">
      <h1>audit console</h1>
      ${bannerHtml(setup.banner)}
      <div class="uploads">
        ${fileInputs}
        ${fieldError(setup.fieldErrors, "files")}
        <button type="button" data-action="upload" data-testid="upload-btn"${busy ? " disabled" : ""}>
          Load election
        </button>
      </div>
      ${openSection}
    </section>`;
}

function issueHtml(issues: FieldIssue[], field: string): string {
  const hit = issues.find((issue) => issue.field === field);
  if (!hit) return "";
  const id = field.startsWith("race:")
    ? `issue-race-${field.slice(5)}`
    : `issue-${field}`;
  return `<div class="field-error" data-testid="${esc(id)}">${esc(hit.message)}</div>`;
}

function entryCardHtml(audit: AuditState, busy: boolean): string {
  const session = audit.session;
  const batch = session.next_batch_detail;
  if (!batch) return "";
  const contexts = entryContexts(batch, audit.election);
  const groups = contexts
    .map((ctx) => {
      const fields = ctx.candidateIds
        .map((cid) => {
          const value = audit.entryValues[cid] ?? "";
          const reported = batch.reported_votes[cid];
          return (
            `<label class="count-field">${esc(cid)} ` +
            `<input inputmode="numeric" data-count="${esc(cid)}" ` +
            `data-testid="count-${esc(cid)}" value="${esc(value)}"> ` +
            `<span class="reported" data-testid="reported-${esc(cid)}">` +
            `reported ${esc(reported)}</span></label>` +
            issueHtml(audit.entryIssues, cid)
          );
        })
        .join("\n");
      return (
        `<fieldset data-testid="entry-race-${esc(ctx.raceId)}">` +
        `<legend>race ${esc(ctx.raceId)} (ballot cap ${ctx.cap})</legend>` +
        `${fields}${issueHtml(audit.entryIssues, `race:${ctx.raceId}`)}</fieldset>`
      );
    })
    .join("\n");
  const drawNumber = session.records.length + 1;
  return `
    <div class="entry-card" data-testid="entry-card">
      <h2 data-testid="entry-title">draw ${drawNumber} of ${session.planned_draws}:
        batch ${esc(batch.batch_id)}</h2>
      <p>${batch.total_ballots} ballots; blank fields submit as zero</p>
      ${groups}
      <button type="button" data-action="record" data-testid="record-btn"${busy ? " disabled" : ""}>
        Record hand count
      </button>
    </div>`;
}

function recordsHtml(audit: AuditState): string {
  const records = audit.session.records;
  if (!records.length) return "";
  const rows = records
    .slice()
    .reverse()
    .map(
      (r) =>
        `<tr data-testid="record-row" data-batch="${esc(r.batch_id)}">` +
        `<td>${r.draw_index}</td><td>${esc(r.batch_id)}</td>` +
        `<td><span class="chip" data-testid="taint-chip" ` +
        `title="${esc(r.taint)}">${formatStat(r.taint)}</span></td></tr>`,
    )
    .join("\n");
  return `
    <table class="records" data-testid="records">
      <thead><tr><th>draw</th><th>batch</th><th>taint</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

function drawListHtml(audit: AuditState): string {
  const session = audit.session;
  const counted = session.records.length;
  const items = session.draws
    .map((batchId, index) => {
      const done = index < counted ? ' class="done"' : "";
      return `<li${done}>${esc(batchId)}</li>`;
    })
    .join("\n");
  return `<ol class="draw-list" data-testid="draw-list">${items}</ol>`;
}

function auditHtml(audit: AuditState, busy: boolean): string {
  const session = audit.session;
  const panel = decisionPanel(session);
  const badge = pBadge(session);
  const conflict = audit.conflict
    ? `<div class="banner banner-conflict" data-testid="conflict-banner">
        another entry changed this session; refresh to continue
        <button type="button" data-action="refresh" data-testid="refresh-btn">Refresh</button>
      </div>`
    : "";
  const escalation = panel.escalationRecommended
    ? `<div class="banner banner-escalation" data-testid="escalation-banner">
        escalation recommended
      </div>`
    : "";
  const certified = audit.certified
    ? `<div class="certified" data-testid="certified-note">
        outcome certified: ${esc(session.decision)}
      </div>`
    : "";
  return `
    <section data-testid="audit">
      ${bannerHtml(audit.banner)}
      ${conflict}
      <header>
        <h1>audit session ${esc(session.session_id)}</h1>
        <p data-testid="header-line">${esc(headerLine(session))}</p>
        <p>risk limit ${esc(session.risk_limit)}; seed ${esc(session.seed)};
          races ${esc(session.audited_races.join(", "))};
          ${session.records.length} of ${session.planned_draws} draws recorded</p>
        <p>
          <span class="status" data-testid="status-chip">${esc(session.status)}</span>
          P = <span class="p-badge" data-testid="p-badge" title="${esc(badge.raw)}">${badge.text}</span>
        </p>
      </header>
      <div class="decision" data-testid="decision-panel">
        <p data-testid="decision-message">${esc(panel.message)}</p>
        ${escalation}
        <button type="button" data-action="certify" data-testid="certify-btn"
          ${panel.certifyEnabled && !busy ? "" : "disabled"}>Certify outcome</button>
        <button type="button" data-action="escalate" data-testid="escalate-btn"
          ${panel.escalateEnabled && !busy ? "" : "disabled"}>Escalate to full hand count</button>
        <p>expected remaining work:
          <span data-testid="remaining-batches">${panel.remainingBatches}</span> batches,
          <span data-testid="remaining-ballots">${panel.remainingBallots}</span> ballots,
          <span data-testid="remaining-votes">${panel.remainingVotes}</span> votes</p>
        ${certified}
      </div>
      ${entryCardHtml(audit, busy)}
      ${recordsHtml(audit)}
      ${drawListHtml(audit)}
    </section>`;
}

export function render(root: HTMLElement, state: AppState): void {
  if (state.phase === "audit" && state.audit) {
    root.innerHTML = auditHtml(state.audit, state.busy);
  } else {
    root.innerHTML = setupHtml(state.setup, state.busy);
  }
}
