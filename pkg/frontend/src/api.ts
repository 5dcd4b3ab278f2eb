/** Thin fetch client for the audit service.
 *
 * Every statistic the console shows comes back in these responses; the
 * client adds no computation beyond formatting. Network failures become
 * ServiceUnreachable so the UI can offer a retry, HTTP errors become
 * ApiError carrying the service's machine-readable code.
 */

import type { ElectionSummary, SessionView } from "./types.js";

export class ServiceUnreachable extends Error {
  constructor(cause?: unknown) {
    super("audit service unreachable");
    this.name = "ServiceUnreachable";
    (this as { cause?: unknown }).cause = cause;
  }
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** One CSV part of an election upload, already read out of its file. */
export interface FilePart {
  name: string;
  data: Uint8Array | string;
}

export interface ElectionUpload {
  races: FilePart;
  candidates: FilePart;
  batches: FilePart;
  batch_races: FilePart;
  reported_votes: FilePart;
}

export interface OpenSessionBody {
  alpha: number;
  seed: number;
  n: number;
  races: string[];
}

export interface HandCountBody {
  batch_id: string;
  counts: Record<string, unknown>;
  version: number;
}

async function errorFrom(response: Response): Promise<ApiError> {
  let code = "UnknownError";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && typeof body.code === "string") {
      code = body.code;
      message = String(body.message ?? message);
    } else if (body && body.detail !== undefined) {
      // request-schema rejections arrive as a detail list, not {code, message}
      code = "RequestInvalid";
      message = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON body: keep the status line
  }
  return new ApiError(response.status, code, message);
}

export class AuditApi {
  constructor(readonly baseUrl: string) {}

  private async send<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (cause) {
      throw new ServiceUnreachable(cause);
    }
    if (!response.ok) {
      throw await errorFrom(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.send<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async uploadElection(upload: ElectionUpload): Promise<ElectionSummary> {
    const form = new FormData();
    for (const field of [
      "races",
      "candidates",
      "batches",
      "batch_races",
      "reported_votes",
    ] as const) {
      const part = upload[field];
      // copy into a fresh buffer so any typed-array view satisfies BlobPart
      const data =
        typeof part.data === "string"
          ? part.data
          : new Uint8Array(part.data).buffer;
      form.append(field, new Blob([data], { type: "text/csv" }), part.name);
    }
    return this.send<ElectionSummary>("/elections", {
      method: "POST",
      body: form,
    });
  }

  getElection(electionId: string): Promise<ElectionSummary> {
    return this.send(`/elections/${encodeURIComponent(electionId)}`);
  }

  openSession(electionId: string, body: OpenSessionBody): Promise<SessionView> {
    return this.post(
      `/elections/${encodeURIComponent(electionId)}/sessions`,
      body,
    );
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.send(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  recordHandCount(sessionId: string, body: HandCountBody): Promise<SessionView> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/handcounts`, body);
  }

  escalate(sessionId: string, version: number): Promise<SessionView> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/escalate`, {
      version,
    });
  }
}
