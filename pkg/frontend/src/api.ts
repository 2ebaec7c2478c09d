/**
 * Thin typed client over the annotation service. All writes go through
 * POST /annotations; everything displayed is re-fetched from the service.
 */

import type {
  CandidateCard,
  EvaluationResponse,
  IterationRow,
  RunStatus,
  SubmitResult,
} from "./types.js";

/** The request_id was already answered (by this or another session). */
export class ConflictError extends Error {
  readonly requestId: string;

  constructor(requestId: string, detail: string) {
    super(detail);
    this.name = "ConflictError";
    this.requestId = requestId;
  }
}

export class ServiceError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "ServiceError";
    this.status = status;
  }
}

type FetchLike = typeof fetch;

async function detailOf(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: string };
    if (typeof body.detail === "string") return body.detail;
  } catch {
    // non-JSON error body; fall through to statusText
  }
  return res.statusText || `HTTP ${res.status}`;
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path);
    if (!res.ok) throw new ServiceError(res.status, await detailOf(res));
    return (await res.json()) as T;
  }

  status(): Promise<RunStatus> {
    return this.get<RunStatus>("/status");
  }

  async candidates(): Promise<CandidateCard[]> {
    const body = await this.get<{ candidates: CandidateCard[] }>("/candidates");
    return body.candidates;
  }

  evaluation(): Promise<EvaluationResponse> {
    return this.get<EvaluationResponse>("/evaluation");
  }

  async iterations(): Promise<IterationRow[]> {
    const body = await this.get<{ iterations: IterationRow[] }>("/iterations");
    return body.iterations;
  }

  /**
   * Submit one label. Throws ConflictError on 409 (already answered);
   * network failures reject and may be retried safely: the request_id
   * makes the write idempotent server-side.
   */
  async submit(requestId: string, label: boolean): Promise<SubmitResult> {
    const res = await this.fetchImpl(this.baseUrl + "/annotations", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ request_id: requestId, label }),
    });
    if (res.status === 409) {
      throw new ConflictError(requestId, await detailOf(res));
    }
    if (!res.ok) throw new ServiceError(res.status, await detailOf(res));
    return (await res.json()) as SubmitResult;
  }

  async startRun(config: Record<string, unknown>, runId?: string): Promise<string> {
    const res = await this.fetchImpl(this.baseUrl + "/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(runId ? { config, run_id: runId } : { config }),
    });
    if (!res.ok) throw new ServiceError(res.status, await detailOf(res));
    const body = (await res.json()) as { run_id: string };
    return body.run_id;
  }

  async resumeRun(runId: string): Promise<void> {
    const res = await this.fetchImpl(
      this.baseUrl + `/runs/${encodeURIComponent(runId)}/resume`,
      { method: "POST" },
    );
    if (!res.ok) throw new ServiceError(res.status, await detailOf(res));
  }
}
