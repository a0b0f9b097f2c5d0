// Typed client for the review service. All mutation goes through here.

import type {
  AnalyzeRequest,
  ItemDetail,
  ItemStatus,
  ItemSummary,
  JobResponse,
  QueueResponse,
  VerdictRequest,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

/** 409: someone (or another tab) already settled this item. */
export class ConflictError extends ApiError {}

export class NotFoundError extends ApiError {}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = "error";
  let message = `${response.status}`;
  try {
    const body = await response.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (response.status === 409) throw new ConflictError(response.status, code, message);
  if (response.status === 404) throw new NotFoundError(response.status, code, message);
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private reviewerId: string = "anonymous",
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Reviewer-Id": this.reviewerId,
      },
      body: JSON.stringify(body),
    });
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  async queue(minScore = 0, status?: ItemStatus): Promise<ItemSummary[]> {
    const params = new URLSearchParams({ min_score: String(minScore) });
    if (status) params.set("status", status);
    const body = await this.get<QueueResponse>(`/queue?${params}`);
    return body.items;
  }

  async item(itemId: string): Promise<ItemDetail> {
    return this.get<ItemDetail>(`/items/${itemId}`);
  }

  async submitVerdict(request: VerdictRequest): Promise<ItemSummary> {
    return this.post<ItemSummary>("/verdicts", request);
  }

  async analyze(request: AnalyzeRequest): Promise<string> {
    const body = await this.post<{ job_id: string }>("/analyze", request);
    return body.job_id;
  }

  async job(jobId: string): Promise<JobResponse> {
    return this.get<JobResponse>(`/jobs/${jobId}`);
  }
}
