// Thin typed client over the HTTP API, with polling for job completion.

import type {
  ApiErrorDetail,
  JobRecord,
  ProfileJson,
  ReportJson,
  SpecHandle,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ApiErrorDetail,
  ) {
    super(detail.error);
  }
}

async function throwFrom(resp: Response): Promise<never> {
  let detail: ApiErrorDetail = { error: `HTTP ${resp.status}` };
  try {
    detail = await resp.json();
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(resp.status, detail);
}

export interface PollOptions {
  intervalMs?: number;
  maxIntervalMs?: number;
  backoff?: number;
  onProgress?: (record: JobRecord) => void;
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  async uploadSpec(body: string | Blob, contentType: string): Promise<SpecHandle> {
    const resp = await fetch(`${this.baseUrl}/api/specs`, {
      method: "POST",
      headers: { "content-type": contentType },
      body,
    });
    if (!resp.ok) await throwFrom(resp);
    return resp.json();
  }

  async createJob(
    specId: string,
    budget: string,
    profile: ProfileJson,
  ): Promise<JobRecord> {
    const resp = await fetch(`${this.baseUrl}/api/jobs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ spec_id: specId, budget, profile }),
    });
    if (!resp.ok) await throwFrom(resp);
    return resp.json();
  }

  async getJob(jobId: string): Promise<JobRecord> {
    const resp = await fetch(`${this.baseUrl}/api/jobs/${jobId}`);
    if (!resp.ok) await throwFrom(resp);
    return resp.json();
  }

  async getReport(jobId: string): Promise<ReportJson> {
    const resp = await fetch(`${this.baseUrl}/api/jobs/${jobId}/report`);
    if (!resp.ok) await throwFrom(resp);
    return resp.json();
  }

  /** Poll a job until it settles, backing off between polls. */
  async pollUntilDone(jobId: string, options: PollOptions = {}): Promise<JobRecord> {
    const { intervalMs = 150, maxIntervalMs = 2000, backoff = 1.5, onProgress } = options;
    let wait = intervalMs;
    for (;;) {
      const record = await this.getJob(jobId);
      onProgress?.(record);
      if (record.state === "done" || record.state === "failed") {
        return record;
      }
      await new Promise((resolve) => setTimeout(resolve, wait));
      wait = Math.min(wait * backoff, maxIntervalMs);
    }
  }
}
