import type { GenerateRequest, GenerateResult, SampleDetail, SampleSummary } from "./types.js";

/** Minimal slice of the fetch response the client relies on. */
export interface FetchResponse {
  status: number;
  ok: boolean;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<FetchResponse>;

export interface ApiErrorBody {
  error: string;
  field?: string;
}

/** Non-2xx service reply; `field` names the offending request field when known. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(body.error);
    this.name = "ApiError";
  }

  get field(): string | undefined {
    return this.body.field;
  }
}

async function errorFrom(response: FetchResponse): Promise<ApiError> {
  let body: ApiErrorBody = { error: `service answered ${response.status}` };
  try {
    const parsed = (await response.json()) as Record<string, unknown>;
    if (typeof parsed.error === "string") {
      body = { error: parsed.error, field: typeof parsed.field === "string" ? parsed.field : undefined };
    }
  } catch {
    // non-JSON error body; keep the status-only message
  }
  return new ApiError(response.status, body);
}

export class ExplorerApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {}

  async health(): Promise<{ status: string }> {
    return (await this.get("/healthz")) as { status: string };
  }

  async listSamples(): Promise<SampleSummary[]> {
    const data = (await this.get("/api/samples")) as { samples: SampleSummary[] };
    return data.samples;
  }

  async sampleDetail(sampleId: string): Promise<SampleDetail> {
    return (await this.get(`/api/samples/${encodeURIComponent(sampleId)}`)) as SampleDetail;
  }

  async generate(request: GenerateRequest): Promise<GenerateResult> {
    const response = await this.fetchFn(`${this.baseUrl}/api/generate`, {
      method: "POST",
      headers: { "content-type": "application/json", accept: "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as GenerateResult;
  }

  private async get(path: string): Promise<unknown> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { accept: "application/json" },
    });
    if (!response.ok) throw await errorFrom(response);
    return response.json();
  }
}
