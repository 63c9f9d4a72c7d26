import type { Band, Progress, Submission, Task } from "./types";

/** Server rejected the request (4xx/5xx); carries the parsed detail. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`request failed with ${status}`);
  }
}

/** The service could not be reached at all (offline, refused, timeout). */
export class NetworkError extends Error {}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    const text = await response.text();
    let body: unknown = text;
    try {
      body = text ? JSON.parse(text) : null;
    } catch {
      /* non-JSON bodies (CSV export) pass through as text */
    }
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body;
  }

  async tasks(status?: string, limit = 100, blind?: boolean): Promise<Task[]> {
    const params = new URLSearchParams();
    if (status) params.set("status", status);
    params.set("limit", String(limit));
    if (blind !== undefined) params.set("blind", String(blind));
    return (await this.request(`/tasks?${params}`)) as Task[];
  }

  async task(docId: string, blind?: boolean): Promise<Task> {
    const params = blind === undefined ? "" : `?blind=${blind}`;
    return (await this.request(`/tasks/${encodeURIComponent(docId)}${params}`)) as Task;
  }

  async submit(submission: Submission): Promise<"ok" | "duplicate"> {
    const body = (await this.request("/annotations", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(submission),
    })) as { status: "ok" | "duplicate" };
    return body.status;
  }

  async progress(): Promise<Progress> {
    return (await this.request("/progress")) as Progress;
  }

  async fuse(): Promise<{ fused: number; by_agreement: Record<string, number> }> {
    return (await this.request("/fuse", { method: "POST" })) as {
      fused: number;
      by_agreement: Record<string, number>;
    };
  }

  async bands(): Promise<Band[]> {
    const body = (await this.request("/bands")) as { bands: Band[] };
    return body.bands;
  }

  async exportLabels(): Promise<string> {
    return (await this.request("/export/labels")) as string;
  }
}
