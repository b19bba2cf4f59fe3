// Thin typed client over the review service HTTP API. The fetch function
// is injectable so tests can run without a browser or a live service.

import type {
  CandidateDetail,
  CategoryInfo,
  LabelForm,
  LabelResponse,
  QueuePage,
  Report,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message =
        typeof body === "object" && body !== null && "error" in body
          ? String((body as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  listCandidates(status = "pending"): Promise<QueuePage> {
    return this.request<QueuePage>(`/api/candidates?status=${encodeURIComponent(status)}`);
  }

  candidateDetail(candidateId: string): Promise<CandidateDetail> {
    return this.request<CandidateDetail>(`/api/candidates/${encodeURIComponent(candidateId)}`);
  }

  submitLabel(candidateId: string, form: LabelForm): Promise<LabelResponse> {
    return this.request<LabelResponse>(
      `/api/candidates/${encodeURIComponent(candidateId)}/label`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(form),
      },
    );
  }

  categories(): Promise<{ categories: CategoryInfo[] }> {
    return this.request<{ categories: CategoryInfo[] }>("/api/categories");
  }

  report(): Promise<Report> {
    return this.request<Report>("/api/report");
  }

  audioUrl(audioPath: string): string {
    return this.baseUrl + audioPath;
  }
}
