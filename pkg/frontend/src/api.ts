/** Thin typed client for the curation service. The server is the single
 * source of truth: every mutation returns the authoritative record, and
 * verdict POSTs are never retried (a retry could double-submit a ruling
 * under a different timestamp). */
import type {
  CandidateFilters,
  CandidateListResponse,
  CandidateView,
  Decision,
  ReportResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export function buildCandidatesQuery(filters: CandidateFilters): string {
  const params = new URLSearchParams();
  if (filters.status) params.set("status", filters.status);
  if (filters.level !== undefined && filters.level !== "") {
    params.set("level", String(filters.level));
  }
  if (filters.section) params.set("section", filters.section);
  const rendered = params.toString();
  return rendered ? `?${rendered}` : "";
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export class CurationApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; total: number }> {
    return this.getJson("/health");
  }

  listCandidates(filters: CandidateFilters = {}): Promise<CandidateListResponse> {
    return this.getJson(`/candidates${buildCandidatesQuery(filters)}`);
  }

  report(): Promise<ReportResponse> {
    return this.getJson("/report");
  }

  /** POST a verdict; 404/409 surface as ApiError for inline display. */
  async submitVerdict(
    tripleId: string,
    decision: Decision,
    reviewer: string,
  ): Promise<CandidateView> {
    const response = await this.fetchFn(`${this.baseUrl}/verdicts`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        triple_id: tripleId,
        decision,
        reviewer,
      }),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as CandidateView;
  }

  exportUrl(): string {
    return `${this.baseUrl}/export`;
  }
}
