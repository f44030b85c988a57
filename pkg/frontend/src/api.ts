// Thin fetch wrapper around the debtviz JSON API.  One method per endpoint;
// non-2xx responses become ApiError so views can show the banner.

import type {
  CommentStats,
  FilePayload,
  HealthInfo,
  HeatmapNode,
  IssueStats,
  KeywordSpan,
  RegisterResponse,
  ReposPayload,
  SatdLabel,
  ScanStatusPayload,
  TimelinePayload,
  TreePayload,
} from "./types";

export class ApiError extends Error {
  status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

interface JsonResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: RequestInit) =>
  Promise<JsonResponse>;

async function readDetail(response: JsonResponse): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // fall through to the generic message
  }
  return `request failed with HTTP ${response.status}`;
}

export class ApiClient {
  baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (response.status < 200 || response.status >= 300) {
      throw new ApiError(response.status, await readDetail(response));
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthInfo> {
    return this.request("/health");
  }

  listRepos(): Promise<ReposPayload> {
    return this.request("/repos");
  }

  registerRepo(name: string, path: string): Promise<RegisterResponse> {
    return this.request("/repos", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name, path }),
    });
  }

  scanStatus(repoId: number): Promise<ScanStatusPayload> {
    return this.request(`/repos/${repoId}/scan`);
  }

  commentStats(repoId: number): Promise<CommentStats> {
    return this.request(`/repos/${repoId}/stats/comments`);
  }

  issueStats(repoId: number): Promise<IssueStats> {
    return this.request(`/repos/${repoId}/stats/issues`);
  }

  timeline(repoId: number): Promise<TimelinePayload> {
    return this.request(`/repos/${repoId}/timeline`);
  }

  heatmap(repoId: number, label?: SatdLabel): Promise<HeatmapNode> {
    const query = label ? `?label=${encodeURIComponent(label)}` : "";
    return this.request(`/repos/${repoId}/heatmap${query}`);
  }

  tree(repoId: number, path: string): Promise<TreePayload> {
    return this.request(
      `/repos/${repoId}/tree?path=${encodeURIComponent(path)}`);
  }

  file(repoId: number, path: string): Promise<FilePayload> {
    return this.request(
      `/repos/${repoId}/file?path=${encodeURIComponent(path)}`);
  }

  keywords(commentId: number): Promise<KeywordSpan[]> {
    return this.request(`/comments/${commentId}/keywords`);
  }
}

// Views race fetches against navigation: every load grabs a ticket and only
// the holder of the newest ticket may touch the DOM, so a stale response
// that resolves late is dropped on the floor.
export class LatestOnly {
  private seq = 0;

  begin(): number {
    this.seq += 1;
    return this.seq;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.seq;
  }
}
