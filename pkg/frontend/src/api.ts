/** Thin typed client over the odescout HTTP API. */

import type {
  LaunchReply,
  RunConfig,
  RunDetail,
  RunSummary,
  SlicePayload,
  StatusPayload,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

/** Query string for a slice request: two free axes plus one fix per fixed axis. */
export function sliceQuery(axes: [string, string], fix: Record<string, number>): string {
  const params = new URLSearchParams();
  params.set("axes", `${axes[0]},${axes[1]}`);
  for (const name of Object.keys(fix)) {
    params.append("fix", `${name}:${fix[name]}`);
  }
  return params.toString();
}

export class Api {
  private readonly base: string;
  private readonly fetchFn: typeof fetch;

  /**
   * base is prefixed to every path; "" talks to the page's own origin.
   * fetchFn exists so tests can substitute a stub.
   */
  constructor(base = "", fetchFn?: typeof fetch) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      let detail = res.statusText || `HTTP ${res.status}`;
      try {
        const body = (await res.json()) as { detail?: unknown };
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  listRuns(): Promise<RunSummary[]> {
    return this.request("/runs");
  }

  getRun(id: string): Promise<RunDetail> {
    return this.request(`/runs/${encodeURIComponent(id)}`);
  }

  getStatus(id: string): Promise<StatusPayload> {
    return this.request(`/runs/${encodeURIComponent(id)}/status`);
  }

  getSlice(
    id: string,
    axes: [string, string],
    fix: Record<string, number>,
    signal?: AbortSignal,
  ): Promise<SlicePayload> {
    const qs = sliceQuery(axes, fix);
    return this.request(`/runs/${encodeURIComponent(id)}/slice?${qs}`, { signal });
  }

  launchRun(config: RunConfig): Promise<LaunchReply> {
    return this.request("/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    });
  }
}
