import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

/** Parse a JSON fixture captured from the real service. */
export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf8")) as T;
}

export interface RecordedCall {
  url: string;
  path: string;
  params: URLSearchParams;
  method: string;
  body: unknown;
  signal: AbortSignal | null;
}

export interface StubReply {
  status?: number;
  json: unknown;
}

export type StubHandler = (req: RecordedCall) => StubReply | undefined;

/**
 * A fetch lookalike driven by a handler function. Requests are recorded;
 * an unmatched request produces a 500 whose detail names the URL, which
 * makes missing routes show up in assertions instead of hanging.
 */
export function stubFetch(handler: StubHandler): { fetchFn: typeof fetch; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const q = url.indexOf("?");
    const path = q === -1 ? url : url.slice(0, q);
    const params = new URLSearchParams(q === -1 ? "" : url.slice(q + 1));
    const call: RecordedCall = {
      url,
      path,
      params,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
      signal: init?.signal ?? null,
    };
    calls.push(call);
    if (init?.signal?.aborted) {
      throw new DOMException("the request was superseded", "AbortError");
    }
    const reply = handler(call);
    if (reply === undefined) {
      return jsonResponse({ detail: `no stub route for ${call.method} ${url}` }, 500);
    }
    return jsonResponse(reply.json, reply.status ?? 200);
  }) as typeof fetch;
  return { fetchFn, calls };
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Deterministic 32-bit RNG for property-style loops. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Stable key for a slice request: id + axes + sorted fix entries. */
export function sliceKey(id: string, axes: string, fixItems: string[]): string {
  return `${id}|${axes}|${[...fixItems].sort().join("&")}`;
}

/** The same key derived from a captured payload's own echo. */
export function sliceKeyFromPayload(
  id: string,
  payload: { axes: string[]; fixed: Record<string, number> },
): string {
  const items = Object.entries(payload.fixed).map(([k, v]) => `${k}:${v}`);
  return sliceKey(id, payload.axes.join(","), items);
}
