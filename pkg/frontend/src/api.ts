/**
 * Typed client for the causal-audit HTTP API. Every call is appended to
 * `log`, so each rendered verdict is traceable to one recorded
 * request/response pair (the debug drawer reads this log).
 */

import { GraphDoc, graphFromJson } from "./graph.js";

export interface RequestRecord {
  readonly seq: number;
  readonly method: string;
  readonly path: string;
  readonly requestBody: unknown;
  readonly status: number;
  readonly responseBody: unknown;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: unknown,
    message: string,
  ) {
    super(message);
  }
}

export interface AuditRequest {
  readonly exposures: readonly string[];
  readonly outcome: string;
  readonly features: readonly string[];
  readonly effect_kind?: "total" | "direct";
}

export interface AuditResponse {
  readonly verdict: "biased" | "unbiased";
  readonly open_biasing_paths: string[][];
  readonly blocked_causal_paths: string[][];
  readonly conditioned_colliders: string[];
  readonly suggestions: { action: "add" | "remove"; node: string }[];
  readonly minimal_sets: string[][];
}

export interface AdjustmentSetsResponse {
  readonly sets: string[][];
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function describe(status: number, payload: unknown): string {
  if (payload && typeof payload === "object") {
    const p = payload as Record<string, unknown>;
    const name = typeof p["error"] === "string" ? p["error"] : `HTTP ${status}`;
    const detail = typeof p["detail"] === "string" ? `: ${p["detail"]}` : "";
    return `${name}${detail}`;
  }
  return `HTTP ${status}`;
}

export class ApiClient {
  readonly log: RequestRecord[] = [];
  private seq = 0;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<unknown> {
    const init: RequestInit = { method, signal: signal ?? null };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "content-type": "application/json" };
    }
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const text = await res.text();
    let payload: unknown = null;
    if (text.length > 0) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = text;
      }
    }
    this.log.push({
      seq: ++this.seq,
      method,
      path,
      requestBody: body ?? null,
      status: res.status,
      responseBody: payload,
    });
    if (!res.ok) throw new ApiError(res.status, payload, describe(res.status, payload));
    return payload;
  }

  async health(): Promise<void> {
    await this.request("GET", "/api/health");
  }

  async listGraphs(): Promise<string[]> {
    const payload = (await this.request("GET", "/api/graphs")) as { names: string[] };
    return payload.names;
  }

  async getGraph(name: string): Promise<GraphDoc> {
    const payload = await this.request("GET", `/api/graphs/${encodeURIComponent(name)}`);
    return graphFromJson(payload);
  }

  async putGraph(name: string, doc: GraphDoc): Promise<void> {
    await this.request("PUT", `/api/graphs/${encodeURIComponent(name)}`, doc);
  }

  async audit(name: string, body: AuditRequest, signal?: AbortSignal): Promise<AuditResponse> {
    return (await this.request(
      "POST",
      `/api/graphs/${encodeURIComponent(name)}/audit`,
      body,
      signal,
    )) as AuditResponse;
  }

  async adjustmentSets(
    name: string,
    body: { exposures: readonly string[]; outcome: string; minimal: boolean },
    signal?: AbortSignal,
  ): Promise<AdjustmentSetsResponse> {
    return (await this.request(
      "POST",
      `/api/graphs/${encodeURIComponent(name)}/adjustment-sets`,
      body,
      signal,
    )) as AdjustmentSetsResponse;
  }
}
