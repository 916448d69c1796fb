/**
 * Typed read-only client for the event graph query service.
 *
 * Every call is a GET and every call is appended to the request log, so a
 * test (or a cautious operator) can verify the explorer never mutates the
 * service. The fetch implementation is injectable for testing.
 */

export type Role = "seed" | "evolution" | "similar";

export interface EventNode {
  node_id: number;
  canonical: string;
  frequency: number;
  role: Role;
}

export interface GraphEdge {
  src: number;
  dst: number;
  relation: string;
  subtype: string | null;
  support: number;
  probability: number | null;
}

export interface SimilarityLink {
  a: number;
  b: number;
  score: number;
}

export interface EdgeContext {
  doc_id: string;
  sent_index: number;
  text: string | null;
}

export interface QueryResponse {
  nodes: EventNode[];
  edges: GraphEdge[];
  links: SimilarityLink[];
  contexts: EdgeContext[];
  truncated: boolean;
}

export interface HealthResponse {
  status: string;
  nodes: number;
  edges: number;
  links: number;
  meta: Record<string, string>;
}

export interface RequestRecord {
  method: "GET";
  url: string;
  status: number | null;
}

/** Structural subset of the WHATWG Response the client relies on. */
export interface JsonResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; signal?: AbortSignal },
) => Promise<JsonResponse>;

export interface NeighborOptions {
  relation?: string;
  depth?: number;
  topK?: number;
}

export interface EdgeKey {
  src: number;
  dst: number;
  relation: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

function defaultFetch(): FetchLike {
  if (typeof fetch === "undefined") {
    throw new Error("no fetch available; pass fetchImpl explicitly");
  }
  return (url, init) => fetch(url, init);
}

export class GraphClient {
  private readonly log: RequestRecord[] = [];
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? defaultFetch();
  }

  /** Immutable view of every request issued through this client. */
  requestLog(): readonly RequestRecord[] {
    return this.log.slice();
  }

  async health(signal?: AbortSignal): Promise<HealthResponse> {
    return (await this.getJson("/health", {}, signal)) as HealthResponse;
  }

  async searchEvents(
    query: string,
    limit = 10,
    signal?: AbortSignal,
  ): Promise<QueryResponse> {
    const params = { q: query, limit: String(limit) };
    return (await this.getJson("/events", params, signal)) as QueryResponse;
  }

  async neighbors(
    nodeId: number,
    options: NeighborOptions = {},
    signal?: AbortSignal,
  ): Promise<QueryResponse> {
    const params: Record<string, string> = {};
    if (options.relation !== undefined) params.relation = options.relation;
    if (options.depth !== undefined) params.depth = String(options.depth);
    if (options.topK !== undefined) params.top_k = String(options.topK);
    return (await this.getJson(
      `/events/${nodeId}/neighbors`,
      params,
      signal,
    )) as QueryResponse;
  }

  async edgeContexts(edge: EdgeKey, signal?: AbortSignal): Promise<QueryResponse> {
    const params = {
      src: String(edge.src),
      dst: String(edge.dst),
      relation: edge.relation,
    };
    return (await this.getJson("/edges/contexts", params, signal)) as QueryResponse;
  }

  private async getJson(
    path: string,
    params: Record<string, string>,
    signal?: AbortSignal,
  ): Promise<unknown> {
    const search = new URLSearchParams(params).toString();
    const url = `${this.baseUrl}${path}${search ? `?${search}` : ""}`;
    const record: RequestRecord = { method: "GET", url, status: null };
    this.log.push(record);

    let response: JsonResponse;
    try {
      response = await this.fetchImpl(url, { method: "GET", signal });
    } catch (err) {
      // network failure or abort; the log keeps status null
      throw err;
    }
    record.status = response.status;
    if (!response.ok) {
      throw new ApiError(response.status, await describeFailure(response));
    }
    return response.json();
  }
}

async function describeFailure(response: JsonResponse): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (body && typeof body.detail === "string") {
      return body.detail;
    }
  } catch {
    // non-JSON error body; fall through to the generic message
  }
  return `request failed with status ${response.status}`;
}
