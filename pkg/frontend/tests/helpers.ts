/**
 * Stub HTTP layer for tests.
 *
 * Routes are registered as "path?query" strings and matched on a
 * canonical form (sorted query parameters), so tests stay readable and
 * the payloads come verbatim from captured service fixtures.
 */

import type { FetchLike, JsonResponse } from "../src/api.js";

export interface RecordedCall {
  method: string;
  url: string;
}

interface StubRoute {
  status: number;
  payload: unknown;
}

export function canonical(url: string): string {
  const parsed = new URL(url, "http://stub.local");
  const params = [...parsed.searchParams.entries()]
    .map(([k, v]) => `${k}=${v}`)
    .sort()
    .join("&");
  return params ? `${parsed.pathname}?${params}` : parsed.pathname;
}

function jsonResponse(status: number, payload: unknown): JsonResponse {
  return {
    ok: status < 400,
    status,
    json: async () => JSON.parse(JSON.stringify(payload)) as unknown,
  };
}

function abortError(): Error {
  const err = new Error("the operation was aborted");
  err.name = "AbortError";
  return err;
}

export class StubService {
  readonly calls: RecordedCall[] = [];
  private readonly routes = new Map<string, StubRoute>();
  private failing = false;
  private gates: Array<() => void> = [];
  private holding = false;

  on(pathWithQuery: string, payload: unknown, status = 200): this {
    this.routes.set(canonical(pathWithQuery), { status, payload });
    return this;
  }

  /** Make every request fail at the network layer until turned off. */
  failAll(on: boolean): void {
    this.failing = on;
  }

  /** Stall responses; returns a release function that lets them through. */
  hold(): () => void {
    this.holding = true;
    return () => {
      this.holding = false;
      for (const release of this.gates.splice(0)) {
        release();
      }
    };
  }

  callsTo(pathWithQuery: string): RecordedCall[] {
    const want = canonical(pathWithQuery);
    return this.calls.filter((c) => canonical(c.url) === want);
  }

  readonly fetch: FetchLike = async (url, init) => {
    this.calls.push({ method: init?.method ?? "GET", url });
    if (this.failing) {
      throw new TypeError("fetch failed");
    }
    if (this.holding) {
      await new Promise<void>((resolve) => this.gates.push(resolve));
    }
    if (init?.signal?.aborted) {
      throw abortError();
    }
    const route = this.routes.get(canonical(url));
    if (!route) {
      return jsonResponse(404, { detail: `no stub route for ${canonical(url)}` });
    }
    return jsonResponse(route.status, route.payload);
  };
}

/** Flush resolved promise chains queued on the microtask loop. */
export async function settle(rounds = 10): Promise<void> {
  for (let i = 0; i < rounds; i++) {
    await Promise.resolve();
  }
}
