/**
 * Full-stack check against the real service spoken to over real HTTP.
 *
 * A child process serves the fixture-corpus graph; the explorer runs in
 * jsdom with the default fetch and must reproduce every core behavior:
 * seed rendering with role colors, exact expansion, causal evidence, and a
 * GET-only request log. Expectations are fetched from the live service
 * independently of the app, never hard-coded.
 */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import type { QueryResponse } from "../src/api.js";
import { ExplorerApp } from "../src/app.js";
import { roleColor } from "../src/colors.js";

// vitest runs with cwd at the package root, where scripts/ lives
const FRONTEND_DIR = process.cwd();
const START_TIMEOUT_MS = 30_000;

let server: ChildProcessWithoutNullStreams;
let base = "";

async function liveGet(path: string): Promise<QueryResponse> {
  const response = await fetch(`${base}${path}`);
  if (!response.ok) {
    throw new Error(`GET ${path} -> ${response.status}`);
  }
  return (await response.json()) as QueryResponse;
}

beforeAll(async () => {
  server = spawn("python3", ["scripts/serve_fixture.py"], {
    cwd: FRONTEND_DIR,
    stdio: ["ignore", "pipe", "pipe"],
    env: { ...process.env, PYTHONUNBUFFERED: "1" },
  });

  let stderr = "";
  server.stderr.on("data", (chunk) => {
    stderr += String(chunk);
  });

  base = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(
      () => reject(new Error(`service never announced a port\n${stderr}`)),
      START_TIMEOUT_MS,
    );
    let buffer = "";
    server.stdout.on("data", (chunk) => {
      buffer += String(chunk);
      const match = buffer.match(/SERVING (http:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    server.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited with ${code} before binding\n${stderr}`));
    });
  });

  const deadline = Date.now() + START_TIMEOUT_MS;
  for (;;) {
    try {
      const health = await fetch(`${base}/health`);
      if (health.ok) break;
    } catch {
      // not accepting connections yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service at ${base} never became healthy\n${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 100));
  }
}, START_TIMEOUT_MS + 10_000);

afterAll(() => {
  server?.kill();
});

function makeApp(): { app: ExplorerApp; root: HTMLElement } {
  document.body.innerHTML = '<div id="root"></div>';
  const root = document.getElementById("root") as HTMLElement;
  const app = new ExplorerApp(root, { baseUrl: base });
  return { app, root };
}

describe("explorer against the live service", () => {
  it(
    "renders the seed and depth-1 neighborhood with role-correct colors",
    async () => {
      const { app, root } = makeApp();
      await app.search("tea");

      const seedId = app.currentView().seedId;
      expect(seedId).not.toBeNull();
      const hood = await liveGet(`/events/${seedId}/neighbors`);

      const shown = root.querySelectorAll("g.node");
      expect(shown).toHaveLength(hood.nodes.length);
      const seeds = [...shown].filter((g) => g.getAttribute("data-role") === "seed");
      expect(seeds).toHaveLength(1);

      for (const node of hood.nodes) {
        const g = root.querySelector(`g.node[data-node-id="${node.node_id}"]`);
        expect(g?.getAttribute("data-role")).toBe(node.role);
        expect(g?.querySelector("circle")?.getAttribute("fill")).toBe(roleColor(node.role));
      }
    },
    20_000,
  );

  it(
    "expansion adds exactly the service-reported neighbors",
    async () => {
      const { app } = makeApp();
      await app.search("tea");
      const before = new Set(app.currentView().nodes.keys());
      const target = [...before].find((id) => id !== app.currentView().seedId)!;

      const reported = await liveGet(`/events/${target}/neighbors`);
      await app.expandNode(target);

      const expected = new Set([...before, ...reported.nodes.map((n) => n.node_id)]);
      expect(new Set(app.currentView().nodes.keys())).toEqual(expected);
    },
    20_000,
  );

  it(
    "selecting a causal edge displays its evidence sentences",
    async () => {
      const { app, root } = makeApp();
      await app.search("demand");
      const causal = app.currentView().edges.find((e) => e.relation === "causal");
      expect(causal).toBeDefined();

      const evidence = await liveGet(
        `/edges/contexts?src=${causal!.src}&dst=${causal!.dst}&relation=causal`,
      );
      await app.selectEdge(causal!);

      const sentences = [...root.querySelectorAll(".context-sentence")].map(
        (el) => el.textContent,
      );
      expect(sentences.length).toBeGreaterThan(0);
      expect(sentences).toEqual(evidence.contexts.map((c) => c.text));
      expect(sentences).toContain("Prices rise because demand grows .");
    },
    20_000,
  );

  it(
    "the request log confirms GET-only traffic",
    async () => {
      const { app } = makeApp();
      await app.search("tea");
      await app.expandNode([...app.currentView().nodes.keys()][1]);
      const log = app.client.requestLog();
      expect(log.length).toBeGreaterThanOrEqual(2);
      for (const record of log) {
        expect(record.method).toBe("GET");
        expect(record.status).toBe(200);
      }
    },
    20_000,
  );
});
