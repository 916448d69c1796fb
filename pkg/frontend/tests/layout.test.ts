import { describe, expect, it } from "vitest";

import { ForceLayout, hashPoint } from "../src/layout.js";

const W = 900;
const H = 600;

describe("hashPoint", () => {
  it("is deterministic in the node id", () => {
    for (const id of [0, 1, 2, 17, 4096, 123456]) {
      expect(hashPoint(id, W, H)).toEqual(hashPoint(id, W, H));
    }
  });

  it("spreads distinct ids to distinct spots inside the margins", () => {
    const seen = new Set<string>();
    for (let id = 0; id < 200; id++) {
      const p = hashPoint(id, W, H);
      expect(p.x).toBeGreaterThanOrEqual(40);
      expect(p.x).toBeLessThanOrEqual(W - 40);
      expect(p.y).toBeGreaterThanOrEqual(40);
      expect(p.y).toBeLessThanOrEqual(H - 40);
      seen.add(`${p.x.toFixed(6)},${p.y.toFixed(6)}`);
    }
    expect(seen.size).toBe(200);
  });
});

describe("ForceLayout", () => {
  it("keeps existing positions when new nodes arrive", () => {
    const layout = new ForceLayout(W, H);
    layout.ensure([1, 2, 3]);
    const before = { ...layout.get(2) };
    layout.ensure([2, 4, 5]);
    expect(layout.get(2)).toEqual(before);
    expect(layout.positions.size).toBe(5);
  });

  it("relaxes deterministically", () => {
    const springs = [
      { a: 0, b: 1 },
      { a: 1, b: 2 },
      { a: 2, b: 3 },
    ];
    const one = new ForceLayout(W, H);
    const two = new ForceLayout(W, H);
    one.ensure([0, 1, 2, 3]);
    two.ensure([0, 1, 2, 3]);
    one.relax(springs);
    two.relax(springs);
    for (const id of [0, 1, 2, 3]) {
      expect(one.get(id)).toEqual(two.get(id));
    }
  });

  it("keeps every node inside the drawing area after relaxation", () => {
    const layout = new ForceLayout(W, H);
    const ids = [...Array(30).keys()];
    layout.ensure(ids);
    layout.relax(ids.slice(1).map((id) => ({ a: 0, b: id })));
    for (const id of ids) {
      const p = layout.get(id);
      expect(p.x).toBeGreaterThanOrEqual(40);
      expect(p.x).toBeLessThanOrEqual(W - 40);
      expect(p.y).toBeGreaterThanOrEqual(40);
      expect(p.y).toBeLessThanOrEqual(H - 40);
      expect(Number.isFinite(p.x)).toBe(true);
      expect(Number.isFinite(p.y)).toBe(true);
    }
  });

  it("retains only the nodes still in view", () => {
    const layout = new ForceLayout(W, H);
    layout.ensure([1, 2, 3, 4]);
    layout.retain([1, 2]);
    expect(layout.positions.size).toBe(2);
    expect(() => layout.get(3)).toThrow("no position");
    // a node that comes back lands on its original hashed spot
    layout.ensure([3]);
    expect(layout.get(3)).toEqual(hashPoint(3, W, H));
  });
});
