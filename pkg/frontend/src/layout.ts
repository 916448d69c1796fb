/**
 * Deterministic force layout.
 *
 * Initial positions derive from a node_id hash, so the same graph always
 * lands in the same spots and screenshots are reproducible. Expansion adds
 * positions only for new nodes and relaxes the whole arrangement a fixed
 * number of iterations; there is no randomness anywhere in the pipeline.
 */

export interface Point {
  x: number;
  y: number;
}

interface Spring {
  a: number;
  b: number;
}

/** 32-bit avalanche mix (fmix step of MurmurHash3). */
function mix32(value: number): number {
  let x = (value ^ 0x9e3779b9) >>> 0;
  x = Math.imul(x ^ (x >>> 16), 0x85ebca6b) >>> 0;
  x = Math.imul(x ^ (x >>> 13), 0xc2b2ae35) >>> 0;
  return (x ^ (x >>> 16)) >>> 0;
}

const MARGIN = 40;

/** Hash a node id into the drawing area; pure in (nodeId, width, height). */
export function hashPoint(nodeId: number, width: number, height: number): Point {
  const ux = mix32(2 * nodeId) / 0x100000000;
  const uy = mix32(2 * nodeId + 1) / 0x100000000;
  return {
    x: MARGIN + ux * Math.max(1, width - 2 * MARGIN),
    y: MARGIN + uy * Math.max(1, height - 2 * MARGIN),
  };
}

export class ForceLayout {
  readonly positions = new Map<number, Point>();

  constructor(
    private readonly width: number,
    private readonly height: number,
    private readonly springLength = 120,
  ) {}

  /** Give every listed node a position; existing nodes stay put. */
  ensure(nodeIds: Iterable<number>): void {
    for (const id of nodeIds) {
      if (!this.positions.has(id)) {
        this.positions.set(id, hashPoint(id, this.width, this.height));
      }
    }
  }

  get(nodeId: number): Point {
    const p = this.positions.get(nodeId);
    if (!p) {
      throw new Error(`no position for node ${nodeId}`);
    }
    return p;
  }

  /** Forget every node not in the given set (view shrank, e.g. on back). */
  retain(nodeIds: Iterable<number>): void {
    const keep = new Set(nodeIds);
    for (const id of [...this.positions.keys()]) {
      if (!keep.has(id)) {
        this.positions.delete(id);
      }
    }
  }

  /**
   * Spring relaxation: connected nodes attract toward the ideal spring
   * length, all pairs repel, everything is pulled gently to the center.
   * Iterating in sorted id order keeps the result deterministic.
   */
  relax(springs: Spring[], iterations = 50): void {
    const ids = [...this.positions.keys()].sort((a, b) => a - b);
    if (ids.length < 2) {
      return;
    }
    const active = springs.filter(
      (s) => this.positions.has(s.a) && this.positions.has(s.b),
    );
    const cx = this.width / 2;
    const cy = this.height / 2;

    for (let step = 0; step < iterations; step++) {
      const cooling = 1 - step / iterations;
      const force = new Map<number, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));

      for (let i = 0; i < ids.length; i++) {
        for (let j = i + 1; j < ids.length; j++) {
          const pa = this.get(ids[i]);
          const pb = this.get(ids[j]);
          let dx = pa.x - pb.x;
          let dy = pa.y - pb.y;
          const distSq = Math.max(dx * dx + dy * dy, 1);
          const dist = Math.sqrt(distSq);
          // degenerate overlap: push apart along a fixed axis
          if (dist < 1e-6) {
            dx = 1;
            dy = 0;
          }
          const repel = (this.springLength * this.springLength) / distSq;
          const fa = force.get(ids[i])!;
          const fb = force.get(ids[j])!;
          fa.x += (dx / dist) * repel * 20;
          fa.y += (dy / dist) * repel * 20;
          fb.x -= (dx / dist) * repel * 20;
          fb.y -= (dy / dist) * repel * 20;
        }
      }

      for (const spring of active) {
        const pa = this.get(spring.a);
        const pb = this.get(spring.b);
        const dx = pb.x - pa.x;
        const dy = pb.y - pa.y;
        const dist = Math.max(Math.hypot(dx, dy), 1e-6);
        const stretch = (dist - this.springLength) / dist;
        const fa = force.get(spring.a)!;
        const fb = force.get(spring.b)!;
        fa.x += dx * stretch * 0.1;
        fa.y += dy * stretch * 0.1;
        fb.x -= dx * stretch * 0.1;
        fb.y -= dy * stretch * 0.1;
      }

      for (const id of ids) {
        const p = this.get(id);
        const f = force.get(id)!;
        f.x += (cx - p.x) * 0.02;
        f.y += (cy - p.y) * 0.02;
        p.x += f.x * cooling;
        p.y += f.y * cooling;
        p.x = Math.min(Math.max(p.x, MARGIN), this.width - MARGIN);
        p.y = Math.min(Math.max(p.y, MARGIN), this.height - MARGIN);
      }
    }
  }
}
