/**
 * Visual encoding rules: role colors and edge stroke widths.
 *
 * Both are pure functions of service-reported fields so a rendered view
 * can be checked against the raw payload.
 */

import type { GraphEdge, Role } from "./api.js";

export const ROLE_COLORS: Record<Role, string> = {
  seed: "#d0312d",
  evolution: "#f2b705",
  similar: "#3fa34d",
};

export function roleColor(role: Role): string {
  const color = ROLE_COLORS[role];
  if (color === undefined) {
    throw new Error(`unknown node role: ${String(role)}`);
  }
  return color;
}

const MIN_WIDTH = 1;

/**
 * Sequential edges scale with transition probability; every other relation
 * carries no probability and scales with raw support instead.
 */
export function edgeWidth(edge: Pick<GraphEdge, "relation" | "support" | "probability">): number {
  if (edge.relation === "sequential") {
    return MIN_WIDTH + 4 * (edge.probability ?? 0);
  }
  return MIN_WIDTH + 0.5 * Math.min(edge.support, 10);
}

/** Similarity links are drawn thinner than any edge and dashed. */
export const LINK_WIDTH = 0.75;
export const LINK_DASH = "4 3";
