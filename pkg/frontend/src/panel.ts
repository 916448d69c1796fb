/**
 * Evidence side panel.
 *
 * Shows the selected edge (relation, strength, endpoints, supporting
 * sentences) or node. Each selection replaces the panel wholesale so no
 * stale content can linger from a previous selection.
 */

import type { EdgeContext, EventNode, GraphEdge } from "./api.js";

export class ContextPanel {
  constructor(private readonly container: HTMLElement) {
    this.showIdle();
  }

  showIdle(): void {
    const hint = document.createElement("p");
    hint.className = "panel-hint";
    hint.textContent = "Select a node or an edge to see details.";
    this.container.replaceChildren(hint);
  }

  showNode(node: EventNode): void {
    const title = document.createElement("h3");
    title.className = "panel-title";
    title.textContent = node.canonical;

    const meta = document.createElement("p");
    meta.className = "panel-meta";
    meta.textContent = `frequency ${node.frequency} · role ${node.role}`;

    this.container.replaceChildren(title, meta);
  }

  showEdge(
    edge: GraphEdge,
    src: EventNode,
    dst: EventNode,
    contexts: EdgeContext[],
  ): void {
    const title = document.createElement("h3");
    title.className = "panel-title";
    title.textContent = edge.subtype
      ? `${edge.relation} (${edge.subtype})`
      : edge.relation;

    const endpoints = document.createElement("dl");
    endpoints.className = "panel-endpoints";
    // causal edges get cause/effect labels; everything else reads from/to
    const [srcLabel, dstLabel] =
      edge.relation === "causal" ? ["cause", "effect"] : ["from", "to"];
    endpoints.append(
      definition(srcLabel, src.canonical, "endpoint-src"),
      definition(dstLabel, dst.canonical, "endpoint-dst"),
    );

    const strength = document.createElement("p");
    strength.className = "panel-strength";
    strength.textContent =
      edge.relation === "sequential" && edge.probability !== null
        ? `probability ${edge.probability.toFixed(3)} (support ${edge.support})`
        : `support ${edge.support}`;

    const children: HTMLElement[] = [title, endpoints, strength];

    if (contexts.length === 0) {
      const empty = document.createElement("p");
      empty.className = "no-contexts";
      empty.textContent = "No stored contexts for this edge.";
      children.push(empty);
    } else {
      const list = document.createElement("ul");
      list.className = "contexts";
      for (const ctx of contexts) {
        const item = document.createElement("li");
        item.className = "context-sentence";
        item.textContent = ctx.text ?? `${ctx.doc_id} sentence ${ctx.sent_index} (text unavailable)`;
        list.appendChild(item);
      }
      children.push(list);
    }

    this.container.replaceChildren(...children);
  }
}

function definition(term: string, value: string, cls: string): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = cls;
  const dt = document.createElement("dt");
  dt.textContent = term;
  const dd = document.createElement("dd");
  dd.textContent = value;
  wrap.append(dt, dd);
  return wrap;
}
