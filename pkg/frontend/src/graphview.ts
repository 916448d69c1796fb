/**
 * SVG rendering of the visible graph.
 *
 * Rendering is a pure projection of (ViewState, ForceLayout): edges become
 * lines with width from the encoding rules, similarity links become dashed
 * lines, nodes become circles filled by role. A legend explaining the role
 * colors is part of the static skeleton and survives every re-render.
 */

import type { GraphEdge, SimilarityLink } from "./api.js";
import { edgeWidth, LINK_DASH, LINK_WIDTH, roleColor, ROLE_COLORS } from "./colors.js";
import type { ForceLayout } from "./layout.js";
import type { ViewState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphViewCallbacks {
  onNodeClick(nodeId: number): void;
  onEdgeClick(edge: GraphEdge): void;
}

const NODE_RADIUS = 14;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

export class GraphView {
  private readonly svg: SVGSVGElement;
  private readonly edgeGroup: SVGGElement;
  private readonly nodeGroup: SVGGElement;
  private readonly notice: HTMLElement;

  constructor(
    container: HTMLElement,
    private readonly callbacks: GraphViewCallbacks,
    readonly width = 900,
    readonly height = 600,
  ) {
    this.svg = svgEl("svg", {
      viewBox: `0 0 ${width} ${height}`,
      width: String(width),
      height: String(height),
      class: "graph-canvas",
    });

    const defs = svgEl("defs", {});
    const marker = svgEl("marker", {
      id: "arrow",
      viewBox: "0 0 10 10",
      refX: "9",
      refY: "5",
      markerWidth: "7",
      markerHeight: "7",
      orient: "auto-start-reverse",
    });
    marker.appendChild(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: "#555" }));
    defs.appendChild(marker);
    this.svg.appendChild(defs);

    this.edgeGroup = svgEl("g", { class: "edges" });
    this.nodeGroup = svgEl("g", { class: "nodes" });
    this.svg.appendChild(this.edgeGroup);
    this.svg.appendChild(this.nodeGroup);
    this.svg.appendChild(this.buildLegend());

    this.notice = document.createElement("div");
    this.notice.className = "truncation-notice";
    this.notice.hidden = true;
    this.notice.textContent =
      "Some neighbors were omitted: the service node cap cut this view short.";

    container.appendChild(this.svg);
    container.appendChild(this.notice);
  }

  /** Static legend, one entry per role; always present in the SVG. */
  private buildLegend(): SVGGElement {
    const legend = svgEl("g", { class: "legend", transform: "translate(12, 12)" });
    let row = 0;
    for (const [role, color] of Object.entries(ROLE_COLORS)) {
      const y = row * 22;
      legend.appendChild(
        svgEl("circle", { cx: "8", cy: String(y + 8), r: "7", fill: color }),
      );
      const label = svgEl("text", {
        x: "22",
        y: String(y + 12),
        class: "legend-label",
      });
      label.textContent = role;
      legend.appendChild(label);
      row += 1;
    }
    return legend;
  }

  render(view: ViewState, layout: ForceLayout, unexpandable: ReadonlySet<number>): void {
    this.edgeGroup.replaceChildren();
    this.nodeGroup.replaceChildren();

    for (const link of view.links) {
      this.edgeGroup.appendChild(this.renderLink(link, layout));
    }
    for (const edge of view.edges) {
      this.edgeGroup.appendChild(this.renderEdge(edge, view, layout));
    }
    for (const node of view.nodes.values()) {
      const point = layout.get(node.node_id);
      const group = svgEl("g", {
        class: "node" + (unexpandable.has(node.node_id) ? " unexpandable" : ""),
        "data-node-id": String(node.node_id),
        "data-role": node.role,
        transform: `translate(${point.x.toFixed(1)}, ${point.y.toFixed(1)})`,
      });
      const circle = svgEl("circle", {
        r: String(NODE_RADIUS),
        fill: roleColor(node.role),
        stroke: node.node_id === view.seedId ? "#222" : "#888",
        "stroke-width": node.node_id === view.seedId ? "3" : "1",
      });
      const label = svgEl("text", {
        y: String(NODE_RADIUS + 14),
        "text-anchor": "middle",
        class: "node-label",
      });
      label.textContent = node.canonical;
      group.appendChild(circle);
      group.appendChild(label);
      group.addEventListener("click", () => this.callbacks.onNodeClick(node.node_id));
      this.nodeGroup.appendChild(group);
    }

    this.notice.hidden = !view.truncated;
  }

  private renderEdge(
    edge: GraphEdge,
    view: ViewState,
    layout: ForceLayout,
  ): SVGLineElement {
    const a = layout.get(edge.src);
    const b = layout.get(edge.dst);
    const line = svgEl("line", {
      x1: a.x.toFixed(1),
      y1: a.y.toFixed(1),
      x2: b.x.toFixed(1),
      y2: b.y.toFixed(1),
      class: `edge edge-${edge.relation}`,
      "data-src": String(edge.src),
      "data-dst": String(edge.dst),
      "data-relation": edge.relation,
      stroke: "#555",
      "stroke-width": edgeWidth(edge).toFixed(2),
      "marker-end": "url(#arrow)",
    });
    line.addEventListener("click", () => this.callbacks.onEdgeClick(edge));
    if (
      view.selection?.kind === "edge" &&
      view.selection.src === edge.src &&
      view.selection.dst === edge.dst &&
      view.selection.relation === edge.relation
    ) {
      line.classList.add("selected");
    }
    return line;
  }

  private renderLink(link: SimilarityLink, layout: ForceLayout): SVGLineElement {
    const a = layout.get(link.a);
    const b = layout.get(link.b);
    return svgEl("line", {
      x1: a.x.toFixed(1),
      y1: a.y.toFixed(1),
      x2: b.x.toFixed(1),
      y2: b.y.toFixed(1),
      class: "link",
      "data-a": String(link.a),
      "data-b": String(link.b),
      stroke: "#999",
      "stroke-width": String(LINK_WIDTH),
      "stroke-dasharray": LINK_DASH,
    });
  }
}
