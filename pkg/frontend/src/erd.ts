/** Client-side rendering of the service's DOT-format ERD text.
 *
 * The service emits a small DOT dialect — quoted node names with labels and
 * labelled directed edges. We parse just that dialect, let dagre compute a
 * layered layout, and emit a static SVG string.
 */

import * as dagre from "@dagrejs/dagre";

const NODE_RE = /^\s*"([^"]+)"\s*\[label="([^"]*)"\];?\s*$/;
const EDGE_RE = /^\s*"([^"]+)"\s*->\s*"([^"]+)"\s*\[label="([^"]*)"\];?\s*$/;

export interface ErdGraph {
  nodes: { name: string; label: string }[];
  edges: { from: string; to: string; label: string }[];
}

export function parseDot(text: string): ErdGraph | null {
  const nodes: ErdGraph["nodes"] = [];
  const edges: ErdGraph["edges"] = [];
  for (const line of text.split("\n")) {
    const edge = EDGE_RE.exec(line);
    if (edge) {
      edges.push({ from: edge[1], to: edge[2], label: edge[3] });
      continue;
    }
    const node = NODE_RE.exec(line);
    if (node) nodes.push({ name: node[1], label: node[2] });
  }
  if (nodes.length === 0) return null;
  const named = new Set(nodes.map((n) => n.name));
  if (edges.some((e) => !named.has(e.from) || !named.has(e.to))) return null;
  return { nodes, edges };
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Lay out a parsed ERD and return an SVG string, or null if unparseable. */
export function erdToSvg(dotText: string): string | null {
  const parsed = parseDot(dotText);
  if (!parsed) return null;

  // multigraph: two tables may be linked by more than one foreign key
  const g = new dagre.graphlib.Graph({ multigraph: true });
  g.setGraph({ rankdir: "LR", nodesep: 22, ranksep: 56, marginx: 14, marginy: 14 });
  g.setDefaultEdgeLabel(() => ({}));
  for (const node of parsed.nodes) {
    g.setNode(node.name, {
      label: node.label,
      width: Math.max(90, node.label.length * 6.6 + 18),
      height: 30,
    });
  }
  parsed.edges.forEach((edge, i) => {
    g.setEdge(edge.from, edge.to, { label: edge.label }, `e${i}`);
  });
  dagre.layout(g);

  const size = g.graph();
  const parts: string[] = [
    `<svg class="erd" xmlns="http://www.w3.org/2000/svg" ` +
      `viewBox="0 0 ${Math.ceil(size.width ?? 0)} ${Math.ceil(size.height ?? 0)}" ` +
      `width="${Math.ceil(size.width ?? 0)}" height="${Math.ceil(size.height ?? 0)}">`,
  ];
  for (const e of g.edges()) {
    const info = g.edge(e);
    const points = (info.points ?? [])
      .map((p: { x: number; y: number }) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`)
      .join(" ");
    parts.push(
      `<polyline points="${points}" fill="none" stroke="#8a93a6" stroke-width="1.2"/>`,
    );
    const mid = info.points?.[Math.floor((info.points.length - 1) / 2)];
    const label = (info as { label?: string }).label;
    if (mid && label) {
      parts.push(
        `<text x="${mid.x.toFixed(1)}" y="${(mid.y - 4).toFixed(1)}" ` +
          `font-size="9" fill="#6b7280" text-anchor="middle">${esc(label)}</text>`,
      );
    }
  }
  for (const name of g.nodes()) {
    const node = g.node(name);
    const x = node.x - node.width / 2;
    const y = node.y - node.height / 2;
    parts.push(
      `<g><rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${node.width}" ` +
        `height="${node.height}" rx="5" fill="#eef2ff" stroke="#4f46e5"/>` +
        `<text x="${node.x.toFixed(1)}" y="${(node.y + 4).toFixed(1)}" ` +
        `font-size="11" fill="#1e1b4b" text-anchor="middle">` +
        `${esc((node as { label?: string }).label ?? name)}</text></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
