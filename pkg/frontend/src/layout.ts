/**
 * Automatic layered layout on load, manual drag afterwards. Positions live
 * in this UI-only sidecar and never enter the graph format.
 */

import { GraphDoc } from "./graph.js";

export interface Point {
  readonly x: number;
  readonly y: number;
}

export type PositionSidecar = ReadonlyMap<string, Point>;

const X_SPACING = 160;
const Y_SPACING = 110;
const MARGIN = 70;

/**
 * Longest-path layering over directed edges (undirected edges do not
 * constrain layers). Relaxation is capped at |nodes| passes so cyclic
 * inputs terminate with a usable, if arbitrary, assignment.
 */
export function layeredLayout(doc: GraphDoc): PositionSidecar {
  const layer = new Map<string, number>(doc.nodes.map((n) => [n.name, 0]));
  for (let pass = 0; pass < doc.nodes.length; pass += 1) {
    let changed = false;
    for (const e of doc.edges) {
      if (e.kind !== "directed") continue;
      const want = layer.get(e.tail)! + 1;
      if (want > layer.get(e.head)!) {
        layer.set(e.head, want);
        changed = true;
      }
    }
    if (!changed) break;
  }
  const byLayer = new Map<number, string[]>();
  for (const n of doc.nodes) {
    const l = layer.get(n.name)!;
    const row = byLayer.get(l);
    if (row) row.push(n.name);
    else byLayer.set(l, [n.name]);
  }
  const positions = new Map<string, Point>();
  for (const [l, names] of byLayer) {
    names.sort();
    names.forEach((name, i) => {
      positions.set(name, { x: MARGIN + i * X_SPACING, y: MARGIN + l * Y_SPACING });
    });
  }
  return positions;
}

export function moveNode(sidecar: PositionSidecar, name: string, to: Point): PositionSidecar {
  const next = new Map(sidecar);
  next.set(name, to);
  return next;
}
