/**
 * Graph-document model: the JSON interchange format shared with the
 * causal-audit service, canonicalization, and the few structural checks
 * the editor needs locally (existence, duplicates, directed cycles).
 * Everything causal (d-separation, audits, adjustment sets) stays on the
 * server.
 */

import { z } from "zod";

export const ROLES = ["none", "exposure", "outcome", "adjusted", "unobserved"] as const;
export type Role = (typeof ROLES)[number];
export type EdgeKind = "directed" | "undirected";

export interface GraphNode {
  readonly name: string;
  readonly role: Role;
}

export interface GraphEdge {
  readonly tail: string;
  readonly head: string;
  readonly kind: EdgeKind;
}

export interface GraphDoc {
  readonly format_version: 1;
  readonly nodes: readonly GraphNode[];
  readonly edges: readonly GraphEdge[];
}

export class GraphFormatError extends Error {}

const nodeSchema = z.object({
  name: z.string().min(1),
  role: z.enum(ROLES).default("none"),
});

const edgeSchema = z.object({
  tail: z.string().min(1),
  head: z.string().min(1),
  kind: z.enum(["directed", "undirected"]),
});

const docSchema = z.object({
  format_version: z.literal(1),
  nodes: z.array(nodeSchema),
  edges: z.array(edgeSchema),
});

/** Unordered endpoint key; safe for arbitrary node names. */
export function pairKey(a: string, b: string): string {
  return JSON.stringify(a < b ? [a, b] : [b, a]);
}

function sortedEdge(e: GraphEdge): GraphEdge {
  if (e.kind === "undirected" && e.head < e.tail) {
    return { tail: e.head, head: e.tail, kind: "undirected" };
  }
  return e;
}

/** Sorted nodes, sorted undirected endpoints, edges ordered by (tail, head). */
export function canonicalize(doc: GraphDoc): GraphDoc {
  const nodes = [...doc.nodes].sort((a, b) => (a.name < b.name ? -1 : a.name > b.name ? 1 : 0));
  const edges = doc.edges.map(sortedEdge).sort((a, b) => {
    if (a.tail !== b.tail) return a.tail < b.tail ? -1 : 1;
    if (a.head !== b.head) return a.head < b.head ? -1 : 1;
    return 0;
  });
  return { format_version: 1, nodes, edges };
}

function validate(doc: GraphDoc): GraphDoc {
  const seen = new Set<string>();
  for (const n of doc.nodes) {
    if (seen.has(n.name)) throw new GraphFormatError(`duplicate node ${n.name}`);
    seen.add(n.name);
  }
  const pairs = new Set<string>();
  for (const e of doc.edges) {
    if (!seen.has(e.tail) || !seen.has(e.head)) {
      throw new GraphFormatError(`edge endpoint is not a declared node: ${e.tail} -> ${e.head}`);
    }
    if (e.tail === e.head) throw new GraphFormatError(`self loop on ${e.tail}`);
    const key = pairKey(e.tail, e.head);
    if (pairs.has(key)) {
      throw new GraphFormatError(`more than one edge between ${e.tail} and ${e.head}`);
    }
    pairs.add(key);
  }
  return canonicalize(doc);
}

/** Parse and validate a graph JSON document (already-parsed values welcome). */
export function graphFromJson(data: unknown): GraphDoc {
  const parsed = docSchema.safeParse(data);
  if (!parsed.success) {
    throw new GraphFormatError(`not a graph document: ${parsed.error.issues[0]?.message ?? "invalid"}`);
  }
  return validate(parsed.data as GraphDoc);
}

export function parseGraphText(text: string): GraphDoc {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (e) {
    throw new GraphFormatError(`graph file is not JSON: ${(e as Error).message}`);
  }
  return graphFromJson(data);
}

/**
 * Canonical JSON bytes: alphabetical keys, no whitespace. Matches the
 * service's canonical form, so an unedited import exports byte-identically.
 */
export function canonicalGraphJson(doc: GraphDoc): string {
  const c = canonicalize(doc);
  return JSON.stringify({
    edges: c.edges.map((e) => ({ head: e.head, kind: e.kind, tail: e.tail })),
    format_version: 1,
    nodes: c.nodes.map((n) => ({ name: n.name, role: n.role })),
  });
}

export function hasNode(doc: GraphDoc, name: string): boolean {
  return doc.nodes.some((n) => n.name === name);
}

export function edgeBetween(doc: GraphDoc, a: string, b: string): GraphEdge | undefined {
  const key = pairKey(a, b);
  return doc.edges.find((e) => pairKey(e.tail, e.head) === key);
}

export function roleOf(doc: GraphDoc, name: string): Role {
  const node = doc.nodes.find((n) => n.name === name);
  if (!node) throw new GraphFormatError(`unknown node ${name}`);
  return node.role;
}

function directedAdjacency(doc: GraphDoc): Map<string, string[]> {
  const out = new Map<string, string[]>(doc.nodes.map((n) => [n.name, []]));
  for (const e of doc.edges) {
    if (e.kind === "directed") out.get(e.tail)!.push(e.head);
  }
  return out;
}

/** True when a directed path start -> ... -> goal exists (directed edges only). */
export function hasDirectedPath(doc: GraphDoc, start: string, goal: string): boolean {
  const adj = directedAdjacency(doc);
  const stack = [start];
  const seen = new Set<string>([start]);
  while (stack.length > 0) {
    const at = stack.pop()!;
    if (at === goal) return true;
    for (const next of adj.get(at) ?? []) {
      if (!seen.has(next)) {
        seen.add(next);
        stack.push(next);
      }
    }
  }
  return false;
}

export function hasDirectedCycle(doc: GraphDoc): boolean {
  const adj = directedAdjacency(doc);
  const state = new Map<string, 1 | 2>();
  const visit = (at: string): boolean => {
    state.set(at, 1);
    for (const next of adj.get(at) ?? []) {
      const s = state.get(next);
      if (s === 1) return true;
      if (s === undefined && visit(next)) return true;
    }
    state.set(at, 2);
    return false;
  };
  return doc.nodes.some((n) => state.get(n.name) === undefined && visit(n.name));
}

export function isFullyDirected(doc: GraphDoc): boolean {
  return doc.edges.every((e) => e.kind === "directed");
}
