/**
 * Event-sourced editor state. The loaded skeleton is immutable; the current
 * graph is always the replay of the edit log over it, undo pops the log,
 * and export emits the same canonical JSON the service produces.
 */

import {
  EdgeKind,
  GraphDoc,
  GraphEdge,
  Role,
  canonicalGraphJson,
  canonicalize,
  edgeBetween,
  hasDirectedPath,
  hasNode,
  parseGraphText,
} from "./graph.js";

export type Edit =
  | { readonly op: "add_edge"; readonly tail: string; readonly head: string; readonly kind: EdgeKind }
  | { readonly op: "remove_edge"; readonly a: string; readonly b: string }
  | { readonly op: "orient_edge"; readonly tail: string; readonly head: string }
  | { readonly op: "set_role"; readonly node: string; readonly role: Role };

export interface AuditSnapshot {
  readonly verdict: "biased" | "unbiased";
  readonly openBiasingPaths: readonly (readonly string[])[];
  readonly blockedCausalPaths: readonly (readonly string[])[];
  readonly conditionedColliders: readonly string[];
  readonly suggestions: readonly { action: "add" | "remove"; node: string }[];
  readonly minimalSets: readonly (readonly string[])[];
}

export interface EditorState {
  readonly skeleton: GraphDoc;
  readonly graph: GraphDoc;
  readonly roles: ReadonlyMap<string, Role>;
  readonly selectedFeatures: ReadonlySet<string>;
  readonly editLog: readonly Edit[];
  readonly lastAudit: AuditSnapshot | null;
}

/** An edit the graph cannot take; the message is the inline explanation. */
export class EditRejected extends Error {}

function rolesOf(doc: GraphDoc): Map<string, Role> {
  return new Map(doc.nodes.map((n) => [n.name, n.role]));
}

function requireNode(doc: GraphDoc, name: string): void {
  if (!hasNode(doc, name)) throw new EditRejected(`unknown node ${name}`);
}

/**
 * The single reducer both live edits and replay go through.
 * Throws EditRejected; never mutates its input.
 */
export function editGraph(doc: GraphDoc, edit: Edit): GraphDoc {
  switch (edit.op) {
    case "add_edge": {
      requireNode(doc, edit.tail);
      requireNode(doc, edit.head);
      if (edit.tail === edit.head) throw new EditRejected("an edge needs two distinct nodes");
      if (edgeBetween(doc, edit.tail, edit.head)) {
        throw new EditRejected(`an edge between ${edit.tail} and ${edit.head} already exists`);
      }
      if (edit.kind === "directed" && hasDirectedPath(doc, edit.head, edit.tail)) {
        throw new EditRejected(
          `adding ${edit.tail} -> ${edit.head} would create a directed cycle`,
        );
      }
      const added: GraphEdge = { tail: edit.tail, head: edit.head, kind: edit.kind };
      return canonicalize({ ...doc, edges: [...doc.edges, added] });
    }
    case "remove_edge": {
      requireNode(doc, edit.a);
      requireNode(doc, edit.b);
      const existing = edgeBetween(doc, edit.a, edit.b);
      if (!existing) throw new EditRejected(`no edge between ${edit.a} and ${edit.b}`);
      return canonicalize({ ...doc, edges: doc.edges.filter((e) => e !== existing) });
    }
    case "orient_edge": {
      requireNode(doc, edit.tail);
      requireNode(doc, edit.head);
      const existing = edgeBetween(doc, edit.tail, edit.head);
      if (!existing) throw new EditRejected(`no edge between ${edit.tail} and ${edit.head} to orient`);
      const without: GraphDoc = { ...doc, edges: doc.edges.filter((e) => e !== existing) };
      if (hasDirectedPath(without, edit.head, edit.tail)) {
        throw new EditRejected(
          `orienting ${edit.tail} -> ${edit.head} would create a directed cycle`,
        );
      }
      const oriented: GraphEdge = { tail: edit.tail, head: edit.head, kind: "directed" };
      return canonicalize({ ...without, edges: [...without.edges, oriented] });
    }
    case "set_role": {
      requireNode(doc, edit.node);
      return {
        ...doc,
        nodes: doc.nodes.map((n) => (n.name === edit.node ? { ...n, role: edit.role } : n)),
      };
    }
  }
}

/** Replay an edit log over a skeleton; the event-sourcing invariant. */
export function replay(skeleton: GraphDoc, editLog: readonly Edit[]): GraphDoc {
  return editLog.reduce(editGraph, skeleton);
}

export function loadSkeleton(doc: GraphDoc): EditorState {
  return {
    skeleton: doc,
    graph: doc,
    roles: rolesOf(doc),
    selectedFeatures: new Set(),
    editLog: [],
    lastAudit: null,
  };
}

export function importGraph(text: string): EditorState {
  return loadSkeleton(parseGraphText(text));
}

export function exportGraphText(state: EditorState): string {
  return canonicalGraphJson(state.graph);
}

export function applyEdit(state: EditorState, edit: Edit): EditorState {
  const graph = editGraph(state.graph, edit);
  const roles = rolesOf(graph);
  const selectedFeatures = new Set(
    [...state.selectedFeatures].filter((name) => {
      const role = roles.get(name);
      return role !== undefined && role !== "exposure" && role !== "outcome";
    }),
  );
  return {
    ...state,
    graph,
    roles,
    selectedFeatures,
    editLog: [...state.editLog, edit],
  };
}

/** Pop the last edit and rebuild from the skeleton; audits no longer apply. */
export function undo(state: EditorState): EditorState {
  if (state.editLog.length === 0) return state;
  const editLog = state.editLog.slice(0, -1);
  const graph = replay(state.skeleton, editLog);
  const roles = rolesOf(graph);
  const selectedFeatures = new Set(
    [...state.selectedFeatures].filter((name) => {
      const role = roles.get(name);
      return role !== undefined && role !== "exposure" && role !== "outcome";
    }),
  );
  return { skeleton: state.skeleton, graph, roles, selectedFeatures, editLog, lastAudit: null };
}

export function toggleFeature(state: EditorState, name: string): EditorState {
  const role = state.roles.get(name);
  if (role === undefined) throw new EditRejected(`unknown node ${name}`);
  if (role === "exposure" || role === "outcome") {
    throw new EditRejected(`${name} is the ${role}; it cannot be a regression feature`);
  }
  const selectedFeatures = new Set(state.selectedFeatures);
  if (selectedFeatures.has(name)) selectedFeatures.delete(name);
  else selectedFeatures.add(name);
  return { ...state, selectedFeatures };
}

export function withAudit(state: EditorState, audit: AuditSnapshot | null): EditorState {
  return { ...state, lastAudit: audit };
}

export function exposures(state: EditorState): string[] {
  return [...state.roles.entries()]
    .filter(([, role]) => role === "exposure")
    .map(([name]) => name)
    .sort();
}

export function outcomes(state: EditorState): string[] {
  return [...state.roles.entries()]
    .filter(([, role]) => role === "outcome")
    .map(([name]) => name)
    .sort();
}

/** Edges the user has touched, for the modified-edge highlight. */
export function userEditedPairs(state: EditorState): Set<string> {
  const pairs = new Set<string>();
  for (const edit of state.editLog) {
    if (edit.op === "add_edge" || edit.op === "orient_edge") {
      pairs.add(JSON.stringify([edit.tail, edit.head].sort()));
    } else if (edit.op === "remove_edge") {
      pairs.add(JSON.stringify([edit.a, edit.b].sort()));
    }
  }
  return pairs;
}
