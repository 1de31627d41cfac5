/**
 * The studio store: editor state, UI state, layout sidecar, and the live
 * audit loop. At most one audit round-trip is in flight; a newer request
 * supersedes an older one (latest wins) and editing is never blocked by a
 * pending or failed request.
 */

import { ApiClient, ApiError } from "./api.js";
import { GraphDoc, hasDirectedCycle, isFullyDirected } from "./graph.js";
import { PositionSidecar, Point, layeredLayout, moveNode } from "./layout.js";
import {
  Edit,
  EditRejected,
  EditorState,
  applyEdit,
  exposures,
  exportGraphText,
  importGraph,
  loadSkeleton,
  outcomes,
  toggleFeature,
  undo,
  withAudit,
} from "./state.js";

export interface UiState {
  banner: string | null;
  inlineError: string | null;
  cyclicWarning: boolean;
  stale: boolean;
  guidance: string | null;
  busy: boolean;
}

type Listener = () => void;

export class Studio {
  state: EditorState;
  ui: UiState;
  positions: PositionSidecar;
  readonly client: ApiClient;
  readonly graphName: string;

  private auditSeq = 0;
  private inflight: AbortController | null = null;
  private listeners: Listener[] = [];

  private constructor(state: EditorState, client: ApiClient, graphName: string) {
    this.state = state;
    this.client = client;
    this.graphName = graphName;
    this.positions = layeredLayout(state.graph);
    this.ui = {
      banner: null,
      inlineError: null,
      cyclicWarning: hasDirectedCycle(state.graph),
      stale: false,
      guidance: null,
      busy: false,
    };
  }

  static fromDoc(doc: GraphDoc, client: ApiClient, graphName: string): Studio {
    return new Studio(loadSkeleton(doc), client, graphName);
  }

  static fromText(text: string, client: ApiClient, graphName: string): Studio {
    return new Studio(importGraph(text), client, graphName);
  }

  /** Load a stored graph; server errors surface as a dismissible banner. */
  static async fromServer(name: string, client: ApiClient): Promise<Studio> {
    const doc = await client.getGraph(name);
    return Studio.fromDoc(doc, client, name);
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l();
  }

  dismissBanner(): void {
    this.ui.banner = null;
    this.emit();
  }

  apply(edit: Edit): void {
    try {
      this.state = applyEdit(this.state, edit);
      this.ui.inlineError = null;
      this.ui.stale = true;
      this.ui.cyclicWarning = hasDirectedCycle(this.state.graph);
      this.positions = layeredLayout(this.state.graph);
    } catch (e) {
      if (e instanceof EditRejected) this.ui.inlineError = e.message;
      else throw e;
    }
    this.emit();
  }

  undoLast(): void {
    this.state = undo(this.state);
    this.ui.inlineError = null;
    this.ui.stale = true;
    this.ui.cyclicWarning = hasDirectedCycle(this.state.graph);
    this.positions = layeredLayout(this.state.graph);
    this.emit();
  }

  toggle(name: string): void {
    try {
      this.state = toggleFeature(this.state, name);
      this.ui.inlineError = null;
      this.ui.stale = true;
    } catch (e) {
      if (e instanceof EditRejected) this.ui.inlineError = e.message;
      else throw e;
    }
    this.emit();
  }

  drag(name: string, to: Point): void {
    this.positions = moveNode(this.positions, name, to);
    this.emit();
  }

  exportText(): string {
    return exportGraphText(this.state);
  }

  /** Reason live audit cannot run yet, or null when it can. */
  auditBlocker(): string | null {
    if (exposures(this.state).length === 0) {
      return "assign at least one exposure role to run a live audit";
    }
    if (outcomes(this.state).length !== 1) {
      return "assign exactly one outcome role to run a live audit";
    }
    if (!isFullyDirected(this.state.graph)) {
      return "orient all undirected edges to run a live audit";
    }
    if (hasDirectedCycle(this.state.graph)) {
      return "the graph contains a directed cycle; audits need a DAG";
    }
    return null;
  }

  /**
   * Push the current graph, then ask for an audit of the selected features
   * and the minimal adjustment sets. No request is sent while preconditions
   * fail; a superseded or failed round-trip leaves panels stale.
   */
  async liveAudit(): Promise<void> {
    const blocker = this.auditBlocker();
    if (blocker !== null) {
      this.ui.guidance = blocker;
      this.emit();
      return;
    }
    this.ui.guidance = null;
    const seq = ++this.auditSeq;
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.ui.busy = true;
    this.emit();
    const xs = exposures(this.state);
    const outcome = outcomes(this.state)[0]!;
    const features = [...this.state.selectedFeatures].sort();
    try {
      await this.client.putGraph(this.graphName, this.state.graph);
      const audit = await this.client.audit(
        this.graphName,
        { exposures: xs, outcome, features },
        controller.signal,
      );
      const sets = await this.client.adjustmentSets(
        this.graphName,
        { exposures: xs, outcome, minimal: true },
        controller.signal,
      );
      if (seq !== this.auditSeq) return;
      this.state = withAudit(this.state, {
        verdict: audit.verdict,
        openBiasingPaths: audit.open_biasing_paths,
        blockedCausalPaths: audit.blocked_causal_paths,
        conditionedColliders: audit.conditioned_colliders,
        suggestions: audit.suggestions,
        minimalSets: sets.sets,
      });
      this.ui.stale = false;
    } catch (e) {
      if (seq !== this.auditSeq) return;
      this.ui.stale = true;
      if (e instanceof ApiError) this.ui.banner = e.message;
      else if ((e as Error).name !== "AbortError") this.ui.banner = (e as Error).message;
    } finally {
      if (seq === this.auditSeq) {
        this.ui.busy = false;
        this.inflight = null;
      }
      this.emit();
    }
  }
}
