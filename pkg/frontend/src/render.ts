/**
 * DOM rendering for the studio. Pure construction from the studio's state,
 * so the same code runs in the browser and under jsdom tests. Rendering
 * never computes anything causal; every verdict shown comes from a recorded
 * server response.
 */

import { GraphEdge, ROLES, Role, pairKey } from "./graph.js";
import { Point } from "./layout.js";
import { Edit, userEditedPairs } from "./state.js";
import { Studio } from "./studio.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_RADIUS = 22;

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string): SVGElement {
  return document.createElementNS(SVG_NS, tag) as SVGElement;
}

function pos(studio: Studio, name: string): Point {
  return studio.positions.get(name) ?? { x: 0, y: 0 };
}

/** Unordered endpoint pairs covered by any open biasing path. */
function biasPairs(studio: Studio): Set<string> {
  const pairs = new Set<string>();
  for (const path of studio.state.lastAudit?.openBiasingPaths ?? []) {
    for (let i = 0; i + 1 < path.length; i++) {
      pairs.add(pairKey(path[i]!, path[i + 1]!));
    }
  }
  return pairs;
}

function renderEdge(
  studio: Studio,
  edge: GraphEdge,
  edited: Set<string>,
  biased: Set<string>,
): SVGElement {
  const line = svgEl("line");
  const from = pos(studio, edge.tail);
  const to = pos(studio, edge.head);
  line.setAttribute("x1", String(from.x));
  line.setAttribute("y1", String(from.y));
  line.setAttribute("x2", String(to.x));
  line.setAttribute("y2", String(to.y));
  const classes = ["edge", edge.kind];
  const key = pairKey(edge.tail, edge.head);
  if (edited.has(key)) classes.push("user-edited");
  if (biased.has(key)) classes.push("bias-path");
  line.setAttribute("class", classes.join(" "));
  line.setAttribute("data-tail", edge.tail);
  line.setAttribute("data-head", edge.head);
  if (edge.kind === "directed") line.setAttribute("marker-end", "url(#arrow)");
  return line;
}

function renderCanvas(studio: Studio): SVGElement {
  const svg = svgEl("svg");
  svg.setAttribute("class", "canvas");
  const width = Math.max(...[...studio.positions.values()].map((p) => p.x), 0) + 100;
  const height = Math.max(...[...studio.positions.values()].map((p) => p.y), 0) + 100;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);

  const defs = svgEl("defs");
  const marker = svgEl("marker");
  marker.setAttribute("id", "arrow");
  marker.setAttribute("markerWidth", "8");
  marker.setAttribute("markerHeight", "8");
  marker.setAttribute("refX", "8");
  marker.setAttribute("refY", "4");
  marker.setAttribute("orient", "auto");
  const tip = svgEl("path");
  tip.setAttribute("d", "M0,0 L8,4 L0,8 z");
  marker.appendChild(tip);
  defs.appendChild(marker);
  svg.appendChild(defs);

  const edited = userEditedPairs(studio.state);
  const biased = biasPairs(studio);
  for (const edge of studio.state.graph.edges) {
    svg.appendChild(renderEdge(studio, edge, edited, biased));
  }
  for (const node of studio.state.graph.nodes) {
    const g = svgEl("g");
    g.setAttribute("class", `node role-${node.role}`);
    g.setAttribute("data-name", node.name);
    const p = pos(studio, node.name);
    g.setAttribute("transform", `translate(${p.x},${p.y})`);
    const circle = svgEl("circle");
    circle.setAttribute("r", String(NODE_RADIUS));
    g.appendChild(circle);
    const label = svgEl("text");
    label.textContent = node.name;
    label.setAttribute("dy", "4");
    g.appendChild(label);
    svg.appendChild(g);
  }
  return svg;
}

function renderEditPanel(studio: Studio): HTMLElement {
  const panel = el("div", "panel edit");
  const tail = el("input", "edit-tail") as HTMLInputElement;
  tail.placeholder = "tail";
  const head = el("input", "edit-head") as HTMLInputElement;
  head.placeholder = "head";
  const op = el("select", "edit-op") as HTMLSelectElement;
  for (const [value, label] of [
    ["add-directed", "add directed edge"],
    ["add-undirected", "add undirected edge"],
    ["orient", "orient edge"],
    ["remove", "remove edge"],
  ]) {
    const option = el("option", undefined, label) as HTMLOptionElement;
    option.value = value!;
    op.appendChild(option);
  }
  const apply = el("button", "apply-edit", "apply") as HTMLButtonElement;
  apply.addEventListener("click", () => {
    const a = tail.value.trim();
    const b = head.value.trim();
    const edits: Record<string, Edit> = {
      "add-directed": { op: "add_edge", tail: a, head: b, kind: "directed" },
      "add-undirected": { op: "add_edge", tail: a, head: b, kind: "undirected" },
      orient: { op: "orient_edge", tail: a, head: b },
      remove: { op: "remove_edge", a, b },
    };
    studio.apply(edits[op.value]!);
  });
  const undoButton = el("button", "undo", "undo") as HTMLButtonElement;
  undoButton.addEventListener("click", () => studio.undoLast());
  panel.append(tail, head, op, apply, undoButton);
  if (studio.ui.inlineError !== null) {
    panel.appendChild(el("div", "edit-error", studio.ui.inlineError));
  }
  return panel;
}

function renderRolesPanel(studio: Studio): HTMLElement {
  const panel = el("div", "panel roles");
  for (const node of studio.state.graph.nodes) {
    const row = el("label", "role-row", `${node.name} `);
    const select = el("select", "role") as HTMLSelectElement;
    select.setAttribute("data-node", node.name);
    for (const role of ROLES) {
      const option = el("option", undefined, role) as HTMLOptionElement;
      option.value = role;
      option.selected = role === node.role;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      studio.apply({ op: "set_role", node: node.name, role: select.value as Role });
    });
    row.appendChild(select);
    panel.appendChild(row);
  }
  return panel;
}

function renderFeaturesPanel(studio: Studio): HTMLElement {
  const panel = el("div", "panel features");
  for (const node of studio.state.graph.nodes) {
    if (node.role === "exposure" || node.role === "outcome") continue;
    const row = el("label", "feature-row", `${node.name} `);
    const box = el("input", "feature-toggle") as HTMLInputElement;
    box.type = "checkbox";
    box.setAttribute("data-node", node.name);
    box.checked = studio.state.selectedFeatures.has(node.name);
    box.addEventListener("change", () => studio.toggle(node.name));
    row.appendChild(box);
    panel.appendChild(row);
  }
  return panel;
}

function pathText(path: readonly string[]): string {
  return path.join(" -> ");
}

function renderAuditPanel(studio: Studio): HTMLElement {
  const panel = el("div", "panel audit");
  if (studio.ui.cyclicWarning) {
    panel.classList.add("disabled");
    panel.setAttribute("data-disabled", "true");
  }
  const run = el("button", "run-audit", "run audit") as HTMLButtonElement;
  run.disabled = studio.ui.cyclicWarning || studio.ui.busy;
  run.addEventListener("click", () => void studio.liveAudit());
  panel.appendChild(run);
  if (studio.ui.busy) panel.appendChild(el("span", "busy", "auditing..."));
  if (studio.ui.guidance !== null) {
    panel.appendChild(el("div", "guidance", studio.ui.guidance));
  }
  const audit = studio.state.lastAudit;
  if (audit === null) return panel;

  if (studio.ui.stale) {
    panel.appendChild(el("span", "stale", "results are stale; run the audit again"));
  }
  panel.appendChild(el("span", `badge ${audit.verdict}`, audit.verdict));

  const biasing = el("ul", "biasing-paths");
  for (const path of audit.openBiasingPaths) {
    biasing.appendChild(el("li", "path", pathText(path)));
  }
  panel.append(el("h3", undefined, "open biasing paths"), biasing);

  const blocked = el("ul", "blocked-paths");
  for (const path of audit.blockedCausalPaths) {
    blocked.appendChild(el("li", "path", pathText(path)));
  }
  panel.append(el("h3", undefined, "blocked causal paths"), blocked);

  const colliders = el("ul", "colliders");
  for (const name of audit.conditionedColliders) {
    colliders.appendChild(el("li", undefined, name));
  }
  panel.append(el("h3", undefined, "conditioned colliders"), colliders);

  const suggestions = el("ul", "suggestions");
  for (const s of audit.suggestions) {
    const item = el("li", "suggestion", `${s.action} ${s.node}`);
    item.setAttribute("data-action", s.action);
    item.setAttribute("data-node", s.node);
    suggestions.appendChild(item);
  }
  panel.append(el("h3", undefined, "suggestions"), suggestions);

  const sets = el("ul", "minimal-sets");
  for (const members of audit.minimalSets) {
    const item = el("li", "set");
    for (const member of members) {
      const chip = el("button", "chip", member) as HTMLButtonElement;
      chip.setAttribute("data-node", member);
      if (studio.state.selectedFeatures.has(member)) chip.classList.add("selected");
      chip.addEventListener("click", () => studio.toggle(member));
      item.appendChild(chip);
    }
    sets.appendChild(item);
  }
  panel.append(el("h3", undefined, "minimal adjustment sets"), sets);
  return panel;
}

function renderDebugDrawer(studio: Studio): HTMLElement {
  const drawer = el("details", "debug-drawer");
  drawer.appendChild(el("summary", undefined, `debug: ${studio.client.log.length} requests`));
  const list = el("ol", "request-log");
  for (const record of studio.client.log) {
    const item = el("li", "request");
    item.setAttribute("data-seq", String(record.seq));
    item.appendChild(
      el("span", "line", `${record.method} ${record.path} -> ${record.status}`),
    );
    const bodies = el("pre", "bodies");
    bodies.textContent = JSON.stringify(
      { request: record.requestBody, response: record.responseBody },
      null,
      2,
    );
    item.appendChild(bodies);
    list.appendChild(item);
  }
  drawer.appendChild(list);
  return drawer;
}

export function render(root: HTMLElement, studio: Studio): void {
  root.textContent = "";
  if (studio.ui.banner !== null) {
    const banner = el("div", "banner");
    banner.appendChild(el("span", "message", studio.ui.banner));
    const dismiss = el("button", "dismiss", "dismiss") as HTMLButtonElement;
    dismiss.addEventListener("click", () => studio.dismissBanner());
    banner.appendChild(dismiss);
    root.appendChild(banner);
  }
  if (studio.ui.cyclicWarning) {
    root.appendChild(
      el(
        "div",
        "warning cyclic",
        "this graph contains a directed cycle; audit panels are disabled until it is removed",
      ),
    );
  }
  root.appendChild(renderCanvas(studio));
  root.appendChild(renderEditPanel(studio));
  root.appendChild(renderRolesPanel(studio));
  root.appendChild(renderFeaturesPanel(studio));
  root.appendChild(renderAuditPanel(studio));
  root.appendChild(renderDebugDrawer(studio));
}

/** Render now and on every studio change. */
export function mount(root: HTMLElement, studio: Studio): void {
  render(root, studio);
  studio.onChange(() => render(root, studio));
}
