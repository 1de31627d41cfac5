"""Graph serialization: a line-oriented text format and canonical JSON.

Both formats round-trip losslessly and deterministically: nodes are
written sorted by name, edges sorted by (tail, head), and JSON uses
sorted keys with no insignificant whitespace, so save -> load -> save is
byte-identical.
"""

import json
from pathlib import Path as FsPath

from .errors import GraphFormat
from .graph import DIRECTED, ROLE_NONE, UNDIRECTED, Edge, MixedGraph, build_graph

FORMAT_VERSION = 1


def canonical_json(obj) -> str:
    """Serialize ``obj`` to the canonical JSON form used by CLI and HTTP."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def graph_to_json_dict(g: MixedGraph) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "nodes": [{"name": n, "role": g.role(n)} for n in g.nodes],
        "edges": [{"tail": e.tail, "head": e.head, "kind": e.kind} for e in g.edges],
    }


def graph_from_json_dict(data) -> MixedGraph:
    if not isinstance(data, dict):
        raise GraphFormat("graph JSON must be an object")
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise GraphFormat(f"unsupported format_version {version!r}")
    raw_nodes = data.get("nodes")
    raw_edges = data.get("edges", [])
    if not isinstance(raw_nodes, list) or not isinstance(raw_edges, list):
        raise GraphFormat("graph JSON needs 'nodes' and 'edges' arrays")
    names = []
    roles = {}
    for item in raw_nodes:
        if isinstance(item, str):
            names.append(item)
            continue
        if not isinstance(item, dict) or "name" not in item:
            raise GraphFormat(f"bad node entry {item!r}")
        names.append(item["name"])
        role = item.get("role", ROLE_NONE)
        if role != ROLE_NONE:
            roles[item["name"]] = role
    edges = []
    for item in raw_edges:
        if not isinstance(item, dict) or "tail" not in item or "head" not in item:
            raise GraphFormat(f"bad edge entry {item!r}")
        edges.append(Edge(item["tail"], item["head"], item.get("kind", DIRECTED)))
    return build_graph(names, edges, roles)


def render_graph_text(g: MixedGraph) -> str:
    lines = []
    for n in g.nodes:
        role = g.role(n)
        lines.append(f"node {n}" if role == ROLE_NONE else f"node {n} @{role}")
    for e in g.edges:
        arrow = "->" if e.kind == DIRECTED else "--"
        lines.append(f"edge {e.tail} {arrow} {e.head}")
    return "\n".join(lines) + "\n"


def parse_graph_text(text: str) -> MixedGraph:
    names = []
    roles = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "node":
            if len(tokens) == 2:
                names.append(tokens[1])
            elif len(tokens) == 3 and tokens[2].startswith("@"):
                names.append(tokens[1])
                roles[tokens[1]] = tokens[2][1:]
            else:
                raise GraphFormat(f"line {lineno}: expected 'node <name> [@role]'")
        elif tokens[0] == "edge":
            if len(tokens) != 4 or tokens[2] not in ("->", "--"):
                raise GraphFormat(f"line {lineno}: expected 'edge <a> -> <b>' or 'edge <a> -- <b>'")
            kind = DIRECTED if tokens[2] == "->" else UNDIRECTED
            edges.append(Edge(tokens[1], tokens[3], kind))
        else:
            raise GraphFormat(f"line {lineno}: unknown directive {tokens[0]!r}")
    return build_graph(names, edges, roles)


def graph_to_json_text(g: MixedGraph) -> str:
    return canonical_json(graph_to_json_dict(g)) + "\n"


def graph_from_json_text(text: str) -> MixedGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormat(f"invalid JSON: {exc}") from exc
    return graph_from_json_dict(data)


def load_graph(path) -> MixedGraph:
    """Load a graph from ``path``, sniffing JSON versus text by content."""
    text = FsPath(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return graph_from_json_text(text)
    return parse_graph_text(text)


def save_graph(g: MixedGraph, path, fmt=None):
    """Write ``g`` to ``path``; ``fmt`` is "json", "text", or None to infer.

    With ``fmt=None`` a ``.json`` suffix selects JSON and anything else
    selects the text format.
    """
    path = FsPath(path)
    if fmt is None:
        fmt = "json" if path.suffix == ".json" else "text"
    if fmt == "json":
        path.write_text(graph_to_json_text(g), encoding="utf-8")
    elif fmt == "text":
        path.write_text(render_graph_text(g), encoding="utf-8")
    else:
        raise ValueError(f"unknown graph format {fmt!r}")
