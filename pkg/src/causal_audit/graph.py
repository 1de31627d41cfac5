"""Directed and partially directed graphs with path-level causal semantics.

The graph model is deliberately small: named nodes, at most one edge per
unordered node pair, each edge either directed or undirected.  Undirected
edges are legal in storage (they carry equivalence-class output from
discovery), but every query that depends on edge orientation, such as
d-separation or path classification, demands a fully directed acyclic
graph and fails loudly otherwise rather than silently orienting edges.

Graphs are immutable value objects: anything mutation-shaped returns a
new graph, so query results can never be invalidated behind a caller's
back and graphs are safe to share across threads.
"""

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    EndpointConditioned,
    GraphFormat,
    NotADag,
    OverlappingSets,
    SelfLoop,
    UndirectedEdge,
    UnknownEndpoint,
    UnknownNode,
)

DIRECTED = "directed"
UNDIRECTED = "undirected"
EDGE_KINDS = (DIRECTED, UNDIRECTED)

ROLE_NONE = "none"
ROLES = (ROLE_NONE, "exposure", "outcome", "adjusted", "unobserved")


class Edge(NamedTuple):
    """A single edge; ``kind`` is ``"directed"`` (tail -> head) or ``"undirected"``."""

    tail: str
    head: str
    kind: str = DIRECTED


@dataclass(frozen=True)
class Path:
    """A simple path: ``nodes`` in visit order and the connecting ``edges``.

    Edge direction is independent of visit order; ``edges[i]`` joins
    ``nodes[i]`` and ``nodes[i + 1]`` but may point either way.
    """

    nodes: tuple
    edges: tuple

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True)
class PathClass:
    """Classification of one path: ``value`` plus the conditioning set used."""

    value: str  # one of "directed", "backdoor", "closed"
    open_given: frozenset


def _check_name(name):
    if not isinstance(name, str) or not name:
        raise GraphFormat(f"node name must be a nonempty string, got {name!r}")
    if any(ch.isspace() for ch in name):
        # Whitespace in names would break the line-oriented text format.
        raise GraphFormat(f"node name may not contain whitespace: {name!r}")


class MixedGraph:
    """Immutable node/edge store for DAGs and CPDAGs.

    Parameters
    ----------
    nodes : iterable of str
        Node names; byte-identical duplicates collapse to one node.
    edges : iterable of Edge or (tail, head) or (tail, head, kind)
        At most one edge per unordered node pair.
    roles : mapping of str to str, optional
        Node role annotations; values from ``ROLES``.  Nodes without an
        entry have role ``"none"``.

    Raises
    ------
    SelfLoop, DuplicateEdge, UnknownEndpoint, UnknownNode, GraphFormat
    """

    __slots__ = (
        "_nodes",
        "_edges",
        "_roles",
        "_parents",
        "_children",
        "_undirected",
        "_by_pair",
        "_desc_cache",
        "_anc_cache",
    )

    def __init__(self, nodes, edges=(), roles=None):
        node_set = set()
        for name in nodes:
            _check_name(name)
            node_set.add(name)

        normalized = []
        by_pair = {}
        parents = {n: set() for n in node_set}
        children = {n: set() for n in node_set}
        undirected = {n: set() for n in node_set}
        for raw in edges:
            e = Edge(*raw)
            if e.kind not in EDGE_KINDS:
                raise GraphFormat(f"unknown edge kind {e.kind!r}")
            if e.tail == e.head:
                raise SelfLoop(f"self loop on {e.tail!r}")
            for endpoint in (e.tail, e.head):
                if endpoint not in node_set:
                    raise UnknownEndpoint(f"edge endpoint {endpoint!r} is not a node")
            pair = frozenset((e.tail, e.head))
            if pair in by_pair:
                raise DuplicateEdge(f"more than one edge between {e.tail!r} and {e.head!r}")
            if e.kind == UNDIRECTED and e.tail > e.head:
                # Canonical storage order for undirected edges keeps
                # serialization byte-stable.
                e = Edge(e.head, e.tail, UNDIRECTED)
            by_pair[pair] = e
            normalized.append(e)
            if e.kind == DIRECTED:
                parents[e.head].add(e.tail)
                children[e.tail].add(e.head)
            else:
                undirected[e.tail].add(e.head)
                undirected[e.head].add(e.tail)

        role_map = {}
        for name, role in dict(roles or {}).items():
            if name not in node_set:
                raise UnknownNode(f"role assigned to unknown node {name!r}")
            if role not in ROLES:
                raise GraphFormat(f"unknown role {role!r} for node {name!r}")
            if role != ROLE_NONE:
                role_map[name] = role

        object.__setattr__(self, "_nodes", tuple(sorted(node_set)))
        object.__setattr__(self, "_edges", tuple(sorted(normalized)))
        object.__setattr__(self, "_roles", role_map)
        object.__setattr__(self, "_parents", {n: frozenset(s) for n, s in parents.items()})
        object.__setattr__(self, "_children", {n: frozenset(s) for n, s in children.items()})
        object.__setattr__(self, "_undirected", {n: frozenset(s) for n, s in undirected.items()})
        object.__setattr__(self, "_by_pair", by_pair)
        object.__setattr__(self, "_desc_cache", {})
        object.__setattr__(self, "_anc_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("MixedGraph is immutable")

    # -- basic accessors ------------------------------------------------

    @property
    def nodes(self):
        return self._nodes

    @property
    def edges(self):
        return self._edges

    @property
    def directed_edges(self):
        return tuple(e for e in self._edges if e.kind == DIRECTED)

    @property
    def undirected_edges(self):
        return tuple(e for e in self._edges if e.kind == UNDIRECTED)

    @property
    def is_fully_directed(self):
        return all(e.kind == DIRECTED for e in self._edges)

    def role(self, name):
        self._check_node(name)
        return self._roles.get(name, ROLE_NONE)

    @property
    def roles(self):
        """Mapping of node name to role, omitting ``"none"`` entries."""
        return dict(self._roles)

    def has_node(self, name):
        return name in self._parents

    def parents(self, name):
        self._check_node(name)
        return self._parents[name]

    def children(self, name):
        self._check_node(name)
        return self._children[name]

    def undirected_neighbors(self, name):
        self._check_node(name)
        return self._undirected[name]

    def adjacent(self, name):
        self._check_node(name)
        return self._parents[name] | self._children[name] | self._undirected[name]

    def edge_between(self, a, b) -> Optional[Edge]:
        return self._by_pair.get(frozenset((a, b)))

    def has_edge(self, a, b):
        return frozenset((a, b)) in self._by_pair

    def _check_node(self, name):
        if name not in self._parents:
            raise UnknownNode(f"unknown node {name!r}")

    # -- value semantics ------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (
            self._nodes == other._nodes
            and self._edges == other._edges
            and self._roles == other._roles
        )

    def __hash__(self):
        return hash((self._nodes, self._edges, tuple(sorted(self._roles.items()))))

    def __repr__(self):
        return f"MixedGraph({len(self._nodes)} nodes, {len(self._edges)} edges)"

    def with_roles(self, roles):
        """Return a copy of this graph with ``roles`` replacing all roles."""
        return MixedGraph(self._nodes, self._edges, roles)


def build_graph(nodes, edges=(), roles=None) -> MixedGraph:
    """Construct a validated :class:`MixedGraph`.

    Parameters
    ----------
    nodes : iterable of str
    edges : iterable of Edge or tuples
    roles : mapping, optional

    Returns
    -------
    MixedGraph

    Raises
    ------
    SelfLoop, DuplicateEdge, UnknownEndpoint
    """
    return MixedGraph(nodes, edges, roles)


def is_acyclic(g: MixedGraph) -> bool:
    """True iff the directed subgraph of ``g`` has no directed cycle.

    Undirected edges are ignored.
    """
    indeg = {n: len(g.parents(n)) for n in g.nodes}
    queue = deque(n for n, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        n = queue.popleft()
        seen += 1
        for c in g.children(n):
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return seen == len(g.nodes)


def _require_acyclic(g):
    if not is_acyclic(g):
        raise NotADag("the directed subgraph contains a cycle")


def _require_dag(g):
    if not g.is_fully_directed:
        raise UndirectedEdge(
            "this query needs a fully directed graph; orient or remove undirected edges first"
        )
    _require_acyclic(g)


def topological_order(g: MixedGraph) -> tuple:
    """A topological order of a fully directed acyclic graph.

    Ties are broken lexicographically so the order is deterministic.
    """
    _require_dag(g)
    indeg = {n: len(g.parents(n)) for n in g.nodes}
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        changed = False
        for c in g.children(n):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
                changed = True
        if changed:
            ready.sort()
    return tuple(order)


def ancestors(g: MixedGraph, x: str) -> frozenset:
    """Strict ancestors of ``x`` along directed edges (``x`` excluded)."""
    g._check_node(x)
    cached = g._anc_cache.get(x)
    if cached is not None:
        return cached
    _require_acyclic(g)
    out = set()
    stack = [x]
    while stack:
        for p in g.parents(stack.pop()):
            if p not in out:
                out.add(p)
                stack.append(p)
    result = frozenset(out)
    g._anc_cache[x] = result
    return result


def descendants(g: MixedGraph, x: str) -> frozenset:
    """Strict descendants of ``x`` along directed edges (``x`` excluded)."""
    g._check_node(x)
    cached = g._desc_cache.get(x)
    if cached is not None:
        return cached
    _require_acyclic(g)
    out = set()
    stack = [x]
    while stack:
        for c in g.children(stack.pop()):
            if c not in out:
                out.add(c)
                stack.append(c)
    result = frozenset(out)
    g._desc_cache[x] = result
    return result


def enumerate_paths(g: MixedGraph, x: str, y: str, max_len: int) -> list:
    """All simple paths between ``x`` and ``y`` with at most ``max_len`` edges.

    Edge direction is ignored for traversal.  The result is ordered by
    path length, then lexicographically by the node-name sequence, so
    reports and tests are stable.

    Parameters
    ----------
    g : MixedGraph
    x, y : str
        Distinct endpoints.
    max_len : int
        Maximum number of edges per path; must be >= 1.

    Returns
    -------
    list of Path
    """
    g._check_node(x)
    g._check_node(y)
    if x == y:
        raise ValueError("path endpoints must differ")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")

    found = []
    path_nodes = [x]
    on_path = {x}

    def walk(current):
        if len(path_nodes) - 1 >= max_len:
            return
        for nxt in sorted(g.adjacent(current)):
            if nxt in on_path:
                continue
            path_nodes.append(nxt)
            if nxt == y:
                found.append(tuple(path_nodes))
            else:
                on_path.add(nxt)
                walk(nxt)
                on_path.discard(nxt)
            path_nodes.pop()

    walk(x)
    found.sort(key=lambda seq: (len(seq), seq))
    out = []
    for seq in found:
        edges = tuple(g.edge_between(a, b) for a, b in zip(seq, seq[1:]))
        out.append(Path(nodes=seq, edges=edges))
    return out


def _validated_path(g, p):
    nodes = tuple(p.nodes)
    if len(nodes) < 2 or len(set(nodes)) != len(nodes):
        raise ValueError("a path needs >= 2 distinct nodes")
    edges = []
    for a, b in zip(nodes, nodes[1:]):
        g._check_node(a)
        g._check_node(b)
        e = g.edge_between(a, b)
        if e is None:
            raise ValueError(f"consecutive path nodes {a!r}, {b!r} are not adjacent")
        edges.append(e)
    return nodes, tuple(edges)


def _collider_flags(nodes, edges):
    """For each interior position i, True iff both incident edges point into nodes[i]."""
    flags = []
    for i in range(1, len(nodes) - 1):
        left, right = edges[i - 1], edges[i]
        into_left = left.kind == DIRECTED and left.head == nodes[i]
        into_right = right.kind == DIRECTED and right.head == nodes[i]
        flags.append(into_left and into_right)
    return flags


def path_open(g: MixedGraph, p: Path, z: Iterable) -> bool:
    """Decide whether path ``p`` is open (d-connecting) given ``z``.

    A path is open iff every non-collider on it lies outside ``z`` and
    every collider on it is in ``z`` or has a descendant in ``z``.

    Raises
    ------
    EndpointConditioned
        If an endpoint of ``p`` is in ``z``.
    UndirectedEdge, NotADag
        If ``g`` is not a fully directed acyclic graph.
    """
    _require_dag(g)
    z = frozenset(z)
    for name in z:
        g._check_node(name)
    nodes, edges = _validated_path(g, p)
    if nodes[0] in z or nodes[-1] in z:
        raise EndpointConditioned("a path endpoint is in the conditioning set")
    for i, is_collider in enumerate(_collider_flags(nodes, edges), start=1):
        v = nodes[i]
        if is_collider:
            if v not in z and not (descendants(g, v) & z):
                return False
        elif v in z:
            return False
    return True


def classify_path(g: MixedGraph, p: Path, x: str, z: Iterable) -> PathClass:
    """Classify a path from ``x`` as directed, backdoor, or closed.

    ``directed`` means every edge points away from ``x`` along the
    sequence; otherwise the path is ``backdoor`` if open given ``z`` and
    ``closed`` if blocked.
    """
    z = frozenset(z)
    nodes, edges = _validated_path(g, p)
    if nodes[0] != x:
        raise ValueError("path must start at x")
    directed_away = all(
        e.kind == DIRECTED and e.tail == a and e.head == b
        for e, a, b in zip(edges, nodes, nodes[1:])
    )
    if directed_away:
        # Orientation alone decides; still reject conditioned endpoints
        # so all three classes share one precondition.
        _require_dag(g)
        for name in z:
            g._check_node(name)
        if nodes[0] in z or nodes[-1] in z:
            raise EndpointConditioned("a path endpoint is in the conditioning set")
        return PathClass("directed", z)
    if path_open(g, p, z):
        return PathClass("backdoor", z)
    return PathClass("closed", z)


def d_separated(g: MixedGraph, xs: Iterable, ys: Iterable, z: Iterable) -> bool:
    """Decide d-separation of node sets ``xs`` and ``ys`` given ``z``.

    Implemented as reachability over (node, travel direction) states, so
    it runs in time linear in the graph size rather than enumerating
    paths; the path-enumeration route exists independently for testing.

    Parameters
    ----------
    g : MixedGraph
        Fully directed acyclic graph.
    xs, ys, z : iterables of str
        ``xs``, ``ys``, and ``z`` must be pairwise disjoint.

    Returns
    -------
    bool
        True iff every path between ``xs`` and ``ys`` is blocked by ``z``.
    """
    _require_dag(g)
    xs, ys, z = frozenset(xs), frozenset(ys), frozenset(z)
    for name in xs | ys | z:
        g._check_node(name)
    if xs & ys or xs & z or ys & z:
        raise OverlappingSets("xs, ys, and z must be pairwise disjoint")
    if not xs or not ys:
        return True

    # Ancestors of z (inclusive) decide whether a collider may be passed.
    anc_z = set(z)
    stack = list(z)
    while stack:
        for p in g.parents(stack.pop()):
            if p not in anc_z:
                anc_z.add(p)
                stack.append(p)

    UP, DOWN = True, False  # UP: entered from a child; DOWN: entered from a parent
    visited = set()
    queue = deque((x, UP) for x in xs)
    reached = set(xs)
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in z:
            reached.add(node)
        if direction == UP:
            if node not in z:
                for p in g.parents(node):
                    queue.append((p, UP))
                for c in g.children(node):
                    queue.append((c, DOWN))
        else:
            if node not in z:
                for c in g.children(node):
                    queue.append((c, DOWN))
            if node in anc_z:
                # Collider on the trail: passable because node is in z or
                # has a descendant in z.
                for p in g.parents(node):
                    queue.append((p, UP))
    return not (reached & ys)


def random_dag(n_nodes: int, edge_prob: float = 0.35, seed: int = 0) -> MixedGraph:
    """A seeded Erdos-Renyi DAG over a shuffled topological order.

    Node names are single letters starting at ``"A"`` for up to 26 nodes;
    the topological order is a seeded permutation of those names, and each
    forward pair receives an edge with probability ``edge_prob``.
    """
    if not 1 <= n_nodes <= 26:
        raise ValueError("n_nodes must be between 1 and 26")
    rng = np.random.default_rng(seed)
    names = [chr(ord("A") + i) for i in range(n_nodes)]
    order = [names[i] for i in rng.permutation(n_nodes)]
    edges = []
    for i, j in combinations(range(n_nodes), 2):
        if rng.random() < edge_prob:
            edges.append(Edge(order[i], order[j], DIRECTED))
    return build_graph(names, edges)
