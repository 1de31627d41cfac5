"""Score-based causal structure learning over linear-Gaussian data.

Greedy Equivalence Search walks the space of Markov equivalence classes:
a forward sweep applies the best valid Insert operator while the BIC
score improves, then a backward sweep applies the best valid Delete.
Operator validity and score deltas follow the standard clique and
semi-directed-path conditions, so each step touches only one node's
parent set and the local scores decompose.

The CPDAG machinery (pattern construction, orientation rules, consistent
extension) also stands on its own: the interactive pruning loop produces
partially directed graphs that need re-closing and extending after every
user edit.
"""

import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

import numpy as np
from sklearn.base import BaseEstimator

from .data import Dataset, as_dataset
from .errors import (
    DegenerateColumnWarning,
    Inconsistent,
    NotADag,
    NotExtendable,
    SingularParentsWarning,
    TooFewRows,
)
from .graph import (
    DIRECTED,
    UNDIRECTED,
    Edge,
    MixedGraph,
    build_graph,
    is_acyclic,
)

RESIDUAL_FLOOR = 1e-12  # keeps ln() finite on collinear columns
RIDGE = 1e-10  # applied only when the parent submatrix is not positive definite


@dataclass(frozen=True)
class SufficientStats:
    """Sample count, per-column means, and MLE covariance of a dataset."""

    n: int
    names: tuple
    means: tuple
    cov: np.ndarray

    def index(self, name) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class GesConfig:
    """Search configuration; the defaults match the documented behavior."""

    penalty_multiplier: float = 1.0
    max_parents: Optional[int] = None
    phases: tuple = ("forward", "backward")

    def __post_init__(self):
        if not self.penalty_multiplier > 0:
            raise ValueError("penalty_multiplier must be positive")
        if self.max_parents is not None and self.max_parents < 0:
            raise ValueError("max_parents must be nonnegative")
        bad = set(self.phases) - {"forward", "backward"}
        if bad:
            raise ValueError(f"unknown phases: {sorted(bad)}")


def sufficient_stats(d: Dataset) -> SufficientStats:
    """Means and maximum-likelihood covariance (divide by n) of a dataset.

    Warns with :class:`DegenerateColumnWarning` on zero-variance columns.
    """
    if d.n_rows < 3:
        raise TooFewRows("sufficient statistics need at least 3 rows")
    x = d.matrix()
    means = x.mean(axis=0)
    centered = x - means
    cov = centered.T @ centered / d.n_rows
    cov = (cov + cov.T) / 2  # exact symmetry
    for i, name in enumerate(d.names):
        if cov[i, i] <= 0.0:
            warnings.warn(
                f"column {name!r} has zero variance", DegenerateColumnWarning, stacklevel=2
            )
    return SufficientStats(d.n_rows, tuple(d.names), tuple(float(m) for m in means), cov)


def _residual_variance(s: SufficientStats, node: int, parents: tuple) -> float:
    if not parents:
        var = s.cov[node, node]
    else:
        idx = list(parents)
        sub = s.cov[np.ix_(idx, idx)]
        cross = s.cov[idx, node]
        try:
            np.linalg.cholesky(sub)
            beta = np.linalg.solve(sub, cross)
        except np.linalg.LinAlgError:
            warnings.warn(
                f"parent covariance submatrix for column {node} is singular; "
                f"solving with a {RIDGE:g} ridge",
                SingularParentsWarning,
                stacklevel=3,
            )
            beta = np.linalg.solve(sub + RIDGE * np.eye(len(idx)), cross)
        var = s.cov[node, node] - float(cross @ beta)
    return max(float(var), RESIDUAL_FLOOR)


def bic_local(s: SufficientStats, node: int, parents: Iterable, penalty: float = 1.0) -> float:
    """Gaussian BIC local score of one node given a parent set.

    Returns ``-(n/2) ln(sigma^2) - penalty ((|parents|+1)/2) ln(n)`` where
    ``sigma^2`` is the MLE residual variance of the node regressed on its
    parents.  Structure-independent constants are dropped uniformly, so
    only score differences are meaningful.

    Parameters
    ----------
    s : SufficientStats
    node : int
        Column index of the child.
    parents : iterable of int
        Column indices of the parents; must not contain ``node``.
    penalty : float
        Multiplier on the BIC complexity penalty.
    """
    parents = tuple(sorted(parents))
    if node in parents:
        raise ValueError("a node cannot be its own parent")
    var = _residual_variance(s, node, parents)
    n = s.n
    return -(n / 2) * math.log(var) - penalty * ((len(parents) + 1) / 2) * math.log(n)


def bic_total(s: SufficientStats, g: MixedGraph, penalty: float = 1.0) -> float:
    """Total BIC of a fully directed DAG: the sum of local scores."""
    if not g.is_fully_directed or not is_acyclic(g):
        raise NotADag("total BIC is defined for fully directed acyclic graphs")
    total = 0.0
    for name in g.nodes:
        node = s.index(name)
        parents = tuple(s.index(p) for p in g.parents(name))
        total += bic_local(s, node, parents, penalty)
    return total


# -- CPDAG machinery --------------------------------------------------------


class _Pdag:
    """Mutable adjacency view used by the orientation rules and extension."""

    def __init__(self, g: MixedGraph):
        self.nodes = list(g.nodes)
        self.dir_edges = {(e.tail, e.head) for e in g.directed_edges}
        self.undir = {frozenset((e.tail, e.head)) for e in g.undirected_edges}
        self.parents = {n: set(g.parents(n)) for n in self.nodes}
        self.children = {n: set(g.children(n)) for n in self.nodes}
        self.neighbors = {n: set(g.undirected_neighbors(n)) for n in self.nodes}

    def adjacent(self, a, b):
        return b in self.parents[a] or b in self.children[a] or b in self.neighbors[a]

    def has_directed_path(self, src, dst):
        stack, seen = [src], {src}
        while stack:
            v = stack.pop()
            if v == dst:
                return True
            for c in self.children[v]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def orient(self, a, b):
        """Turn a--b into a->b, refusing cycles and fresh v-structures."""
        pair = frozenset((a, b))
        if pair not in self.undir:
            raise ValueError(f"no undirected edge between {a!r} and {b!r}")
        if self.has_directed_path(b, a):
            raise Inconsistent(f"orienting {a} -> {b} would create a directed cycle")
        for other in self.parents[b]:
            if other != a and not self.adjacent(other, a):
                raise Inconsistent(f"orienting {a} -> {b} would create a new v-structure")
        self.undir.discard(pair)
        self.neighbors[a].discard(b)
        self.neighbors[b].discard(a)
        self.dir_edges.add((a, b))
        self.parents[b].add(a)
        self.children[a].add(b)

    def to_graph(self, roles=None) -> MixedGraph:
        edges = [Edge(a, b, DIRECTED) for a, b in self.dir_edges]
        edges += [Edge(*sorted(pair), UNDIRECTED) for pair in self.undir]
        return build_graph(self.nodes, edges, roles)


def _meek_pass(p: _Pdag) -> bool:
    """Apply the first firing orientation rule; True if anything changed."""
    for pair in sorted(p.undir, key=sorted):
        for a, b in (tuple(sorted(pair)), tuple(sorted(pair, reverse=True))):
            # R1: c -> a, a -- b, c and b nonadjacent  =>  a -> b.
            if any(not p.adjacent(c, b) for c in p.parents[a]):
                p.orient(a, b)
                return True
            # R2: a -> c -> b and a -- b  =>  a -> b.
            if p.children[a] & p.parents[b]:
                p.orient(a, b)
                return True
            # R3: a -- c -> b, a -- d -> b, c and d nonadjacent  =>  a -> b.
            shared = sorted(p.neighbors[a] & p.parents[b])
            if any(
                not p.adjacent(c, d) for c, d in combinations(shared, 2)
            ):
                p.orient(a, b)
                return True
            # R4: a -- d -> c -> b with c adjacent to a and d, b nonadjacent
            # => a -> b.
            fired = False
            for d in sorted(p.neighbors[a]):
                if d == b or p.adjacent(d, b):
                    continue
                if any(p.adjacent(c, a) for c in p.children[d] & p.parents[b]):
                    p.orient(a, b)
                    fired = True
                    break
            if fired:
                return True
    return False


def meek_closure(g: MixedGraph) -> MixedGraph:
    """Close a PDAG under the four Meek orientation rules.

    Applies rules until fixpoint; never creates a directed cycle or a new
    v-structure, raising :class:`Inconsistent` when a rule would force one.
    """
    p = _Pdag(g)
    while _meek_pass(p):
        pass
    return p.to_graph(g.roles)


def dag_to_cpdag(g: MixedGraph) -> MixedGraph:
    """Canonical CPDAG of a DAG's Markov equivalence class.

    Keeps the skeleton, directs the v-structure edges, and then directs
    exactly the remaining compelled edges via the orientation rules.
    """
    if not g.is_fully_directed or not is_acyclic(g):
        raise NotADag("input must be a fully directed acyclic graph")
    compelled = set()
    for c in g.nodes:
        for a, b in combinations(sorted(g.parents(c)), 2):
            if not g.has_edge(a, b):
                compelled.add((a, c))
                compelled.add((b, c))
    edges = []
    for e in g.directed_edges:
        if (e.tail, e.head) in compelled:
            edges.append(e)
        else:
            edges.append(Edge(e.tail, e.head, UNDIRECTED))
    return meek_closure(build_graph(g.nodes, edges, g.roles))


def consistent_extension(g: MixedGraph) -> MixedGraph:
    """Orient all undirected edges of a PDAG into a consistent DAG.

    The result keeps the skeleton, every directed edge, and the
    v-structures of the input.  Repeatedly selects a sink whose undirected
    neighbors are adjacent to all of its neighbors; the lexicographically
    largest eligible node is taken, which makes the two-node graph
    ``X -- Y`` extend to ``X -> Y``.

    Raises
    ------
    NotExtendable
        If no consistent extension exists.
    """
    p = _Pdag(g)
    remaining = set(p.nodes)
    oriented = []
    while remaining:
        chosen = None
        for x in sorted(remaining, reverse=True):
            if p.children[x] & remaining:
                continue
            nbrs = (p.neighbors[x] | p.parents[x] | p.children[x]) & remaining
            undirected = p.neighbors[x] & remaining
            ok = all(
                u == v or p.adjacent(u, v) for u in undirected for v in nbrs
            )
            if ok:
                chosen = x
                break
        if chosen is None:
            raise NotExtendable("the PDAG admits no consistent extension")
        for u in p.neighbors[chosen] & remaining:
            oriented.append((u, chosen))
        remaining.discard(chosen)
    edges = [Edge(a, b, DIRECTED) for a, b in p.dir_edges]
    edges += [Edge(a, b, DIRECTED) for a, b in oriented]
    return build_graph(p.nodes, edges, g.roles)


def shd(a: MixedGraph, b: MixedGraph) -> int:
    """Structural Hamming distance: differing unordered node pairs."""
    if set(a.nodes) != set(b.nodes):
        raise ValueError("graphs must share a node set")

    def signature(g, x, y):
        e = g.edge_between(x, y)
        if e is None:
            return None
        if e.kind == UNDIRECTED:
            return UNDIRECTED
        return (e.tail, e.head)

    return sum(
        signature(a, x, y) != signature(b, x, y)
        for x, y in combinations(sorted(a.nodes), 2)
    )


# -- greedy equivalence search ----------------------------------------------


class _Scorer:
    """Memoized local scores over one dataset's sufficient statistics."""

    def __init__(self, stats: SufficientStats, penalty: float):
        self.stats = stats
        self.penalty = penalty
        self.index = {name: i for i, name in enumerate(stats.names)}
        self._cache = {}

    def local(self, y, parent_names) -> float:
        key = (y, frozenset(parent_names))
        hit = self._cache.get(key)
        if hit is None:
            hit = bic_local(
                self.stats,
                self.index[y],
                tuple(self.index[p] for p in parent_names),
                self.penalty,
            )
            self._cache[key] = hit
        return hit


def _is_clique(p: _Pdag, nodes) -> bool:
    return all(p.adjacent(a, b) for a, b in combinations(sorted(nodes), 2))


def _blocks_all_semi_directed(p: _Pdag, src, dst, blocked) -> bool:
    """True iff every semi-directed path src ~> dst passes through ``blocked``."""
    if src in blocked:
        return True
    stack, seen = [src], {src}
    while stack:
        v = stack.pop()
        if v == dst:
            return False
        for nxt in p.children[v] | p.neighbors[v]:
            if nxt not in seen and nxt not in blocked:
                seen.add(nxt)
                stack.append(nxt)
    return True


def _subsets_with_clique(p, na, candidates):
    """Subsets T of ``candidates`` (sorted) with NA(Y,X) union T a clique.

    A subset containing a nonadjacent pair stays nonadjacent in every
    superset, so the search prunes whole branches.
    """
    out = []

    def grow(prefix, rest):
        out.append(tuple(prefix))
        for i, t in enumerate(rest):
            if all(p.adjacent(t, m) for m in na) and all(p.adjacent(t, m) for m in prefix):
                prefix.append(t)
                grow(prefix, rest[i + 1 :])
                prefix.pop()

    if _is_clique(p, na):
        grow([], list(candidates))
    return out


def _best_insert(p, scorer, names, max_parents):
    best = None
    for y in names:
        nbrs_y = p.neighbors[y]
        pa_y = p.parents[y]
        for x in names:
            if x == y or p.adjacent(x, y):
                continue
            na = {m for m in nbrs_y if p.adjacent(m, x)}
            t_candidates = sorted(m for m in nbrs_y if not p.adjacent(m, x))
            for t in _subsets_with_clique(p, na, t_candidates):
                base = pa_y | na | set(t)
                if max_parents is not None and len(base) + 1 > max_parents:
                    continue
                if not _blocks_all_semi_directed(p, y, x, na | set(t)):
                    continue
                delta = scorer.local(y, base | {x}) - scorer.local(y, base)
                key = (x, y, t)
                if best is None or delta > best[0] or (delta == best[0] and key < best[1]):
                    best = (delta, key)
    return best


def _best_delete(p, scorer, names):
    best = None
    pairs = [(a, b) for a, b in p.dir_edges]
    pairs += [tup for pair in p.undir for tup in (tuple(sorted(pair)), tuple(sorted(pair, reverse=True)))]
    for x, y in pairs:
        na = {m for m in p.neighbors[y] if p.adjacent(m, x)}
        pa_y_less_x = p.parents[y] - {x}
        for h_size in range(len(na) + 1):
            for h in combinations(sorted(na), h_size):
                remaining = na - set(h)
                if not _is_clique(p, remaining):
                    continue
                base = remaining | pa_y_less_x
                delta = scorer.local(y, base) - scorer.local(y, base | {x})
                key = (x, y, h)
                if best is None or delta > best[0] or (delta == best[0] and key < best[1]):
                    best = (delta, key)
    return best


def _apply_insert(p: _Pdag, x, y, t):
    p.dir_edges.add((x, y))
    p.parents[y].add(x)
    p.children[x].add(y)
    for m in t:
        pair = frozenset((m, y))
        p.undir.discard(pair)
        p.neighbors[m].discard(y)
        p.neighbors[y].discard(m)
        p.dir_edges.add((m, y))
        p.parents[y].add(m)
        p.children[m].add(y)


def _apply_delete(p: _Pdag, x, y, h):
    if (x, y) in p.dir_edges:
        p.dir_edges.discard((x, y))
        p.parents[y].discard(x)
        p.children[x].discard(y)
    else:
        pair = frozenset((x, y))
        p.undir.discard(pair)
        p.neighbors[x].discard(y)
        p.neighbors[y].discard(x)
    for m in h:
        pair = frozenset((m, y))
        if pair in p.undir:
            p.undir.discard(pair)
            p.neighbors[m].discard(y)
            p.neighbors[y].discard(m)
            p.dir_edges.add((y, m))
            p.parents[m].add(y)
            p.children[y].add(m)
        pair = frozenset((m, x))
        if pair in p.undir:
            p.undir.discard(pair)
            p.neighbors[m].discard(x)
            p.neighbors[x].discard(m)
            p.dir_edges.add((x, m))
            p.parents[m].add(x)
            p.children[x].add(m)


def _recompose(p: _Pdag) -> MixedGraph:
    return dag_to_cpdag(consistent_extension(p.to_graph()))


MIN_DELTA = 1e-10  # strictly-improving threshold; guards against float noise loops


def ges(d: Dataset, cfg: Optional[GesConfig] = None) -> MixedGraph:
    """Greedy Equivalence Search; returns the CPDAG of the best class found.

    Runs the forward Insert sweep to a local optimum, then the backward
    Delete sweep.  Deterministic for fixed input bytes: score ties break
    lexicographically on the operator's node names.

    Parameters
    ----------
    d : Dataset
        Rows must exceed the column count.
    cfg : GesConfig, optional

    Returns
    -------
    MixedGraph
        A CPDAG over the dataset's column names.
    """
    cfg = cfg or GesConfig()
    if d.n_rows <= d.n_cols:
        raise TooFewRows("structure search needs more rows than columns")
    stats = sufficient_stats(d)
    scorer = _Scorer(stats, cfg.penalty_multiplier)
    names = sorted(d.names)
    state = build_graph(d.names, ())

    if "forward" in cfg.phases:
        while True:
            p = _Pdag(state)
            best = _best_insert(p, scorer, names, cfg.max_parents)
            if best is None or best[0] <= MIN_DELTA:
                break
            x, y, t = best[1]
            _apply_insert(p, x, y, t)
            state = _recompose(p)

    if "backward" in cfg.phases:
        while True:
            p = _Pdag(state)
            best = _best_delete(p, scorer, names)
            if best is None or best[0] <= MIN_DELTA:
                break
            x, y, h = best[1]
            _apply_delete(p, x, y, h)
            state = _recompose(p)

    return state


class GreedyEquivalenceSearch(BaseEstimator):
    """Estimator-style wrapper around :func:`ges`.

    Follows the fit/attributes convention: ``fit`` accepts a Dataset or a
    2-D array plus ``feature_names`` and stores the learned CPDAG on
    ``cpdag_``.

    Parameters
    ----------
    penalty_multiplier : float
        Multiplier on the BIC complexity penalty; larger means sparser.
    max_parents : int or None
        Cap on any node's parent count during the search.
    phases : tuple of str
        Subset of ``("forward", "backward")``.
    """

    def __init__(self, penalty_multiplier=1.0, max_parents=None, phases=("forward", "backward")):
        self.penalty_multiplier = penalty_multiplier
        self.max_parents = max_parents
        self.phases = phases

    def fit(self, X, y=None, feature_names=None):
        d = as_dataset(X, names=feature_names)
        cfg = GesConfig(
            penalty_multiplier=self.penalty_multiplier,
            max_parents=self.max_parents,
            phases=tuple(self.phases),
        )
        self.cpdag_ = ges(d, cfg)
        self.feature_names_in_ = d.names
        self.n_features_in_ = d.n_cols
        return self
