"""Backdoor-criterion checks, adjustment-set enumeration, and feature audits.

The audit treats a regression's feature set as a conditioning set: a
feature held fixed while exposures vary behaves like a conditioned
variable, and an omitted feature is marginalized.  That single reading
is what connects "which columns went into the model" to "which paths
between exposure and outcome are open".

Enumeration is deliberately brute force over the observed covariates
(bounded at 25) with the path set compiled once per query, which is
exact and fast at the intended desk scale.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

from .errors import (
    FeatureIsExposureOrOutcome,
    GraphFormat,
    OverlappingSets,
    TooManyCandidates,
    UnknownNode,
)
from .graph import DIRECTED, MixedGraph, _require_dag, descendants, enumerate_paths
from .io import FORMAT_VERSION

EFFECT_KINDS = ("total", "direct")

MAX_OBSERVED = 25  # brute-force bound for subset enumeration


@dataclass(frozen=True)
class CausalQuery:
    """Exposures, outcome, and candidate covariates for one causal question.

    ``observed`` is the candidate adjustment pool; it never contains the
    exposures or the outcome.  ``effect_kind`` distinguishes total-effect
    questions (mediator conditioning is harmful) from direct-effect
    questions (only the direct edge matters).
    """

    exposures: frozenset
    outcome: str
    observed: frozenset
    effect_kind: str = "total"

    def __post_init__(self):
        object.__setattr__(self, "exposures", frozenset(self.exposures))
        object.__setattr__(self, "observed", frozenset(self.observed))
        if not self.exposures:
            raise ValueError("a query needs at least one exposure")
        if self.effect_kind not in EFFECT_KINDS:
            raise ValueError(f"effect_kind must be one of {EFFECT_KINDS}")
        if self.outcome in self.exposures:
            raise OverlappingSets("outcome cannot also be an exposure")
        bad = self.observed & (self.exposures | {self.outcome})
        if bad:
            raise OverlappingSets(f"observed set overlaps exposures/outcome: {sorted(bad)}")


def build_query(
    g: MixedGraph,
    exposures: Iterable,
    outcome: str,
    observed: Optional[Iterable] = None,
    effect_kind: str = "total",
) -> CausalQuery:
    """Validate a query against ``g``.

    With ``observed=None`` the candidate pool defaults to every node that
    is not an exposure, not the outcome, and not annotated ``@unobserved``.
    """
    exposures = frozenset(exposures)
    for name in exposures | {outcome}:
        g._check_node(name)
    if observed is None:
        observed = {
            n
            for n in g.nodes
            if n not in exposures and n != outcome and g.role(n) != "unobserved"
        }
    else:
        observed = frozenset(observed)
        for name in observed:
            g._check_node(name)
    return CausalQuery(exposures, outcome, observed, effect_kind)


def query_to_json_dict(q: CausalQuery) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "exposures": sorted(q.exposures),
        "outcome": q.outcome,
        "observed": sorted(q.observed),
        "effect_kind": q.effect_kind,
    }


def query_from_json_dict(data) -> CausalQuery:
    if not isinstance(data, dict):
        raise GraphFormat("query JSON must be an object")
    try:
        return CausalQuery(
            frozenset(data["exposures"]),
            data["outcome"],
            frozenset(data.get("observed", ())),
            data.get("effect_kind", "total"),
        )
    except (KeyError, TypeError) as exc:
        raise GraphFormat(f"bad query JSON: {exc}") from exc


@dataclass(frozen=True)
class AdjustmentSet:
    members: frozenset
    minimal: bool


@dataclass(frozen=True)
class AuditReport:
    """Outcome of auditing one feature set against one query."""

    verdict: str  # "unbiased" or "biased"
    open_biasing_paths: tuple
    blocked_causal_paths: tuple
    conditioned_colliders: tuple
    suggestions: tuple  # (action, node) pairs, action in {"add", "remove"}
    minimal_sets: tuple

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "verdict": self.verdict,
            "open_biasing_paths": [list(p.nodes) for p in self.open_biasing_paths],
            "blocked_causal_paths": [list(p.nodes) for p in self.blocked_causal_paths],
            "conditioned_colliders": list(self.conditioned_colliders),
            "suggestions": [{"action": a, "node": n} for a, n in self.suggestions],
            "minimal_sets": [sorted(s.members) for s in self.minimal_sets],
        }


def _check_query_nodes(g, q):
    for name in q.exposures | {q.outcome} | q.observed:
        g._check_node(name)


def proper_causal_paths(g: MixedGraph, q: CausalQuery) -> list:
    """All directed paths from any exposure to the outcome.

    Ordered by exposure name, then by (length, node sequence).
    """
    _check_query_nodes(g, q)
    out = []
    limit = max(1, len(g.nodes) - 1)
    for x in sorted(q.exposures):
        for p in enumerate_paths(g, x, q.outcome, limit):
            if all(
                e.kind == DIRECTED and e.tail == a and e.head == b
                for e, a, b in zip(p.edges, p.nodes, p.nodes[1:])
            ):
                out.append(p)
    return out


class _CompiledPath:
    """One exposure-outcome path reduced to its blocking structure.

    ``non_colliders`` are the interior chain/fork nodes; ``collider_closures``
    holds, per interior collider, the collider together with all of its
    descendants.  Openness given z is then two set checks.
    """

    __slots__ = ("path", "causal", "non_colliders", "collider_closures")

    def __init__(self, g, path):
        self.path = path
        nodes, edges = path.nodes, path.edges
        self.causal = all(
            e.kind == DIRECTED and e.tail == a and e.head == b
            for e, a, b in zip(edges, nodes, nodes[1:])
        )
        non_colliders = []
        closures = []
        for i in range(1, len(nodes) - 1):
            left, right = edges[i - 1], edges[i]
            into = (left.head == nodes[i]) and (right.head == nodes[i])
            if into:
                closures.append(frozenset({nodes[i]}) | descendants(g, nodes[i]))
            else:
                non_colliders.append(nodes[i])
        self.non_colliders = tuple(non_colliders)
        self.collider_closures = tuple(closures)

    def open_given(self, z) -> bool:
        if any(v in z for v in self.non_colliders):
            return False
        return all(closure & z for closure in self.collider_closures)


class _QueryIndex:
    """All simple exposure-outcome paths of a query, compiled once."""

    def __init__(self, g: MixedGraph, q: CausalQuery):
        _require_dag(g)
        _check_query_nodes(g, q)
        self.exposure_descendants = frozenset().union(
            *(descendants(g, x) for x in sorted(q.exposures))
        )
        limit = max(1, len(g.nodes) - 1)
        self.paths = []
        for x in sorted(q.exposures):
            for p in enumerate_paths(g, x, q.outcome, limit):
                self.paths.append(_CompiledPath(g, p))
        # A backdoor path starts with an edge into its exposure.
        self.backdoor = tuple(
            cp
            for cp in self.paths
            if cp.path.edges[0].kind == DIRECTED and cp.path.edges[0].head == cp.path.nodes[0]
        )

    def satisfies_backdoor(self, z) -> bool:
        if z & self.exposure_descendants:
            return False
        return not any(cp.open_given(z) for cp in self.backdoor)


def _check_adjustment_candidate(q, z):
    z = frozenset(z)
    bad = z & (q.exposures | {q.outcome})
    if bad:
        raise FeatureIsExposureOrOutcome(
            f"adjustment candidates may not include exposures or the outcome: {sorted(bad)}"
        )
    return z


def satisfies_backdoor(g: MixedGraph, q: CausalQuery, z: Iterable) -> bool:
    """Check the backdoor criterion for adjustment set ``z``.

    True iff (a) ``z`` contains no descendant of any exposure and (b)
    every path that starts with an edge into an exposure and ends at the
    outcome is blocked given ``z``.
    """
    z = _check_adjustment_candidate(q, z)
    for name in z:
        g._check_node(name)
    return _QueryIndex(g, q).satisfies_backdoor(z)


def _sufficient_sets(index, q):
    """Sufficient subsets in (size, lexicographic) order, with minimal flags."""
    observed = sorted(q.observed)
    if len(observed) > MAX_OBSERVED:
        raise TooManyCandidates(
            f"{len(observed)} observed covariates exceed the enumeration bound of {MAX_OBSERVED}"
        )
    sufficient = []
    minimal_found = []
    for size in range(len(observed) + 1):
        for combo in combinations(observed, size):
            z = frozenset(combo)
            if not index.satisfies_backdoor(z):
                continue
            # Any sufficient proper subset contains a minimal one, and all
            # smaller sufficient sets were already processed, so comparing
            # against found minimal sets decides minimality exactly.
            is_minimal = not any(m < z for m in minimal_found)
            if is_minimal:
                minimal_found.append(z)
            sufficient.append(AdjustmentSet(z, is_minimal))
    return sufficient


def all_sufficient_sets(g: MixedGraph, q: CausalQuery) -> list:
    """Every subset of ``q.observed`` that satisfies the backdoor criterion.

    Returns
    -------
    list of AdjustmentSet
        In deterministic (size, lexicographic) order; inclusion-minimal
        entries are flagged ``minimal=True``.

    Raises
    ------
    TooManyCandidates
        If ``q.observed`` has more than 25 members.
    """
    return _sufficient_sets(_QueryIndex(g, q), q)


def minimal_sufficient_sets(g: MixedGraph, q: CausalQuery) -> list:
    """The inclusion-minimal sufficient adjustment sets, smallest first."""
    return [s for s in all_sufficient_sets(g, q) if s.minimal]


def _verdict(index, q, features):
    open_biasing = [cp for cp in index.paths if not cp.causal and cp.open_given(features)]
    if q.effect_kind == "total":
        blocked_causal = [
            cp for cp in index.paths if cp.causal and not cp.open_given(features)
        ]
    else:
        # Direct-effect reading: only the direct exposure->outcome edge is
        # the estimand, and a direct edge has no interior node to block.
        blocked_causal = []
    verdict = "unbiased" if not open_biasing and not blocked_causal else "biased"
    return verdict, open_biasing, blocked_causal


def audit_feature_set(g: MixedGraph, q: CausalQuery, features: Iterable) -> AuditReport:
    """Audit a feature set, treating included features as conditioned.

    Parameters
    ----------
    g : MixedGraph
        Fully directed acyclic graph.
    q : CausalQuery
    features : iterable of str
        The covariates included in the model; must be drawn from
        ``q.observed``.

    Returns
    -------
    AuditReport
        Verdict plus the open biasing paths, blocked causal paths,
        conditioned colliders, single-edit repair suggestions, and the
        minimal sufficient adjustment sets of the query.
    """
    features = frozenset(features)
    for name in features:
        g._check_node(name)
    bad = features & (q.exposures | {q.outcome})
    if bad:
        raise FeatureIsExposureOrOutcome(
            f"features may not include exposures or the outcome: {sorted(bad)}"
        )
    stray = features - q.observed
    if stray:
        raise UnknownNode(f"features outside the query's observed set: {sorted(stray)}")

    index = _QueryIndex(g, q)
    verdict, open_biasing, blocked_causal = _verdict(index, q, features)

    colliders = set()
    for cp in index.paths:
        nodes, edges = cp.path.nodes, cp.path.edges
        for i in range(1, len(nodes) - 1):
            if edges[i - 1].head == nodes[i] and edges[i].head == nodes[i]:
                if nodes[i] in features or (descendants(g, nodes[i]) & features):
                    colliders.add(nodes[i])

    suggestions = []
    if verdict == "biased":
        for name in sorted(q.observed - features):
            if _verdict(index, q, features | {name})[0] == "unbiased":
                suggestions.append(("add", name))
        for name in sorted(features):
            if _verdict(index, q, features - {name})[0] == "unbiased":
                suggestions.append(("remove", name))

    return AuditReport(
        verdict=verdict,
        open_biasing_paths=tuple(cp.path for cp in open_biasing),
        blocked_causal_paths=tuple(cp.path for cp in blocked_causal),
        conditioned_colliders=tuple(sorted(colliders)),
        suggestions=tuple(suggestions),
        minimal_sets=tuple(s for s in _sufficient_sets(index, q) if s.minimal),
    )
