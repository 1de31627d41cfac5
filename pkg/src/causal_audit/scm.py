"""Linear-Gaussian structural causal models: sampling, interventions, truth.

Each variable is an affine function of its parents plus independent
Gaussian noise, declared in an order where parents precede children, so
acyclicity holds by construction.  Linearity buys an analytic oracle:
the average causal effect is the sum over directed paths of the product
of edge coefficients, which is what the estimator experiments compare
against.

Sampling draws the full noise matrix in declared variable order before
assembling any variable, so an intervention leaves the samples of every
non-descendant bitwise unchanged at the same seed.
"""

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path as FsPath
from typing import Mapping, Optional, Sequence

import numpy as np

from .adjustment import query_from_json_dict
from .data import Dataset
from .errors import ScmFormat, UnknownVariable
from .graph import DIRECTED, Edge, MixedGraph, build_graph
from .io import FORMAT_VERSION, canonical_json


@dataclass(frozen=True)
class ScmVariable:
    name: str
    parents: tuple
    coefficients: tuple
    intercept: float
    noise_std: float


@dataclass(frozen=True)
class ScmSpec:
    """An ordered list of variables plus optional per-variable value ranges."""

    variables: tuple
    ranges: Optional[Mapping] = None

    def names(self):
        return tuple(v.name for v in self.variables)

    def variable(self, name) -> ScmVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariable(f"unknown variable {name!r}")


def build_scm(variables: Sequence, ranges: Optional[Mapping] = None) -> ScmSpec:
    """Validate and freeze an SCM specification.

    ``variables`` is a sequence of (name, parents, coefficients,
    intercept, noise_std) tuples or :class:`ScmVariable`; parents must be
    declared earlier in the sequence.
    """
    seen = set()
    out = []
    for item in variables:
        v = item if isinstance(item, ScmVariable) else ScmVariable(
            item[0], tuple(item[1]), tuple(float(c) for c in item[2]), float(item[3]), float(item[4])
        )
        v = ScmVariable(
            v.name, tuple(v.parents), tuple(float(c) for c in v.coefficients),
            float(v.intercept), float(v.noise_std),
        )
        if not isinstance(v.name, str) or not v.name:
            raise ScmFormat(f"variable name must be a nonempty string, got {v.name!r}")
        if v.name in seen:
            raise ScmFormat(f"duplicate variable {v.name!r}")
        for p in v.parents:
            if p not in seen:
                raise UnknownVariable(
                    f"parent {p!r} of {v.name!r} is not declared earlier in the order"
                )
        if len(v.coefficients) != len(v.parents):
            raise ScmFormat(f"variable {v.name!r}: one coefficient per parent required")
        if v.noise_std < 0:
            raise ScmFormat(f"variable {v.name!r}: noise_std must be nonnegative")
        seen.add(v.name)
        out.append(v)
    range_map = None
    if ranges:
        range_map = {}
        for name, bounds in dict(ranges).items():
            if name not in seen:
                raise UnknownVariable(f"range given for unknown variable {name!r}")
            lo, hi = float(bounds[0]), float(bounds[1])
            if not lo < hi:
                raise ScmFormat(f"range for {name!r} must satisfy min < max")
            range_map[name] = (lo, hi)
    return ScmSpec(tuple(out), range_map)


def scm_to_json_dict(spec: ScmSpec) -> dict:
    data = {
        "format_version": FORMAT_VERSION,
        "variables": [
            {
                "name": v.name,
                "parents": list(v.parents),
                "coefficients": list(v.coefficients),
                "intercept": v.intercept,
                "noise_std": v.noise_std,
            }
            for v in spec.variables
        ],
    }
    if spec.ranges:
        data["ranges"] = {name: list(bounds) for name, bounds in sorted(spec.ranges.items())}
    return data


def scm_from_json_dict(data) -> ScmSpec:
    if not isinstance(data, dict) or "variables" not in data:
        raise ScmFormat("SCM JSON must be an object with a 'variables' array")
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ScmFormat(f"unsupported format_version {version!r}")
    variables = []
    for item in data["variables"]:
        try:
            variables.append(
                (
                    item["name"],
                    item.get("parents", []),
                    item.get("coefficients", []),
                    item.get("intercept", 0.0),
                    item.get("noise_std", 1.0),
                )
            )
        except (TypeError, KeyError) as exc:
            raise ScmFormat(f"bad variable entry {item!r}") from exc
    return build_scm(variables, data.get("ranges"))


def load_scm(path) -> ScmSpec:
    try:
        data = json.loads(FsPath(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScmFormat(f"invalid JSON: {exc}") from exc
    return scm_from_json_dict(data)


def save_scm(spec: ScmSpec, path):
    FsPath(path).write_text(canonical_json(scm_to_json_dict(spec)) + "\n", encoding="utf-8")


def scm_graph(spec: ScmSpec) -> MixedGraph:
    """The DAG induced by the parent relation (edge parent -> child)."""
    edges = [
        Edge(p, v.name, DIRECTED) for v in spec.variables for p in v.parents
    ]
    return build_graph(spec.names(), edges)


def _assemble(spec: ScmSpec, n: int, seed: int, interventions: Mapping, clamp: bool) -> Dataset:
    rng = np.random.default_rng(seed)
    # One draw for the whole noise matrix, in declared variable order:
    # interventions then leave non-descendant columns bitwise identical.
    eps = rng.standard_normal((n, len(spec.variables)))
    values = {}
    columns = []
    for j, v in enumerate(spec.variables):
        if v.name in interventions:
            col = np.full(n, float(interventions[v.name]))
        else:
            col = v.intercept + v.noise_std * eps[:, j]
            for p, c in zip(v.parents, v.coefficients):
                col = col + c * values[p]
            if clamp and spec.ranges and v.name in spec.ranges:
                lo, hi = spec.ranges[v.name]
                col = np.clip(col, lo, hi)
        values[v.name] = col
        columns.append((v.name, col))
    return Dataset(columns)


def sample(spec: ScmSpec, n: int, seed: int, clamp: bool = False) -> Dataset:
    """Ancestral sampling of ``n`` rows; deterministic per seed.

    With ``clamp=True``, variables with a declared range are clipped after
    noise is added; clamping breaks linearity, so it stays off by default
    and the analytic effect oracle assumes it is off.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return _assemble(spec, n, seed, {}, clamp)


def sample_do(
    spec: ScmSpec, interventions: Mapping, n: int, seed: int, clamp: bool = False
) -> Dataset:
    """Sample under ``do(...)``: intervened variables are held constant.

    The structural equation and noise of each intervened variable are
    severed; descendants respond, non-descendants keep the distribution
    (and, per seed, the exact values) they have under :func:`sample`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    known = set(spec.names())
    for name in interventions:
        if name not in known:
            raise UnknownVariable(f"cannot intervene on unknown variable {name!r}")
    return _assemble(spec, n, seed, dict(interventions), clamp)


def true_ace(spec: ScmSpec, exposure: str, t1: float, t0: float, outcome: str) -> float:
    """Analytic average causal effect of ``exposure`` on ``outcome``.

    For a linear SCM this is ``(t1 - t0)`` times the sum over all directed
    exposure-to-outcome paths of the product of edge coefficients,
    accumulated in one pass over the declared order.
    """
    names = spec.names()
    for name in (exposure, outcome):
        if name not in names:
            raise UnknownVariable(f"unknown variable {name!r}")
    if exposure == outcome:
        raise ValueError("exposure and outcome must differ")
    effect = {exposure: 1.0}
    for v in spec.variables:
        if v.name == exposure:
            continue
        total = 0.0
        for p, c in zip(v.parents, v.coefficients):
            total += c * effect.get(p, 0.0)
        effect[v.name] = total
    return (t1 - t0) * effect[outcome]


def population_means(spec: ScmSpec) -> dict:
    """Expected value of every variable (no clamping)."""
    means = {}
    for v in spec.variables:
        means[v.name] = v.intercept + sum(
            c * means[p] for p, c in zip(v.parents, v.coefficients)
        )
    return means


# -- bundled building preset --------------------------------------------------


def _preset_text(filename: str) -> str:
    return resources.files("causal_audit").joinpath("presets", filename).read_text(
        encoding="utf-8"
    )


def building_preset():
    """The bundled building-energy example.

    Returns
    -------
    (ScmSpec, MixedGraph, CausalQuery)
        The synthetic structural model, its DAG annotated with exposure
        and outcome roles, and the causal query (exposures InsulationStandard
        and HeatingSystem, outcome EUIHeating, all other variables observed).
    """
    spec = scm_from_json_dict(json.loads(_preset_text("building_scm.json")))
    query = query_from_json_dict(json.loads(_preset_text("building_query.json")))
    roles = {name: "exposure" for name in query.exposures}
    roles[query.outcome] = "outcome"
    graph = scm_graph(spec).with_roles(roles)
    return spec, graph, query


def building_arms():
    """The bundled experiment arms for the building preset.

    Returns
    -------
    (arms, exposure, t0, t1)
        ``arms`` is a list of (name, feature tuple) pairs.
    """
    data = json.loads(_preset_text("building_arms.json"))
    arms = [(a["name"], tuple(a["features"])) for a in data["arms"]]
    return arms, data["exposure"], float(data["t0"]), float(data["t1"])
