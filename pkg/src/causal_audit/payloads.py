"""Response payload builders shared by the CLI and the HTTP API.

Both front ends must emit byte-identical canonical JSON for the same
request, so every payload dict is built here and serialized with
:func:`causal_audit.io.canonical_json` by the caller.
"""

from typing import Iterable, Sequence

from .adjustment import AuditReport
from .data import Dataset
from .estimator import FalloutReport
from .graph import MixedGraph, is_acyclic
from .io import FORMAT_VERSION, graph_to_json_dict


def health_payload() -> dict:
    return {"format_version": FORMAT_VERSION, "status": "ok"}


def error_payload(code: str, detail: str) -> dict:
    return {"detail": detail, "error": code, "format_version": FORMAT_VERSION}


def graph_payload(g: MixedGraph) -> dict:
    return graph_to_json_dict(g)


def check_payload(g: MixedGraph) -> dict:
    return {
        "acyclic": is_acyclic(g),
        "edge_count": len(g.edges),
        "format_version": FORMAT_VERSION,
        "fully_directed": g.is_fully_directed,
        "node_count": len(g.nodes),
    }


def dsep_payload(xs: Iterable, ys: Iterable, zs: Iterable, separated: bool) -> dict:
    return {
        "d_separated": separated,
        "format_version": FORMAT_VERSION,
        "given": sorted(zs),
        "x": sorted(xs),
        "y": sorted(ys),
    }


def adjustment_sets_payload(
    exposures: Iterable, outcome: str, minimal: bool, sets: Sequence
) -> dict:
    return {
        "exposures": sorted(exposures),
        "format_version": FORMAT_VERSION,
        "minimal": minimal,
        "outcome": outcome,
        "sets": [sorted(s) for s in sets],
    }


def audit_payload(report: AuditReport) -> dict:
    return report.to_dict()


def fallout_payload(report: FalloutReport) -> dict:
    return report.to_dict()


def simulate_payload(d: Dataset, path, interventions: dict) -> dict:
    return {
        "columns": list(d.names),
        "format_version": FORMAT_VERSION,
        "interventions": {k: interventions[k] for k in sorted(interventions)},
        "path": path,
        "rows": d.n_rows,
    }
