"""HTTP JSON service.

Thin adapters from request bodies to module operations.  Responses are
canonical JSON built by :mod:`causal_audit.payloads`, byte-identical to
the CLI's output for the same inputs.  State is a single in-memory
named-graph store with last-writer-wins semantics; everything else is
pure over immutable snapshots.
"""

import json
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import Response

from . import payloads
from .adjustment import (
    all_sufficient_sets,
    audit_feature_set,
    build_query,
    minimal_sufficient_sets,
    query_from_json_dict,
)
from .data import dataset_from_csv_text
from .discovery import GesConfig, ges
from .errors import CausalAuditError, MalformedBody, UnknownGraph
from .estimator import arms_from_json_dict, fallout_experiment
from .graph import d_separated
from .io import canonical_json, graph_from_json_dict, load_graph
from .scm import scm_from_json_dict

# Everything not listed is a domain violation.
_STATUS_BY_CODE = {"MalformedBody": 400, "UnknownGraph": 404}


class GraphStore:
    """Named graphs shared across requests; last writer wins."""

    def __init__(self):
        self._lock = threading.Lock()
        self._graphs = {}

    def put(self, name: str, graph):
        with self._lock:
            self._graphs[name] = graph

    def get(self, name: str):
        with self._lock:
            graph = self._graphs.get(name)
        if graph is None:
            raise UnknownGraph(f"no graph named {name!r}")
        return graph

    def names(self) -> list:
        with self._lock:
            return sorted(self._graphs)

    def preload(self, directory):
        """Load every parseable graph file in ``directory``, keyed by stem."""
        for path in sorted(Path(directory).iterdir()):
            if path.suffix not in (".graph", ".json") or not path.is_file():
                continue
            try:
                self.put(path.stem, load_graph(path))
            except CausalAuditError:
                continue


def _respond(payload, status_code: int = 200) -> Response:
    return Response(
        canonical_json(payload), status_code=status_code, media_type="application/json"
    )


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception as exc:
        raise MalformedBody(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise MalformedBody("request body must be a JSON object")
    return body


def _name_list(body: dict, key: str, required: bool = True) -> list:
    if key not in body:
        if required:
            raise MalformedBody(f"missing field {key!r}")
        return []
    value = body[key]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise MalformedBody(f"field {key!r} must be an array of strings")
    return value


def _string(body: dict, key: str, default=None) -> str:
    value = body.get(key, default)
    if not isinstance(value, str):
        raise MalformedBody(f"field {key!r} must be a string")
    return value


def _integer(body: dict, key: str, minimum: int) -> int:
    value = body.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise MalformedBody(f"field {key!r} must be an integer >= {minimum}")
    return value


def create_app(graph_dir=None) -> FastAPI:
    app = FastAPI(title="causal-audit", docs_url=None, redoc_url=None)
    store = GraphStore()
    if graph_dir is not None:
        store.preload(graph_dir)

    @app.exception_handler(CausalAuditError)
    async def _domain_error(request: Request, exc: CausalAuditError):
        return _respond(
            payloads.error_payload(exc.code, exc.detail),
            _STATUS_BY_CODE.get(exc.code, 422),
        )

    @app.exception_handler(RequestValidationError)
    async def _invalid_request(request: Request, exc: RequestValidationError):
        return _respond(payloads.error_payload("MalformedBody", str(exc)), 400)

    @app.get("/api/health")
    async def health():
        return _respond(payloads.health_payload())

    @app.get("/api/graphs")
    async def list_graphs():
        return _respond({"format_version": 1, "names": store.names()})

    @app.put("/api/graphs/{name}")
    async def put_graph(name: str, request: Request):
        graph = graph_from_json_dict(await _json_body(request))
        store.put(name, graph)
        return _respond(payloads.graph_payload(graph))

    @app.get("/api/graphs/{name}")
    async def get_graph(name: str):
        return _respond(payloads.graph_payload(store.get(name)))

    @app.post("/api/graphs/{name}/dsep")
    async def dsep(name: str, request: Request):
        body = await _json_body(request)
        graph = store.get(name)
        xs = _name_list(body, "x")
        ys = _name_list(body, "y")
        zs = _name_list(body, "given", required=False)
        return _respond(payloads.dsep_payload(xs, ys, zs, d_separated(graph, xs, ys, zs)))

    @app.post("/api/graphs/{name}/adjustment-sets")
    async def adjustment_sets(name: str, request: Request):
        body = await _json_body(request)
        graph = store.get(name)
        exposures = _name_list(body, "exposures")
        outcome = _string(body, "outcome")
        minimal = body.get("minimal", False)
        if not isinstance(minimal, bool):
            raise MalformedBody("field 'minimal' must be a boolean")
        q = build_query(graph, exposures, outcome)
        found = minimal_sufficient_sets(graph, q) if minimal else all_sufficient_sets(graph, q)
        return _respond(
            payloads.adjustment_sets_payload(
                q.exposures, q.outcome, minimal, [s.members for s in found]
            )
        )

    @app.post("/api/graphs/{name}/audit")
    async def audit(name: str, request: Request):
        body = await _json_body(request)
        graph = store.get(name)
        exposures = _name_list(body, "exposures")
        outcome = _string(body, "outcome")
        features = _name_list(body, "features")
        effect_kind = _string(body, "effect_kind", "total")
        if effect_kind not in ("total", "direct"):
            raise MalformedBody("field 'effect_kind' must be 'total' or 'direct'")
        q = build_query(graph, exposures, outcome, effect_kind=effect_kind)
        return _respond(payloads.audit_payload(audit_feature_set(graph, q, features)))

    @app.post("/api/discover")
    async def discover(
        csv: UploadFile = File(...),
        penalty: str = Form("1.0"),
        max_parents: Optional[str] = Form(None),
        encoding: Optional[str] = Form(None),
    ):
        try:
            text = (await csv.read()).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedBody(f"csv upload is not UTF-8: {exc}") from exc
        ordinal = None
        if encoding is not None:
            try:
                ordinal = json.loads(encoding)
            except json.JSONDecodeError as exc:
                raise MalformedBody(f"encoding field is not valid JSON: {exc}") from exc
            if not isinstance(ordinal, dict):
                raise MalformedBody("encoding field must be a JSON object")
        try:
            cfg = GesConfig(
                penalty_multiplier=float(penalty),
                max_parents=None if max_parents is None else int(max_parents),
            )
        except ValueError as exc:
            raise MalformedBody(f"bad discovery options: {exc}") from exc
        d = dataset_from_csv_text(text, ordinal)
        return _respond(payloads.graph_payload(ges(d, cfg)))

    @app.post("/api/fallout")
    async def fallout(request: Request):
        body = await _json_body(request)
        for key in ("scm", "query"):
            if not isinstance(body.get(key), dict):
                raise MalformedBody(f"field {key!r} must be a JSON object")
        arms_field = body.get("arms")
        if isinstance(arms_field, list):
            arms_field = {"arms": arms_field}
        if not isinstance(arms_field, dict):
            raise MalformedBody("field 'arms' must be an object or an array")
        spec = scm_from_json_dict(body["scm"])
        q = query_from_json_dict(body["query"])
        arms, exposure, t0, t1, base_row = arms_from_json_dict(arms_field)
        n = _integer(body, "n", 1)
        seed = _integer(body, "seed", -(2**63))
        try:
            report = fallout_experiment(
                spec, q, arms, n, seed, exposure=exposure, t0=t0, t1=t1, base_row=base_row
            )
        except ValueError as exc:
            raise MalformedBody(str(exc)) from exc
        return _respond(payloads.fallout_payload(report))

    return app
