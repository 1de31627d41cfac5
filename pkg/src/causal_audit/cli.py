"""Command-line front end.

Every subcommand prints exactly one canonical JSON payload on standard
output (shared with the HTTP service via :mod:`causal_audit.payloads`)
and keeps human-readable diagnostics on the error stream.  Exit codes:
0 success, 1 domain error (with a structured ``{error, detail}`` payload),
2 flag misuse.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import payloads
from .adjustment import (
    all_sufficient_sets,
    audit_feature_set,
    build_query,
    minimal_sufficient_sets,
    query_from_json_dict,
)
from .data import dataset_to_csv_text, load_csv, load_ordinal_sidecar, save_csv
from .discovery import GesConfig, ges
from .errors import CausalAuditError
from .estimator import arms_from_json_dict, fallout_experiment, render_fallout_table
from .graph import d_separated
from .io import canonical_json, load_graph, render_graph_text, save_graph
from .scm import _preset_text, building_preset, load_scm, sample, sample_do

DEFAULT_PORT = 8000


def _names(text: str) -> list:
    out = [part.strip() for part in text.split(",")]
    return [part for part in out if part]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _assignment(text: str) -> tuple:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected VAR=VALUE, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a numeric value: {value!r}")


def _cmd_graph_check(args):
    return payloads.check_payload(load_graph(args.graph_file))


def _cmd_graph_dsep(args):
    g = load_graph(args.graph_file)
    xs, ys, zs = _names(args.x), _names(args.y), _names(args.given)
    return payloads.dsep_payload(xs, ys, zs, d_separated(g, xs, ys, zs))


def _cmd_adjust_sets(args):
    g = load_graph(args.graph_file)
    q = build_query(g, _names(args.exposure), args.outcome)
    found = minimal_sufficient_sets(g, q) if args.minimal else all_sufficient_sets(g, q)
    return payloads.adjustment_sets_payload(
        q.exposures, q.outcome, args.minimal, [s.members for s in found]
    )


def _cmd_audit(args):
    g = load_graph(args.graph_file)
    q = build_query(g, _names(args.exposure), args.outcome, effect_kind=args.effect)
    report = audit_feature_set(g, q, _names(args.features))
    return payloads.audit_payload(report)


def _cmd_discover(args):
    ordinal = load_ordinal_sidecar(args.encoding) if args.encoding else None
    d = load_csv(args.data_csv, ordinal)
    cfg = GesConfig(penalty_multiplier=args.penalty, max_parents=args.max_parents)
    g = ges(d, cfg)
    save_graph(g, args.output)
    return payloads.graph_payload(g)


def _cmd_simulate(args):
    spec = load_scm(args.scm_file)
    interventions = dict(args.do or [])
    if interventions:
        d = sample_do(spec, interventions, args.n, args.seed)
    else:
        d = sample(spec, args.n, args.seed)
    if args.output:
        save_csv(d, args.output)
        return payloads.simulate_payload(d, str(args.output), interventions)
    payload = payloads.simulate_payload(d, None, interventions)
    payload["csv"] = dataset_to_csv_text(d)
    return payload


def _cmd_fallout(args):
    spec = load_scm(args.scm_file)
    q = query_from_json_dict(json.loads(Path(args.query).read_text(encoding="utf-8")))
    arms, exposure, t0, t1, base_row = arms_from_json_dict(
        json.loads(Path(args.arms).read_text(encoding="utf-8"))
    )
    report = fallout_experiment(
        spec, q, arms, args.n, args.seed, exposure=exposure, t0=t0, t1=t1, base_row=base_row
    )
    if args.table:
        print(render_fallout_table(report), file=sys.stderr)
    return payloads.fallout_payload(report)


def _cmd_preset(args):
    _, graph, _ = building_preset()
    target = Path(args.dir)
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for filename in ("building_scm.json", "building_query.json", "building_arms.json"):
        (target / filename).write_text(_preset_text(filename), encoding="utf-8")
        written.append(filename)
    (target / "building.graph").write_text(render_graph_text(graph), encoding="utf-8")
    written.append("building.graph")
    save_graph(graph, target / "building_graph.json")
    written.append("building_graph.json")
    return {"dir": str(target), "files": written, "format_version": 1}


def _serve_port(flag_port: int) -> int:
    return int(os.environ.get("CAUSAL_AUDIT_PORT", flag_port))


def _cmd_serve(args):
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(args.graph_dir), host=args.host, port=_serve_port(args.port))
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-audit",
        description="Causal graph queries, discovery, bias audits, and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="graph-file queries")
    graph_sub = graph.add_subparsers(dest="graph_command", required=True)

    check = graph_sub.add_parser("check", help="validate and summarize a graph file")
    check.add_argument("graph_file")
    check.set_defaults(handler=_cmd_graph_check)

    dsep = graph_sub.add_parser("dsep", help="d-separation query")
    dsep.add_argument("graph_file")
    dsep.add_argument("--x", required=True, help="comma-separated node names")
    dsep.add_argument("--y", required=True, help="comma-separated node names")
    dsep.add_argument("--given", default="", help="comma-separated conditioning set")
    dsep.set_defaults(handler=_cmd_graph_dsep)

    adjust = sub.add_parser("adjust", help="adjustment-set enumeration")
    adjust_sub = adjust.add_subparsers(dest="adjust_command", required=True)
    sets = adjust_sub.add_parser("sets", help="sufficient adjustment sets")
    sets.add_argument("graph_file")
    sets.add_argument("--exposure", required=True, help="comma-separated exposures")
    sets.add_argument("--outcome", required=True)
    sets.add_argument("--minimal", action="store_true", help="only inclusion-minimal sets")
    sets.set_defaults(handler=_cmd_adjust_sets)

    audit = sub.add_parser("audit", help="audit a regression feature set for bias")
    audit.add_argument("graph_file")
    audit.add_argument("--exposure", required=True, help="comma-separated exposures")
    audit.add_argument("--outcome", required=True)
    audit.add_argument("--features", required=True, help="comma-separated covariates")
    audit.add_argument("--effect", choices=("total", "direct"), default="total")
    audit.set_defaults(handler=_cmd_audit)

    discover = sub.add_parser("discover", help="learn a CPDAG from CSV data")
    discover.add_argument("data_csv")
    discover.add_argument("--penalty", type=_positive_float, default=1.0)
    discover.add_argument("--encoding", help="ordinal-encoding sidecar JSON")
    discover.add_argument("--max-parents", type=_positive_int, default=None)
    discover.add_argument("-o", "--output", required=True, help="output graph file")
    discover.set_defaults(handler=_cmd_discover)

    simulate = sub.add_parser("simulate", help="draw samples from a structural model")
    simulate.add_argument("scm_file")
    simulate.add_argument("--n", type=_positive_int, required=True)
    simulate.add_argument("--seed", type=int, required=True)
    simulate.add_argument("-o", "--output", help="CSV output path (default: embed in payload)")
    simulate.add_argument(
        "--do",
        type=_assignment,
        action="append",
        metavar="VAR=VALUE",
        help="intervention; repeatable",
    )
    simulate.set_defaults(handler=_cmd_simulate)

    fallout = sub.add_parser("fallout", help="run the multi-arm effect-estimation experiment")
    fallout.add_argument("scm_file")
    fallout.add_argument("--query", required=True, help="causal query JSON")
    fallout.add_argument("--arms", required=True, help="arms JSON")
    fallout.add_argument("--n", type=_positive_int, required=True)
    fallout.add_argument("--seed", type=int, required=True)
    fallout.add_argument("--table", action="store_true", help="print a table to stderr")
    fallout.set_defaults(handler=_cmd_fallout)

    preset = sub.add_parser("preset", help="export bundled example files")
    preset_sub = preset.add_subparsers(dest="preset_name", required=True)
    building = preset_sub.add_parser("building", help="the building-energy example")
    building.add_argument("--dir", required=True, help="output directory")
    building.set_defaults(handler=_cmd_preset)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=DEFAULT_PORT)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--graph-dir", help="directory of graph files to preload")
    serve.set_defaults(handler=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload = args.handler(args)
    except CausalAuditError as exc:
        print(canonical_json(payloads.error_payload(exc.code, exc.detail)))
        print(f"error: {exc.detail}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(canonical_json(payloads.error_payload("IOError", str(exc))))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if payload is not None:
        print(canonical_json(payload))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
