"""Regenerate the golden parity cases.

Writes the fixed inputs, runs every case through the CLI to freeze the
expected canonical JSON, and verifies the HTTP surface produces the same
bytes.  Run from the repository root:

    python3 tests/goldens/generate.py
"""

import io
import json
import sys
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from causal_audit.cli import main
from causal_audit.data import save_csv
from causal_audit.graph import build_graph
from causal_audit.io import save_graph
from causal_audit.scm import build_scm, sample

import parity

CASES = [
    {
        "name": "dsep-building-blocked",
        "cli": [
            "graph", "dsep", "{inputs}/building.graph",
            "--x", "HeatingSystem", "--y", "InsulationStandard",
        ],
        "http": {
            "method": "POST",
            "path": "/api/graphs/building/dsep",
            "json": {"x": ["HeatingSystem"], "y": ["InsulationStandard"]},
        },
    },
    {
        "name": "dsep-building-collider-opened",
        "cli": [
            "graph", "dsep", "{inputs}/building.graph",
            "--x", "HeatingSystem", "--y", "InsulationStandard",
            "--given", "EUIHeating",
        ],
        "http": {
            "method": "POST",
            "path": "/api/graphs/building/dsep",
            "json": {
                "x": ["HeatingSystem"],
                "y": ["InsulationStandard"],
                "given": ["EUIHeating"],
            },
        },
    },
    {
        "name": "dsep-confounder-set-valued",
        "cli": [
            "graph", "dsep", "{inputs}/confounder.graph",
            "--x", "T", "--y", "W,Z",
        ],
        "http": {
            "method": "POST",
            "path": "/api/graphs/confounder/dsep",
            "json": {"x": ["T"], "y": ["W", "Z"]},
        },
    },
    {
        "name": "adjust-confounder-all",
        "cli": [
            "adjust", "sets", "{inputs}/confounder.graph",
            "--exposure", "T", "--outcome", "Y",
        ],
        "http": {
            "method": "POST",
            "path": "/api/graphs/confounder/adjustment-sets",
            "json": {"exposures": ["T"], "outcome": "Y", "minimal": False},
        },
    },
    {
        "name": "adjust-building-minimal",
        "cli": [
            "adjust", "sets", "{inputs}/building.graph",
            "--exposure", "HeatingSystem,InsulationStandard",
            "--outcome", "EUIHeating",
            "--minimal",
        ],
        "http": {
            "method": "POST",
            "path": "/api/graphs/building/adjustment-sets",
            "json": {
                "exposures": ["HeatingSystem", "InsulationStandard"],
                "outcome": "EUIHeating",
                "minimal": True,
            },
        },
    },
    {
        "name": "audit-building-biased",
        "cli": [
            "audit", "{inputs}/building.graph",
            "--exposure", "HeatingSystem,InsulationStandard",
            "--outcome", "EUIHeating",
            "--features",
            "HeatingSetpoint,ACH,PPA,Volume,Area,WWR_North,WWR_East,WWR_South,WWR_West",
        ],
        "http": {
            "method": "POST",
            "path": "/api/graphs/building/audit",
            "json": {
                "exposures": ["HeatingSystem", "InsulationStandard"],
                "outcome": "EUIHeating",
                "features": [
                    "HeatingSetpoint", "ACH", "PPA", "Volume", "Area",
                    "WWR_North", "WWR_East", "WWR_South", "WWR_West",
                ],
            },
        },
    },
    {
        "name": "audit-building-fixed",
        "cli": [
            "audit", "{inputs}/building.graph",
            "--exposure", "HeatingSystem,InsulationStandard",
            "--outcome", "EUIHeating",
            "--features",
            "ConstructionArea,HeatingSetpoint,ACH,PPA,Volume,Area,WWR_North,WWR_East,WWR_South,WWR_West",
        ],
        "http": {
            "method": "POST",
            "path": "/api/graphs/building/audit",
            "json": {
                "exposures": ["HeatingSystem", "InsulationStandard"],
                "outcome": "EUIHeating",
                "features": [
                    "ConstructionArea", "HeatingSetpoint", "ACH", "PPA", "Volume",
                    "Area", "WWR_North", "WWR_East", "WWR_South", "WWR_West",
                ],
            },
        },
    },
    {
        "name": "audit-chain-mediator",
        "cli": [
            "audit", "{inputs}/chain.graph",
            "--exposure", "T", "--outcome", "Y", "--features", "M",
        ],
        "http": {
            "method": "POST",
            "path": "/api/graphs/chain/audit",
            "json": {"exposures": ["T"], "outcome": "Y", "features": ["M"]},
        },
    },
    {
        "name": "discover-collider",
        "cli": [
            "discover", "{inputs}/collider.csv",
            "--penalty", "1.0",
            "-o", "{tmp}/learned.graph",
        ],
        "http": {
            "method": "POST",
            "path": "/api/discover",
            "files": {"csv": "inputs/collider.csv"},
            "data": {"penalty": "1.0"},
        },
    },
    {
        "name": "fallout-building",
        "cli": [
            "fallout", "{inputs}/building_scm.json",
            "--query", "{inputs}/building_query.json",
            "--arms", "{inputs}/building_arms.json",
            "--n", "800", "--seed", "11",
        ],
        "http": {
            "method": "POST",
            "path": "/api/fallout",
            "json_files": {
                "scm": "inputs/building_scm.json",
                "query": "inputs/building_query.json",
                "arms": "inputs/building_arms.json",
            },
            "json_extra": {"n": 800, "seed": 11},
        },
    },
]

SERVER_GRAPHS = {
    "building": "inputs/building.graph",
    "confounder": "inputs/confounder.graph",
    "chain": "inputs/chain.graph",
}


def write_inputs(goldens: Path):
    inputs = goldens / "inputs"
    inputs.mkdir(parents=True, exist_ok=True)

    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = main(["preset", "building", "--dir", str(inputs)])
    if code != 0:
        raise SystemExit(f"preset export failed: {buffer.getvalue()}")
    (inputs / "building_graph.json").unlink()

    save_graph(
        build_graph(["T", "Y", "Z", "W"], [("Z", "T"), ("Z", "Y"), ("T", "Y")]),
        inputs / "confounder.graph",
    )
    save_graph(
        build_graph(["T", "M", "Y"], [("T", "M"), ("M", "Y")]),
        inputs / "chain.graph",
    )

    collider = build_scm(
        [
            ("X", (), (), 0.0, 1.0),
            ("Y", (), (), 0.0, 1.0),
            ("Z", ("X", "Y"), (1.2, 1.1), 0.0, 1.0),
        ]
    )
    save_csv(sample(collider, 4000, seed=3), inputs / "collider.csv")


def freeze_expected(goldens: Path):
    expected_dir = goldens / "expected"
    expected_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"server_graphs": SERVER_GRAPHS, "cases": []}
    with tempfile.TemporaryDirectory() as tmp:
        for case in CASES:
            case = dict(case)
            case["expected"] = f"expected/{case['name']}.json"
            payload = parity.run_cli_case(case, tmp)
            (goldens / case["expected"]).write_bytes(payload)
            manifest["cases"].append(case)
    (goldens / "cases.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return manifest


def verify_http(manifest):
    client = parity.make_client(manifest)
    for case in manifest["cases"]:
        body = parity.run_http_case(case, client)
        frozen = parity.golden_bytes(case)
        if body != frozen:
            raise SystemExit(f"case {case['name']}: HTTP bytes differ from the CLI golden")
        print(f"ok: {case['name']}")


if __name__ == "__main__":
    goldens = Path(__file__).resolve().parent
    write_inputs(goldens)
    manifest = freeze_expected(goldens)
    verify_http(manifest)
    print(f"froze {len(manifest['cases'])} cases")
