"""Acceptance gate: one test per headline guarantee, at full scale.

Every test prints exactly one ``acceptance [...]: PASS/FAIL`` line (bypassing
pytest's capture so the line is visible live) and then asserts.  Oracles come
from tests/corpus.py and deliberately take different routes than the library
code under test: path enumeration instead of reachability, graph surgery
instead of the compiled backdoor index, equivalence-class enumeration instead
of Meek rules.
"""

import json
import shutil
import subprocess
import sys
import time
from contextlib import contextmanager
from itertools import combinations

import numpy as np

from causal_audit.adjustment import (
    all_sufficient_sets,
    build_query,
    minimal_sufficient_sets,
)
from causal_audit.data import Dataset
from causal_audit.discovery import bic_total, dag_to_cpdag, ges, shd, sufficient_stats
from causal_audit.estimator import fallout_experiment, metrics
from causal_audit.graph import d_separated, enumerate_paths, path_open
from causal_audit.scm import build_scm, building_arms, building_preset, sample, scm_graph, true_ace

import parity
from corpus import (
    CORPUS_SEEDS,
    all_subsets,
    corpus_graph,
    cut_outgoing,
    enumerate_all_dags,
    oracle_d_separated,
    reachable_from,
    v_structures,
)


@contextmanager
def _criterion(capsys, name):
    """Guarantee one printed pass/fail line per criterion, even on errors."""
    outcome = {"ok": False, "detail": ""}
    try:
        yield outcome
    finally:
        status = "PASS" if outcome["ok"] else "FAIL"
        detail = f" ({outcome['detail']})" if outcome["detail"] else ""
        with capsys.disabled():
            print(f"acceptance [{name}]: {status}{detail}", flush=True)
    assert outcome["ok"], f"{name}: {outcome['detail']}"


def test_d_separation_matches_path_enumeration_on_the_corpus(capsys):
    """Reachability agrees with brute-force path enumeration everywhere."""
    with _criterion(capsys, "d-separation oracle equivalence") as out:
        start = time.perf_counter()
        checked = mismatches = 0
        for seed in CORPUS_SEEDS:
            g = corpus_graph(seed)
            nodes = sorted(g.nodes)
            limit = max(1, len(nodes) - 1)
            for x, y in combinations(nodes, 2):
                paths = list(enumerate_paths(g, x, y, limit))
                rest = [n for n in nodes if n not in (x, y)]
                for z in all_subsets(rest):
                    expected = not any(path_open(g, p, z) for p in paths)
                    checked += 1
                    if bool(d_separated(g, [x], [y], z)) != expected:
                        mismatches += 1
        elapsed = time.perf_counter() - start
        out["detail"] = f"{checked} queries, {mismatches} mismatches, {elapsed:.1f}s"
        out["ok"] = mismatches == 0 and elapsed < 60.0


def test_sufficient_sets_match_the_powerset_oracle_on_the_corpus(capsys):
    """Enumeration equals the powerset-filtered surgery oracle, flags included."""
    with _criterion(capsys, "adjustment-set correctness") as out:
        start = time.perf_counter()
        pairs = set_mismatches = flag_mismatches = 0
        for seed in CORPUS_SEEDS:
            g = corpus_graph(seed)
            nodes = sorted(g.nodes)
            limit = max(1, len(nodes) - 1)
            for x in nodes:
                descendants = reachable_from(g, x)
                cut = cut_outgoing(g, x)
                for y in nodes:
                    if y == x:
                        continue
                    rest = [n for n in nodes if n not in (x, y)]
                    cut_paths = list(enumerate_paths(cut, x, y, limit))
                    expected = []
                    for z in all_subsets(rest):
                        if z & descendants:
                            continue
                        if not any(path_open(cut, p, z) for p in cut_paths):
                            expected.append(z)
                    q = build_query(g, [x], y, observed=rest)
                    got = all_sufficient_sets(g, q)
                    if [s.members for s in got] != expected:
                        set_mismatches += 1
                    for s in got:
                        oracle_minimal = not any(e < s.members for e in expected)
                        if s.minimal != oracle_minimal:
                            flag_mismatches += 1
                    mins = minimal_sufficient_sets(g, q)
                    if [m.members for m in mins] != [s.members for s in got if s.minimal]:
                        set_mismatches += 1
                    pairs += 1
        elapsed = time.perf_counter() - start
        out["detail"] = (
            f"{pairs} exposure-outcome pairs, {set_mismatches} set mismatches, "
            f"{flag_mismatches} minimality mismatches, {elapsed:.1f}s"
        )
        out["ok"] = set_mismatches == 0 and flag_mismatches == 0


def _signed_coeff(rng):
    return float(rng.choice((-1.0, 1.0)) * rng.uniform(0.8, 1.5))


def _chain_scm(seed):
    rng = np.random.default_rng(3_000 + seed)
    return build_scm(
        [
            ("X", (), (), 0.0, 1.0),
            ("Y", ("X",), (_signed_coeff(rng),), 0.0, 1.0),
            ("Z", ("Y",), (_signed_coeff(rng),), 0.0, 1.0),
        ]
    )


def _collider_scm(seed):
    rng = np.random.default_rng(4_000 + seed)
    return build_scm(
        [
            ("X", (), (), 0.0, 1.0),
            ("Y", (), (), 0.0, 1.0),
            ("Z", ("X", "Y"), (_signed_coeff(rng), _signed_coeff(rng)), 0.0, 1.0),
        ]
    )


def _faithfulness_margin(spec):
    """Smallest |partial correlation| over analytically d-connected triples.

    Computed from the population covariance implied by the coefficients,
    never from data or from search output.  Near-zero values mean paths
    cancel, and no sample size makes such structures recoverable.
    """
    names = [v.name for v in spec.variables]
    k = len(names)
    m = np.zeros((k, k))
    for j, v in enumerate(spec.variables):
        for p, c in zip(v.parents, v.coefficients):
            m[names.index(p), j] = c
    a = np.linalg.inv(np.eye(k) - m.T)
    sigma = a @ a.T
    g = scm_graph(spec)
    worst = np.inf
    for i, j in combinations(range(k), 2):
        others = [n for n in range(k) if n not in (i, j)]
        for cond in all_subsets(others):
            cond = sorted(cond)
            if oracle_d_separated(g, {names[i]}, {names[j]}, {names[q] for q in cond}):
                continue
            prec = np.linalg.inv(sigma[np.ix_([i, j] + cond, [i, j] + cond)])
            rho = -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])
            worst = min(worst, abs(rho))
    return worst


def _random_scm(seed):
    # Rejection-sample until every d-connected triple keeps a population
    # partial correlation of at least 0.1: BIC detects edges near
    # sqrt(ln n / n) ~ 0.03 at this sample size, so near-canceling paths
    # below that are unrecoverable by any method and say nothing about
    # search quality.  Edge probability matches the corpus convention.
    for attempt in range(100):
        rng = np.random.default_rng((5_000 + seed) * 101 + attempt)
        k = 5 + seed % 2
        names = [chr(ord("A") + i) for i in range(k)]
        order = [names[i] for i in rng.permutation(k)]
        variables = []
        for j, name in enumerate(order):
            parents = tuple(p for p in order[:j] if rng.random() < 0.35)
            coefficients = tuple(_signed_coeff(rng) for _ in parents)
            variables.append((name, parents, coefficients, 0.0, 1.0))
        spec = build_scm(variables)
        if _faithfulness_margin(spec) >= 0.1:
            return spec
    raise AssertionError(f"no faithful draw for seed {seed}")


def test_ges_recovers_known_structures(capsys):
    """SHD 0 against the true CPDAG in at least 9/10 seeds per structure."""
    with _criterion(capsys, "GES structure recovery") as out:
        details = []
        tallies = {}
        slow_runs = 0
        for label, make in (
            ("chain", _chain_scm),
            ("collider", _collider_scm),
            ("random", _random_scm),
        ):
            hits = 0
            for seed in range(10):
                spec = make(seed)
                data = sample(spec, n=10000, seed=20_000 + seed)
                start = time.perf_counter()
                learned = ges(data)
                elapsed = time.perf_counter() - start
                if elapsed >= 5.0:
                    slow_runs += 1
                if shd(learned, dag_to_cpdag(scm_graph(spec))) == 0:
                    hits += 1
            tallies[label] = hits
            details.append(f"{label} {hits}/10")
        out["detail"] = ", ".join(details) + (
            f", {slow_runs} runs over 5s" if slow_runs else ""
        )
        out["ok"] = slow_runs == 0 and all(h >= 9 for h in tallies.values())


def _correlated_dataset(names, seed):
    rng = np.random.default_rng(6_000 + seed)
    k = len(names)
    mix = rng.normal(size=(k, k)) * 0.6 + np.eye(k)
    raw = rng.normal(size=(120, k)) @ mix.T
    return Dataset([(name, raw[:, i]) for i, name in enumerate(names)])


def test_markov_equivalent_dags_share_bic(capsys):
    """Exhaustive 3- and 4-node DAGs: equal BIC within each equivalence class."""
    with _criterion(capsys, "score equivalence within Markov classes") as out:
        worst = 0.0
        dag_count = 0
        for names in (["A", "B", "C"], ["A", "B", "C", "D"]):
            dags = enumerate_all_dags(names)
            dag_count += len(dags)
            for ds_seed in range(5):
                s = sufficient_stats(_correlated_dataset(names, ds_seed))
                classes = {}
                for g in dags:
                    key = (
                        frozenset(tuple(sorted((e.tail, e.head))) for e in g.edges),
                        v_structures(g),
                    )
                    classes.setdefault(key, []).append(bic_total(s, g))
                for scores in classes.values():
                    worst = max(worst, max(scores) - min(scores))
        out["detail"] = f"{dag_count} DAGs, 5 datasets each size, max in-class spread {worst:.2e}"
        out["ok"] = worst <= 1e-9


def test_fallout_preset_reproduces_the_sign_flip(capsys):
    """Omitting the confounder flips the estimated sign without hurting fit much."""
    with _criterion(capsys, "confounded-arm sign flip") as out:
        start = time.perf_counter()
        spec, _, query = building_preset()
        arms, exposure, t0, t1 = building_arms()
        report = fallout_experiment(
            spec, query, arms, n=50000, seed=7, exposure=exposure, t0=t0, t1=t1
        )
        elapsed = time.perf_counter() - start
        by_name = {arm.name: arm for arm in report.arms}
        scen1 = by_name["Scenario I"]
        scen2 = by_name["Scenario II"]
        valid = by_name["Validation"]
        ace = true_ace(spec, exposure, t1, t0, query.outcome)
        checks = {
            "true ace is -1": abs(report.true_ace + 1.0) <= 1e-9 and report.true_ace == ace,
            "scenario II estimates +1": abs(scen2.estimated_effect - 1.0) <= 0.05,
            "scenario I matches ace": abs(scen1.estimated_effect - ace) <= 0.05,
            "validation matches ace": abs(valid.estimated_effect - ace) <= 0.05,
            "cv gap within 0.15": abs(scen1.cv_r2 - scen2.cv_r2) <= 0.15,
            "verdicts": (
                scen1.audit_verdict,
                scen2.audit_verdict,
                valid.audit_verdict,
            )
            == ("unbiased", "biased", "unbiased"),
            "under 30s": elapsed < 30.0,
        }
        failed = sorted(name for name, ok in checks.items() if not ok)
        out["detail"] = (
            f"I {scen1.estimated_effect:+.3f}, II {scen2.estimated_effect:+.3f}, "
            f"validation {valid.estimated_effect:+.3f}, ace {report.true_ace:+.3f}, "
            f"cvR2 {scen1.cv_r2:.3f}/{scen2.cv_r2:.3f}, {elapsed:.1f}s"
            + (f"; failed: {failed}" if failed else "")
        )
        out["ok"] = not failed


def test_cli_reports_the_building_minimal_set(capsys, tmp_path):
    """The bundled graph yields the documented three-variable minimal set."""
    with _criterion(capsys, "building minimal adjustment set via CLI") as out:
        exe = shutil.which("causal-audit")
        base = [exe] if exe else [sys.executable, "-m", "causal_audit.cli"]
        subprocess.run(
            base + ["preset", "building", "--dir", str(tmp_path)],
            check=True,
            capture_output=True,
        )
        proc = subprocess.run(
            base
            + [
                "adjust",
                "sets",
                str(tmp_path / "building.graph"),
                "--exposure",
                "HeatingSystem,InsulationStandard",
                "--outcome",
                "EUIHeating",
                "--minimal",
            ],
            check=True,
            capture_output=True,
            text=True,
        )
        payload = json.loads(proc.stdout)
        target = ["ConstructionArea", "FloorHeight", "Volume"]
        out["detail"] = f"sets={payload['sets']}"
        out["ok"] = target in payload["sets"]


def test_metric_definitions_and_identities(capsys):
    """Hand-computed vectors within 1e-9 plus seeded identity sweeps."""
    with _criterion(capsys, "metric hand values and identities") as out:
        failures = []
        m = metrics([100.0, 200.0], [110.0, 190.0])
        for label, got, want in (
            ("smape", m.smape, 20.0 / 273.0),
            ("nrmse", m.nrmse, 10.0 / 150.0),
            ("r2", m.r2, 0.96),
        ):
            if abs(got - want) > 1e-9:
                failures.append(label)
        perfect = metrics([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        if (
            abs(perfect.r2 - 1.0) > 1e-9
            or abs(perfect.nrmse) > 1e-9
            or abs(perfect.smape) > 1e-9
        ):
            failures.append("perfect prediction")
        rng = np.random.default_rng(7_000)
        for trial in range(200):
            size = int(rng.integers(2, 21))
            y = rng.uniform(0.1, 10.0, size=size)
            yhat = rng.uniform(0.1, 10.0, size=size)
            if metrics(y, y).r2 != 1.0:
                failures.append(f"r2 identity, trial {trial}")
            if abs(metrics(y, yhat).smape - metrics(yhat, y).smape) > 1e-12:
                failures.append(f"smape symmetry, trial {trial}")
            alpha = float(rng.uniform(1e-3, 1e3))
            base = metrics(y, yhat).nrmse
            scaled = metrics(alpha * y, alpha * yhat).nrmse
            if abs(scaled - base) > 1e-9 * max(base, 1.0):
                failures.append(f"nrmse scale invariance, trial {trial}")
        out["detail"] = "hand vectors + 200 seeded trials" + (
            f"; failed: {failures[:4]}" if failures else ""
        )
        out["ok"] = not failures


def test_cli_and_http_agree_on_golden_inputs(capsys, tmp_path):
    """Both surfaces reproduce the frozen canonical bytes for 10 fixed inputs."""
    with _criterion(capsys, "CLI/HTTP canonical-output parity") as out:
        manifest = parity.load_manifest()
        client = parity.make_client(manifest)
        cases = manifest["cases"]
        mismatches = []
        for case in cases:
            frozen = parity.golden_bytes(case)
            case_dir = tmp_path / case["name"]
            case_dir.mkdir()
            if parity.run_cli_case(case, case_dir) != frozen:
                mismatches.append(case["name"] + ":cli")
            if parity.run_http_case(case, client) != frozen:
                mismatches.append(case["name"] + ":http")
        out["detail"] = f"{len(cases)} golden cases" + (
            f"; mismatches {mismatches}" if mismatches else ""
        )
        out["ok"] = not mismatches
