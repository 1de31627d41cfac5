import json
import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from causal_audit.adjustment import minimal_sufficient_sets
from causal_audit.errors import ScmFormat, UnknownVariable
from causal_audit.graph import descendants, is_acyclic
from causal_audit.scm import (
    ScmSpec,
    build_scm,
    building_arms,
    building_preset,
    load_scm,
    population_means,
    sample,
    sample_do,
    save_scm,
    scm_from_json_dict,
    scm_graph,
    scm_to_json_dict,
    true_ace,
)

XY = build_scm([("X", (), (), 0.0, 1.0), ("Y", ("X",), (2.0,), 0.0, 0.0)])

BUILDING_EDGES = [
    ("NumberOfFloors", "Area"),
    ("FloorHeight", "Area"),
    ("ConstructionArea", "Area"),
    ("Area", "Volume"),
    ("FloorHeight", "Volume"),
    ("NumberOfFloors", "Volume"),
    ("ConstructionArea", "InsulationStandard"),
    ("FloorHeight", "InsulationStandard"),
    ("Volume", "InsulationStandard"),
    ("InsulationStandard", "EUIHeating"),
    ("HeatingSystem", "EUIHeating"),
    ("ConstructionArea", "EUIHeating"),
    ("Volume", "EUIHeating"),
    ("Area", "EUIHeating"),
    ("HeatingSetpoint", "EUIHeating"),
    ("ACH", "EUIHeating"),
    ("PPA", "EUIHeating"),
    ("WWR_North", "EUIHeating"),
    ("WWR_East", "EUIHeating"),
    ("WWR_South", "EUIHeating"),
    ("WWR_West", "EUIHeating"),
    ("Orientation", "EUIHeating"),
]

TABLE2_FEATURES = [
    "ACH",
    "Area",
    "ConstructionArea",
    "FloorHeight",
    "HeatingSetpoint",
    "HeatingSystem",
    "InsulationStandard",
    "NumberOfFloors",
    "Orientation",
    "PPA",
    "Volume",
    "WWR_East",
    "WWR_North",
    "WWR_South",
    "WWR_West",
]


class TestBuildScm:
    def test_tuple_and_dataclass_inputs_agree(self):
        from causal_audit.scm import ScmVariable

        a = build_scm([("X", (), (), 1.0, 0.5)])
        b = build_scm([ScmVariable("X", (), (), 1.0, 0.5)])
        assert a == b

    def test_parent_must_be_declared_earlier(self):
        with pytest.raises(UnknownVariable):
            build_scm([("Y", ("X",), (1.0,), 0.0, 1.0), ("X", (), (), 0.0, 1.0)])

    def test_coefficient_arity(self):
        with pytest.raises(ScmFormat):
            build_scm([("X", (), (), 0.0, 1.0), ("Y", ("X",), (), 0.0, 1.0)])

    def test_negative_noise_rejected(self):
        with pytest.raises(ScmFormat):
            build_scm([("X", (), (), 0.0, -1.0)])

    def test_duplicate_name_rejected(self):
        with pytest.raises(ScmFormat):
            build_scm([("X", (), (), 0.0, 1.0), ("X", (), (), 0.0, 1.0)])

    def test_range_validation(self):
        with pytest.raises(UnknownVariable):
            build_scm([("X", (), (), 0.0, 1.0)], ranges={"Z": (0, 1)})
        with pytest.raises(ScmFormat):
            build_scm([("X", (), (), 0.0, 1.0)], ranges={"X": (1, 1)})

    def test_json_round_trip(self):
        spec = build_scm(
            [("X", (), (), 1.5, 1.0), ("Y", ("X",), (-2.0,), 0.0, 0.5)],
            ranges={"X": (-3, 3)},
        )
        doc = scm_to_json_dict(spec)
        assert doc["format_version"] == 1
        assert scm_from_json_dict(doc) == spec
        assert scm_from_json_dict(json.loads(json.dumps(doc))) == spec

    def test_unsupported_format_version(self):
        doc = scm_to_json_dict(XY)
        doc["format_version"] = 99
        with pytest.raises(ScmFormat):
            scm_from_json_dict(doc)

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "model.json"
        save_scm(XY, path)
        assert load_scm(path) == XY


class TestScmGraph:
    def test_single_variable(self):
        g = scm_graph(build_scm([("X", (), (), 0.0, 1.0)]))
        assert g.nodes == ("X",)
        assert g.edges == ()

    def test_two_parents(self):
        spec = build_scm(
            [
                ("T", (), (), 0.0, 1.0),
                ("C", (), (), 0.0, 1.0),
                ("Y", ("T", "C"), (1.0, 1.0), 0.0, 1.0),
            ]
        )
        g = scm_graph(spec)
        assert {(e.tail, e.head) for e in g.edges} == {("T", "Y"), ("C", "Y")}

    def test_building_structure_matches_transcription(self):
        spec, g, query = building_preset()
        assert is_acyclic(g)
        assert {(e.tail, e.head) for e in g.edges} == set(BUILDING_EDGES)
        assert len(g.edges) == 22
        assert sorted(g.nodes) == sorted(TABLE2_FEATURES + ["EUIHeating"])
        assert g.roles["InsulationStandard"] == "exposure"
        assert g.roles["HeatingSystem"] == "exposure"
        assert g.roles["EUIHeating"] == "outcome"

    def test_building_query(self):
        _, _, query = building_preset()
        assert query.exposures == {"HeatingSystem", "InsulationStandard"}
        assert query.outcome == "EUIHeating"
        assert query.effect_kind == "total"
        assert query.observed == set(TABLE2_FEATURES) - query.exposures

    def test_building_minimal_sets_include_paper_set(self):
        _, g, query = building_preset()
        found = [sorted(s.members) for s in minimal_sufficient_sets(g, query)]
        assert ["ConstructionArea", "FloorHeight", "Volume"] in found

    def test_building_coefficients_are_discovery_friendly(self):
        spec, _, _ = building_preset()
        for v in spec.variables:
            for c in v.coefficients:
                assert abs(c) >= 0.5


class TestSample:
    def test_noiseless_scm_is_deterministic(self):
        spec = build_scm([("X", (), (), 1.0, 0.0), ("Y", ("X",), (2.0,), 0.0, 0.0)])
        d = sample(spec, 4, seed=0)
        assert np.array_equal(d.column("X"), np.ones(4))
        assert np.array_equal(d.column("Y"), 2.0 * np.ones(4))

    def test_standard_normal_mean(self):
        spec = build_scm([("X", (), (), 0.0, 1.0)])
        d = sample(spec, 50000, seed=123)
        assert abs(float(d.column("X").mean())) < 0.02

    def test_building_dataset_shape(self):
        spec, _, _ = building_preset()
        d = sample(spec, 918, seed=42)
        assert d.n_rows == 918
        assert set(TABLE2_FEATURES) <= set(d.names)
        assert len(d.names) == 16

    def test_bit_identical_per_seed(self):
        spec, _, _ = building_preset()
        a = sample(spec, 200, seed=9)
        b = sample(spec, 200, seed=9)
        assert a.names == b.names
        assert np.array_equal(a.matrix(), b.matrix())
        c = sample(spec, 200, seed=10)
        assert not np.array_equal(a.matrix(), c.matrix())

    def test_clamp_respects_ranges(self):
        spec = build_scm([("X", (), (), 0.0, 5.0)], ranges={"X": (-1.0, 1.0)})
        clamped = sample(spec, 1000, seed=3, clamp=True)
        x = clamped.column("X")
        assert x.min() >= -1.0 and x.max() <= 1.0
        free = sample(spec, 1000, seed=3)
        assert free.column("X").max() > 1.0

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            sample(XY, 0, seed=0)


class TestSampleDo:
    def test_do_sets_constant_and_propagates(self):
        d = sample_do(XY, {"X": 5.0}, 2000, seed=1)
        assert np.array_equal(d.column("X"), np.full(2000, 5.0))
        assert abs(float(d.column("Y").mean()) - 10.0) < 1e-9

    def test_do_on_child_leaves_parent_alone(self):
        d = sample_do(XY, {"Y": 0.0}, 5000, seed=2)
        assert np.array_equal(d.column("Y"), np.zeros(5000))
        assert abs(float(d.column("X").mean())) < 0.05
        plain = sample(XY, 5000, seed=2)
        assert np.array_equal(d.column("X"), plain.column("X"))

    def test_building_intervention_difference_matches_analytic(self):
        spec, _, _ = building_preset()
        hi = sample_do(spec, {"InsulationStandard": 2.0}, 50000, seed=5)
        lo = sample_do(spec, {"InsulationStandard": 0.0}, 50000, seed=5)
        diff = float(hi.column("EUIHeating").mean() - lo.column("EUIHeating").mean())
        analytic = true_ace(spec, "InsulationStandard", 2.0, 0.0, "EUIHeating")
        assert abs(diff - analytic) < 0.05

    def test_non_descendants_keep_their_distribution(self):
        spec, g, _ = building_preset()
        iv = {"InsulationStandard": 2.0}
        plain = sample(spec, 50000, seed=11)
        done = sample_do(spec, iv, 50000, seed=11)
        affected = descendants(g, "InsulationStandard") | set(iv)
        for name in spec.names():
            stat = ks_2samp(plain.column(name), done.column(name)).statistic
            if name in affected:
                continue
            assert stat < 0.02
            assert np.array_equal(plain.column(name), done.column(name))

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariable):
            sample_do(XY, {"Z": 1.0}, 10, seed=0)


class TestTrueAce:
    def test_single_edge(self):
        spec = build_scm(
            [("T", (), (), 0.0, 1.0), ("Y", ("T",), (-1.0,), 0.0, 1.0)]
        )
        assert true_ace(spec, "T", 1.0, 0.0, "Y") == -1.0

    def test_path_sum_rule(self):
        spec = build_scm(
            [
                ("T", (), (), 0.0, 1.0),
                ("C", ("T",), (1.0,), 0.0, 1.0),
                ("Y", ("T", "C"), (-1.0, 2.0), 0.0, 1.0),
            ]
        )
        assert true_ace(spec, "T", 1.0, 0.0, "Y") == 1.0

    def test_scales_with_contrast(self):
        spec = build_scm(
            [("T", (), (), 0.0, 1.0), ("Y", ("T",), (0.5,), 0.0, 1.0)]
        )
        assert true_ace(spec, "T", 3.0, 1.0, "Y") == 1.0

    def test_no_path_gives_zero(self):
        spec = build_scm([("A", (), (), 0.0, 1.0), ("B", (), (), 0.0, 1.0)])
        assert true_ace(spec, "A", 1.0, 0.0, "B") == 0.0

    def test_preset_effect_with_monte_carlo_check(self):
        spec, _, _ = building_preset()
        ace = true_ace(spec, "InsulationStandard", 1.0, 0.0, "EUIHeating")
        assert ace == pytest.approx(-1.0)
        hi = sample_do(spec, {"InsulationStandard": 1.0}, 200000, seed=77)
        lo = sample_do(spec, {"InsulationStandard": 0.0}, 200000, seed=77)
        mc = float(hi.column("EUIHeating").mean() - lo.column("EUIHeating").mean())
        assert abs(ace - mc) < 0.02

    def test_validation(self):
        with pytest.raises(UnknownVariable):
            true_ace(XY, "Z", 1.0, 0.0, "Y")
        with pytest.raises(ValueError):
            true_ace(XY, "X", 1.0, 0.0, "X")

    def test_analytic_matches_monte_carlo_on_random_scms(self):
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            names = [f"V{i}" for i in range(5)]
            variables = []
            for i, name in enumerate(names):
                k = int(rng.integers(0, i + 1))
                parents = list(rng.choice(names[:i], size=k, replace=False)) if k else []
                coeffs = [float(rng.uniform(0.8, 1.5) * rng.choice([-1, 1])) for _ in parents]
                variables.append((name, parents, coeffs, float(rng.uniform(-1, 1)), 1.0))
            spec = build_scm(variables)
            analytic = true_ace(spec, "V0", 1.0, 0.0, "V4")
            n = 200000
            hi = sample_do(spec, {"V0": 1.0}, n, seed=seed)
            lo = sample_do(spec, {"V0": 0.0}, n, seed=seed)
            delta = hi.column("V4") - lo.column("V4")
            mc = float(delta.mean())
            se = float(delta.std(ddof=1)) / math.sqrt(n)
            assert abs(analytic - mc) < max(3.0 * se, 1e-9)


class TestPopulationMeans:
    def test_matches_matrix_inverse(self):
        spec, _, _ = building_preset()
        names = list(spec.names())
        idx = {n: i for i, n in enumerate(names)}
        b = np.zeros((len(names), len(names)))
        c = np.zeros(len(names))
        for v in spec.variables:
            c[idx[v.name]] = v.intercept
            for p, coeff in zip(v.parents, v.coefficients):
                b[idx[v.name], idx[p]] = coeff
        mu = np.linalg.solve(np.eye(len(names)) - b, c)
        means = population_means(spec)
        for name in names:
            assert abs(means[name] - mu[idx[name]]) < 1e-9

    def test_building_values(self):
        spec, _, _ = building_preset()
        means = population_means(spec)
        assert means["Area"] == pytest.approx(7.3)
        assert means["Volume"] == pytest.approx(13.94)
        assert means["InsulationStandard"] == pytest.approx(1.0)
        assert means["EUIHeating"] == pytest.approx(150.032)

    def test_agrees_with_large_sample(self):
        spec, _, _ = building_preset()
        d = sample(spec, 100000, seed=99)
        means = population_means(spec)
        for name in spec.names():
            assert abs(float(d.column(name).mean()) - means[name]) < 0.1


class TestBuildingArms:
    def test_shapes_and_contrast(self):
        arms, exposure, t0, t1 = building_arms()
        assert [name for name, _ in arms] == ["Scenario I", "Scenario II", "Validation"]
        assert exposure == "InsulationStandard"
        assert (t0, t1) == (0.0, 1.0)
        by_name = dict(arms)
        assert len(by_name["Scenario I"]) == 15
        assert "ConstructionArea" not in by_name["Scenario II"]
        assert set(by_name["Validation"]) == set(by_name["Scenario II"]) | {
            "ConstructionArea"
        }

    def test_features_exist_in_model(self):
        spec, _, _ = building_preset()
        arms, exposure, _, _ = building_arms()
        names = set(spec.names())
        assert exposure in names
        for _, features in arms:
            assert set(features) <= names
