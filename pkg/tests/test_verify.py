import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from prodfields.exprcore import ZERO, parse_expr
from prodfields.fields import VectorField, VectorFieldFamily, iota_family, project_to_family
from prodfields.manifolds import function, make_manifold, make_product
from prodfields.mutations import CANONICAL, MUTATIONS, mutated
from prodfields.sampling import MAX_REJECTIONS, SampleConfig, SamplingError, sample_points
from prodfields.verify import (
    CHECKS,
    SUITES,
    SuiteError,
    check_functions_equal,
    component_split,
    run_suite,
    select_checks,
)

M = make_manifold("M", ["x"])
N = make_manifold("N", ["y"])
L = make_manifold("L", ["z"])
V = make_product([M, N])
V3 = make_product([M, N, L])
SMALL = SampleConfig(samples=20, generated_functions=3, generated_fields=5)


def swap_field():
    return VectorField.from_components(V, {"x": "y", "y": "x"})


class TestSampling:
    def test_deterministic(self):
        cfg = SampleConfig(seed=7, samples=3)
        pts = sample_points(V, cfg)
        assert len(pts) == 3 and pts == sample_points(V, cfg)

    def test_single_point(self):
        (p,) = sample_points(M, SampleConfig(samples=1))
        assert set(p) == {"x"} and -1.0 <= p["x"] <= 1.0

    def test_in_box(self):
        for p in sample_points(V, SampleConfig(samples=500)):
            assert set(p) == {"x", "y"}
            assert all(-1.0 <= x <= 1.0 for x in p.values())

    @given(st.integers(0, 2**32), st.integers(1, 30), st.integers(1, 30))
    def test_prefix_stable(self, seed, a, b):
        short = sample_points(V, SampleConfig(seed=seed, samples=min(a, b)))
        long = sample_points(V, SampleConfig(seed=seed, samples=max(a, b)))
        assert long[: len(short)] == short

    def test_seed_changes_points(self):
        assert sample_points(V, SampleConfig(seed=1)) != sample_points(V, SampleConfig(seed=2))

    def test_rejection_cap(self):
        with pytest.raises(SamplingError, match=str(MAX_REJECTIONS)):
            sample_points(V, SMALL, accept=lambda p: False)

    def test_rejection_skips_points(self):
        pts = sample_points(V, SMALL, accept=lambda p: p["x"] > 0)
        assert len(pts) == SMALL.samples and all(p["x"] > 0 for p in pts)

    @pytest.mark.parametrize(
        "kwargs", [{"samples": 0}, {"tolerance": 0.0}, {"generated_functions": -1}, {"generated_fields": 0}]
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            SampleConfig(**kwargs)


class TestFunctionsEqual:
    def test_identical(self):
        r = check_functions_equal(function(V, "x^2"), function(V, "x^2"))
        assert r.passed and r.max_abs_error == 0.0 and r.points_tested == 100

    def test_trig_identity(self):
        r = check_functions_equal(function(V, "sin(x)^2"), function(V, "1 - cos(x)^2"))
        assert r.passed and r.max_abs_error < 1e-12

    def test_small_offset_fails_with_witness(self):
        r = check_functions_equal(function(V, "x"), function(V, "x + 1e-3"))
        assert not r.passed
        assert 1e-3 / 1.001 <= r.max_abs_error <= 1e-3 * (1 + 1e-9)
        assert set(r.witness["point"]) == {"x", "y"}

    def test_carrier_mismatch(self):
        with pytest.raises(ValueError):
            check_functions_equal(function(M, "x"), function(V, "x"))


    def test_large_values_use_hybrid_units(self):
        # |1e6 - (1e6 + 1e-4)| = 1e-4 absolute, 1e-10 relative: passes at 1e-9
        r = check_functions_equal(function(V, "1e6 + x"), function(V, "1e6 + x + 1e-4"))
        assert r.passed and r.max_abs_error <= 1e-9

    @given(st.integers(0, 1000))
    def test_passing_error_within_tolerance(self, seed):
        cfg = SampleConfig(seed=seed, samples=10)
        r = check_functions_equal(function(V, "exp(3*x)*100"), function(V, "100*exp(x)^3"), cfg)
        assert r.passed and r.max_abs_error <= cfg.tolerance


class TestSuites:
    def test_theorem_on_swap_field(self):
        report = run_suite(V, [swap_field()], "theorem", SMALL)
        assert report.passed, [c.witness for c in report.failed()]
        assert [c.name for c in report.checks] == [c.name for c in CHECKS if c.suite == "theorem"]

    def test_composite_zero(self):
        # iota of a family on M, projected to a family on N, is the zero family
        w = VectorFieldFamily(V, M, (parse_expr("x*y"),))
        report = run_suite(V, [iota_family(w)], "exact-sequence", SMALL)
        c = report.check("exact_sequence.composite_zero")
        assert c.passed and c.points_tested > 0 and c.max_abs_error == 0.0
        assert project_to_family(iota_family(w), N).coefficients == (ZERO,)

    @pytest.mark.parametrize("suite", [s for s in SUITES if s not in ("three-factor", "all")])
    def test_two_factor_suites_pass(self, suite):
        report = run_suite(V, [swap_field()], suite, SMALL)
        assert report.passed and all(c.points_tested > 0 for c in report.checks)

    def test_three_factor_suite(self):
        v = VectorField.from_components(V3, {"x": "z", "y": "x", "z": "y"})
        assert run_suite(V3, [v], "three-factor", SMALL).passed

    @pytest.mark.parametrize("suite, product", [("three-factor", V), ("theorem", V3), ("exact-sequence", V3)])
    def test_factor_count_mismatch(self, suite, product):
        with pytest.raises(SuiteError):
            run_suite(product, [], suite, SMALL)

    def test_unknown_suite(self):
        with pytest.raises(SuiteError):
            select_checks("everything", 2)

    def test_all_selects_by_factor_count(self):
        two = {c.name for c in select_checks("all", 2)}
        three = {c.name for c in select_checks("all", 3)}
        assert "decomposition.oracle" in two and "decomposition.oracle" not in three
        assert "three_factor.kernel" in three and "three_factor.kernel" not in two

    def test_report_deterministic(self):
        a = run_suite(V, [swap_field()], "all", SMALL).to_dict()
        b = run_suite(V, [swap_field()], "all", SMALL).to_dict()
        assert json.dumps(a) == json.dumps(b)

    def test_report_shape(self):
        d = run_suite(V, [], "leibniz", SMALL).to_dict()
        assert set(d) == {"suite", "seed", "checks", "pass"}
        assert set(d["checks"][0]) == {"name", "points_tested", "max_abs_error", "pass"}

    def test_singular_user_field_points_avoided(self):
        v = VectorField.from_components(V, {"x": "1/x", "y": "log(y)"})
        report = run_suite(V, [v], "leibniz", SMALL)
        assert report.passed


class TestOracle:
    def test_component_split(self):
        v = swap_field()
        assert component_split(v, M).coefficients == (v.coefficients[0], ZERO)
        assert component_split(v, N).coefficients == (ZERO, v.coefficients[1])


class TestMutations:
    @pytest.mark.parametrize("name", sorted(MUTATIONS))
    def test_each_mutation_is_caught(self, name):
        with mutated(name):
            report = run_suite(V, [swap_field()], "all", SMALL)
        assert not report.passed

    def test_hor_identity_witness_on_vertical_field(self):
        v = VectorField.from_components(V, {"x": "0", "y": "x"})
        with mutated("hor-identity"):
            report = run_suite(V, [v], "theorem", SMALL)
        c = report.check("decomposition.oracle")
        assert not c.passed and "v0" in c.witness["function"]

    def test_patch_is_undone(self):
        with mutated(CANONICAL[0]):
            pass
        assert run_suite(V, [swap_field()], "canonical-iso", SMALL).passed

    def test_unknown_mutation(self):
        with pytest.raises(KeyError):
            with mutated("nope"):
                pass

    def test_failures_carry_witness(self):
        with mutated("oneform-drop-zeros"):
            c = run_suite(V, [], "one-forms", SMALL).check("one_forms.equivalence")
        assert not c.passed and c.witness is not None


class TestOnly:
    def test_runs_named_checks(self):
        report = run_suite(V, [], "theorem", SMALL, only=["decomposition.oracle"])
        assert [c.name for c in report.checks] == ["decomposition.oracle"]

    def test_rejects_unknown_name(self):
        with pytest.raises(SuiteError, match="derivation.leibniz"):
            run_suite(V, [], "theorem", SMALL, only=["derivation.leibniz"])
