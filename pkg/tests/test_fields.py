import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodfields.exprcore import Const, Var, evaluate, parse_expr, to_text
from prodfields.fields import (
    FieldError,
    OneForm,
    VectorField,
    VectorFieldFamily,
    annihilated_by_forms,
    annihilates,
    apply_derivation,
    decompose,
    horizontal_projection,
    iota_family,
    is_horizontal,
    is_vertical,
    multi_decompose,
    pair_oneform,
    project_to_family,
    pullback_oneform,
    vertical_projection,
)
from prodfields.manifolds import ManifoldError, function, make_manifold, make_product, pullback_embedding
from prodfields.randexpr import random_expr

from strategies import close

M = make_manifold("M", ["x"])
N = make_manifold("N", ["y"])
L = make_manifold("L", ["z"])
V = make_product([M, N])
V3 = make_product([M, N, L])

rng = random.Random(3)
POINTS = [{"x": rng.uniform(-1, 1), "y": rng.uniform(-1, 1)} for _ in range(10)]


def field(carrier, **components):
    return VectorField.from_components(carrier, components)


def values(e, points=POINTS):
    return [evaluate(e, p) for p in points]


def assert_same(a, b, points=POINTS, tol=1e-12):
    for p in points:
        assert close(evaluate(a, p), evaluate(b, p), tol), (to_text(a), to_text(b), p)


def assert_same_field(a, b, points=POINTS):
    assert a.carrier == b.carrier
    for ea, eb in zip(a.coefficients, b.coefficients):
        assert_same(ea, eb, points)


def directional_fd(v, f, p, h=1e-6):
    """Derivative of f along v at p by central differences along the flow direction."""
    direction = {c: evaluate(e, p) for c, e in v.components.items()}
    up = {c: p[c] + h * direction[c] for c in p}
    down = {c: p[c] - h * direction[c] for c in p}
    return (evaluate(f.body, up) - evaluate(f.body, down)) / (2 * h)


class TestDerivation:
    def test_constant_coefficient(self):
        a = 1.7
        vf = apply_derivation(field(M, x=a), function(M, "x^2"))
        for xv in (-1.0, 0.5):
            assert evaluate(vf.body, {"x": xv}) == pytest.approx(2 * a * xv)

    def test_swap_field_on_product(self):
        v = field(V, x="y", y="x")
        f = function(V, "x*y")
        vf = apply_derivation(v, f)
        assert_same(vf.body, parse_expr("y^2 + x^2"))
        for p in POINTS:
            assert abs(evaluate(vf.body, p) - directional_fd(v, f, p)) <= 1e-6

    def test_kills_constants(self):
        v = field(V, x="exp(x)", y="sin(x*y)")
        assert apply_derivation(v, function(V, 3.5)).body == Const(0)

    def test_carrier_mismatch(self):
        with pytest.raises(FieldError):
            apply_derivation(field(M, x=1), function(V, "x"))

    def test_missing_component(self):
        with pytest.raises(FieldError, match="'y'"):
            VectorField.from_components(V, {"x": "1"})

    def test_foreign_coordinate_in_coefficient(self):
        with pytest.raises(FieldError):
            field(M, x="y")


class TestIota:
    def test_parameter_dependent_family(self):
        w = VectorFieldFamily.from_components(V, M, {"x": "y"})
        v = iota_family(w)
        assert v.components == {"x": Var("y"), "y": Const(0)}
        # i_n^* v(x) = n = w_n(x); i_n^* v(y) = 0 = w_n(n)
        for n in (-0.5, 2.0):
            assert evaluate(apply_derivation(v, function(V, "x")).body, {"x": 0.3, "y": n}) == n
            assert evaluate(apply_derivation(v, function(V, "y")).body, {"x": 0.3, "y": n}) == 0

    def test_zero_family(self):
        assert iota_family(VectorFieldFamily.zero(V, N)) == VectorField.zero(V)

    def test_constant_family(self):
        w = VectorFieldFamily.from_components(V, M, {"x": 1})
        assert iota_family(w) == field(V, x=1, y=0)

    def test_embedding_property(self):
        w = VectorFieldFamily.from_components(V, M, {"x": "y*cos(x)"})
        v = iota_family(w)
        f = function(V, "x^2*exp(y)")
        for n in (-0.7, 0.1):
            lhs = pullback_embedding(apply_derivation(v, f), M, {"y": n})
            rhs = apply_derivation(w.at({"y": n}), pullback_embedding(f, M, {"y": n}))
            assert_same(lhs.body, rhs.body, [{"x": t} for t in (-1.0, 0.2, 0.9)])


class TestProjectToFamily:
    def test_reads_active_components(self):
        fam = project_to_family(field(V, x="sin(y)", y="x"), M)
        assert fam.active == M
        assert fam.components == {"x": parse_expr("sin(y)")}

    def test_vertical_field_gives_zero_family(self):
        assert project_to_family(field(V, x=0, y="x"), M) == VectorFieldFamily.zero(V, M)

    def test_other_factor(self):
        fam = project_to_family(field(V, x=1, y=1), N)
        assert fam.active == N and fam.components == {"y": Const(1)}

    def test_active_must_be_factor(self):
        with pytest.raises(ManifoldError):
            project_to_family(field(V, x=1, y=1), L)


class TestDecomposition:
    v = field(V, x="y", y="x")

    def test_horizontal(self):
        assert horizontal_projection(self.v) == field(V, x="y", y=0)

    def test_vertical(self):
        assert vertical_projection(self.v) == field(V, x=0, y="x")

    def test_horizontal_fixed_point(self):
        h = field(V, x="x*y", y=0)
        assert horizontal_projection(h) == h
        assert vertical_projection(h) == VectorField.zero(V)

    def test_vertical_input(self):
        u = field(V, x=0, y="x")
        assert horizontal_projection(u) == VectorField.zero(V)
        assert vertical_projection(u) == u

    def test_decompose_pair(self):
        assert decompose(self.v) == (field(V, x="y", y=0), field(V, x=0, y="x"))

    def test_zero(self):
        zero = VectorField.zero(V)
        assert decompose(zero) == (zero, zero)

    def test_exp_cos_field(self):
        v = field(V, x="exp(x*y)", y="cos(x)")
        h, r = decompose(v)
        assert h == field(V, x="exp(x*y)", y=0)
        assert r == field(V, x=0, y="cos(x)")
        f = function(V, "sin(x)*y^3 + x")
        total = apply_derivation(h, f).body + apply_derivation(r, f).body
        for p in POINTS:
            assert close(evaluate(total, p), directional_fd(v, f, p), 1e-6)

    def test_needs_two_factors(self):
        with pytest.raises(FieldError):
            decompose(field(V3, x=1, y=1, z=1))
        with pytest.raises(FieldError):
            horizontal_projection(field(M, x=1))


class TestMembership:
    def test_horizontal_not_vertical(self):
        v = field(V, x="y", y=0)
        assert is_horizontal(v, POINTS)
        vert = is_vertical(v, POINTS)
        assert not vert
        assert vert.witness.function == "x"
        assert vert.witness.value == POINTS[0]["y"]

    def test_zero_both(self):
        zero = VectorField.zero(V)
        assert is_horizontal(zero, POINTS) and is_vertical(zero, POINTS)

    def test_diagonal_neither(self):
        v = field(V, x=1, y=1)
        h, r = is_horizontal(v, POINTS), is_vertical(v, POINTS)
        assert not h and not r
        assert h.witness.function == "y" and r.witness.function == "x"

    def test_extra_test_functions(self):
        v = field(V, x=0, y="x")
        tests = [function(N, "sin(y)"), function(N, "y^3 - y")]
        assert not annihilates(v, N, POINTS, test_functions=tests)
        assert annihilates(v, M, POINTS, test_functions=[function(M, "exp(x)")])


class TestOneForms:
    def test_coordinate_form(self):
        dx = pullback_oneform(OneForm.coordinate(M, "x"), V)
        assert dx.components == {"x": Const(1), "y": Const(0)}

    def test_inclusion(self):
        w = pullback_oneform(OneForm.from_components(M, {"x": "x"}), V)
        assert w.components == {"x": Var("x"), "y": Const(0)}
        eta = pullback_oneform(OneForm.from_components(N, {"y": "sin(y)"}), V)
        assert eta.components == {"x": Const(0), "y": parse_expr("sin(y)")}

    def test_requires_factor(self):
        with pytest.raises(FieldError):
            pullback_oneform(OneForm.coordinate(L, "z"), V)

    def test_dual_pairing(self):
        assert pair_oneform(OneForm.coordinate(M, "x"), field(M, x=1)).body == Const(1)

    def test_disjoint_support(self):
        dy = pullback_oneform(OneForm.coordinate(N, "y"), V)
        assert pair_oneform(dy, field(V, x="y", y=0)).body == Const(0)

    def test_pairing_sum(self):
        alpha = OneForm.from_components(V, {"x": "x", "y": 1})
        assert_same(pair_oneform(alpha, field(V, x="y", y="x")).body, parse_expr("x*y + x"))

    def test_carrier_mismatch(self):
        with pytest.raises(FieldError):
            pair_oneform(OneForm.coordinate(M, "x"), field(V, x=1, y=1))

    def test_form_predicate(self):
        assert annihilated_by_forms(field(V, x="y", y=0), N, POINTS)
        assert not annihilated_by_forms(field(V, x="y", y="x"), N, POINTS)


class TestThreeFactors:
    def test_cyclic_field(self):
        v = field(V3, x="z", y="x", z="y")
        assert multi_decompose(v) == (field(V3, x="z", y=0, z=0), field(V3, x=0, y="x", z=0), field(V3, x=0, y=0, z="y"))

    def test_zero(self):
        zero = VectorField.zero(V3)
        assert multi_decompose(zero) == (zero, zero, zero)

    def test_single_factor_support(self):
        v = field(V3, x=1, y=0, z=0)
        assert multi_decompose(v) == (v, VectorField.zero(V3), VectorField.zero(V3))

    def test_needs_three_factors(self):
        with pytest.raises(FieldError):
            multi_decompose(field(V, x=1, y=1))


# ---------------------------------------------------------------------------
# Properties over seeded random fields and functions


def random_field(seed, carrier=V):
    r = random.Random(seed)
    return VectorField(carrier, tuple(random_expr(r, carrier.coords) for _ in carrier.coords))


def random_function(seed, carrier=V):
    return function(carrier, random_expr(random.Random(seed), carrier.coords))


def random_family(seed, active):
    r = random.Random(seed)
    return VectorFieldFamily(V, active, tuple(random_expr(r, V.coords) for _ in active.coords))


seeds = st.integers(min_value=0, max_value=2**32)


@settings(max_examples=50, deadline=None)
@given(seeds, seeds, seeds, st.floats(-2, 2))
def test_derivation_laws(s1, s2, s3, a):
    v, f, g = random_field(s1), random_function(s2), random_function(s3)
    lin = apply_derivation(v, function(V, Const(a) * f.body + g.body)).body
    lin_expected = Const(a) * apply_derivation(v, f).body + apply_derivation(v, g).body
    assert_same(lin, lin_expected, tol=1e-9)
    leib = apply_derivation(v, function(V, f.body * g.body)).body
    leib_expected = apply_derivation(v, f).body * g.body + f.body * apply_derivation(v, g).body
    assert_same(leib, leib_expected, tol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seeds, st.sampled_from([M, N]))
def test_pi_after_iota_is_identity(seed, active):
    w = random_family(seed, active)
    back = project_to_family(iota_family(w), active)
    assert back.active == active
    for a, b in zip(back.coefficients, w.coefficients):
        assert_same(a, b, tol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_decomposition_properties(seed):
    v = random_field(seed)
    h, r = decompose(v)
    assert is_horizontal(h, POINTS) and is_vertical(r, POINTS)
    assert_same_field(horizontal_projection(h), h)
    assert_same_field(vertical_projection(r), r)
    f = random_function(seed + 1)
    assert_same(apply_derivation(h, f).body + apply_derivation(r, f).body, apply_derivation(v, f).body)
    # kernel of the projection onto families on M is exactly the vertical fields
    assert not is_vertical(v, POINTS)
    assert any(abs(x) > 1e-9 for e in project_to_family(v, M).coefficients for x in values(e))
    assert all(x == 0 for e in project_to_family(r, M).coefficients for x in values(e))
    # horizontal fields are in the image of iota
    assert_same_field(iota_family(project_to_family(h, M)), h)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_oneform_predicate_agrees(seed):
    v = random_field(seed)
    for candidate in (v, horizontal_projection(v), vertical_projection(v)):
        for F in (M, N):
            assert bool(annihilates(candidate, F, POINTS)) == bool(annihilated_by_forms(candidate, F, POINTS))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_three_factor_sum(seed):
    points = [{"x": p["x"], "y": p["y"], "z": p["x"] * p["y"]} for p in POINTS]
    v = random_field(seed, V3)
    parts = multi_decompose(v)
    f = random_function(seed + 1, V3)
    total = Const(0)
    for part in parts:
        total = total + apply_derivation(part, f).body
    assert_same(total, apply_derivation(v, f).body, points, tol=1e-9)
    for F, part in zip(V3.factors, parts):
        for G in V3.complement(F):
            assert annihilates(part, G, points)
