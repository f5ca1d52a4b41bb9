"""Vector fields as derivations, families of fields, and the decomposition.

The horizontal and vertical parts of a field on V = M x N are computed as
compositions ``iota_family(project_to_family(v, factor))``; neither step
zeroes components directly. ``iota_family`` reads each coefficient off the
family's action on coordinate families, and ``project_to_family`` reads
each family coefficient off the field's action on pulled-back coordinate
functions.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .exprcore import (
    ZERO,
    Bindings,
    Const,
    Expr,
    ExprLike,
    NonFiniteError,
    Var,
    add,
    as_expr,
    compile_expr,
    differentiate,
    free_vars,
    mul,
    simplify,
    sub,
    substitute,
    to_text,
)
from .manifolds import (
    Carrier,
    FunctionFamily,
    Manifold,
    ProductManifold,
    SmoothFunction,
    pullback_projection,
)
from .randexpr import generate_functions

# Generated functions added to a factor's coordinate functions when no
# explicit test set is given to the membership predicates.
DEFAULT_GENERATED = 8


class FieldError(ValueError):
    pass


def _coefficients(carrier_name: str, coords: Sequence[str], components: Mapping[str, ExprLike]) -> tuple[Expr, ...]:
    missing = [c for c in coords if c not in components]
    extra = [c for c in components if c not in coords]
    if missing:
        raise FieldError(f"missing component {missing[0]!r} for {carrier_name}")
    if extra:
        raise FieldError(f"{extra[0]!r} is not a coordinate of {carrier_name}")
    return tuple(as_expr(components[c]) for c in coords)


def _check_vars(coeffs: Iterable[Expr], allowed: Sequence[str], where: str) -> None:
    for e in coeffs:
        stray = free_vars(e) - set(allowed)
        if stray:
            raise FieldError(f"coefficient {to_text(e)} uses {sorted(stray)}, not coordinates of {where}")


@dataclass(frozen=True)
class VectorField:
    """Sum of coefficient * d/d(coord), one coefficient per carrier coordinate."""

    carrier: Carrier
    coefficients: tuple[Expr, ...]

    def __post_init__(self):
        coeffs = tuple(as_expr(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) != self.carrier.dim:
            raise FieldError(f"{self.carrier.name} needs {self.carrier.dim} coefficients, got {len(coeffs)}")
        _check_vars(coeffs, self.carrier.coords, self.carrier.name)

    @classmethod
    def from_components(cls, carrier: Carrier, components: Mapping[str, ExprLike]) -> VectorField:
        return cls(carrier, _coefficients(carrier.name, carrier.coords, components))

    @classmethod
    def zero(cls, carrier: Carrier) -> VectorField:
        return cls(carrier, (ZERO,) * carrier.dim)

    @property
    def components(self) -> dict[str, Expr]:
        return dict(zip(self.carrier.coords, self.coefficients))

    def component(self, coord: str) -> Expr:
        return self.components[coord]

    def __add__(self, other: VectorField) -> VectorField:
        _same_carrier(self.carrier, other.carrier)
        return VectorField(self.carrier, tuple(add(a, b) for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: VectorField) -> VectorField:
        _same_carrier(self.carrier, other.carrier)
        return VectorField(self.carrier, tuple(sub(a, b) for a, b in zip(self.coefficients, other.coefficients)))

    def __call__(self, f: SmoothFunction) -> SmoothFunction:
        return apply_derivation(self, f)

    def __str__(self) -> str:
        terms = [f"{to_text(e)}*d/d{c}" for c, e in self.components.items()]
        return " + ".join(terms)


@dataclass(frozen=True)
class VectorFieldFamily:
    """A smooth family {w_n} of fields on ``active``, coefficients over all product coordinates."""

    product: ProductManifold
    active: Manifold
    coefficients: tuple[Expr, ...]

    def __post_init__(self):
        self.product.check_factor(self.active)
        coeffs = tuple(as_expr(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) != self.active.dim:
            raise FieldError(f"family on {self.active.name} needs {self.active.dim} coefficients")
        _check_vars(coeffs, self.product.coords, self.product.name)

    @classmethod
    def from_components(cls, product: ProductManifold, active: Manifold, components: Mapping[str, ExprLike]) -> VectorFieldFamily:
        return cls(product, active, _coefficients(active.name, active.coords, components))

    @classmethod
    def zero(cls, product: ProductManifold, active: Manifold) -> VectorFieldFamily:
        return cls(product, active, (ZERO,) * active.dim)

    @property
    def components(self) -> dict[str, Expr]:
        return dict(zip(self.active.coords, self.coefficients))

    def apply(self, fam: FunctionFamily) -> FunctionFamily:
        """Act as a derivation of C(M, N): {g_n} -> {w_n(g_n)}."""
        if fam.product != self.product or fam.active != self.active:
            raise FieldError("family of functions and family of fields disagree on product or active factor")
        body: Expr = ZERO
        for coord, coeff in zip(self.active.coords, self.coefficients):
            body = add(body, mul(coeff, differentiate(fam.body, coord)))
        return FunctionFamily(self.product, self.active, body)

    def at(self, point: Bindings) -> VectorField:
        """The member w_n, a field on the active factor, for numeric parameters n."""
        params = {c: Const(float(point[c])) for c in self.product.complement_coords(self.active)}
        return VectorField(self.active, tuple(simplify(substitute(e, params)) for e in self.coefficients))


@dataclass(frozen=True)
class OneForm:
    carrier: Carrier
    coefficients: tuple[Expr, ...]

    def __post_init__(self):
        coeffs = tuple(as_expr(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) != self.carrier.dim:
            raise FieldError(f"{self.carrier.name} needs {self.carrier.dim} coefficients, got {len(coeffs)}")
        _check_vars(coeffs, self.carrier.coords, self.carrier.name)

    @classmethod
    def from_components(cls, carrier: Carrier, components: Mapping[str, ExprLike]) -> OneForm:
        return cls(carrier, _coefficients(carrier.name, carrier.coords, components))

    @classmethod
    def coordinate(cls, carrier: Carrier, coord: str) -> OneForm:
        """The differential d(coord)."""
        if coord not in carrier.coords:
            raise FieldError(f"{coord!r} is not a coordinate of {carrier.name}")
        return cls(carrier, tuple(Const(1.0) if c == coord else ZERO for c in carrier.coords))

    @property
    def components(self) -> dict[str, Expr]:
        return dict(zip(self.carrier.coords, self.coefficients))


def _same_carrier(a: Carrier, b: Carrier) -> None:
    if a != b:
        raise FieldError(f"carrier mismatch: {a.name} vs {b.name}")


def _product_of(v: VectorField) -> ProductManifold:
    if not isinstance(v.carrier, ProductManifold):
        raise FieldError(f"field must live on a product, not {v.carrier.name}")
    return v.carrier


def _two_factor(v: VectorField) -> ProductManifold:
    V = _product_of(v)
    if len(V.factors) != 2:
        raise FieldError(f"expected a two-factor product, got {len(V.factors)} factors")
    return V


# ---------------------------------------------------------------------------
# Derivations


def apply_derivation(v: VectorField, f: SmoothFunction) -> SmoothFunction:
    _same_carrier(v.carrier, f.carrier)
    body: Expr = ZERO
    for coord, coeff in zip(v.carrier.coords, v.coefficients):
        body = add(body, mul(coeff, differentiate(f.body, coord)))
    return SmoothFunction(v.carrier, body)


def iota_family(w: VectorFieldFamily) -> VectorField:
    """Embed a family of fields on a factor as a field on the product.

    The coefficient along each product coordinate c is the family's action
    on the coordinate family {c}; complementary coordinates are parameters
    of the family, so their coefficients vanish.
    """
    V = w.product
    coeffs = tuple(w.apply(FunctionFamily(V, w.active, Var(c))).body for c in V.coords)
    return VectorField(V, coeffs)


def project_to_family(v: VectorField, active: Manifold) -> VectorFieldFamily:
    """w_n(g) = i_n^* v(pi^* g), read off on the active factor's coordinate functions."""
    V = _product_of(v)
    V.check_factor(active)
    coeffs = tuple(
        apply_derivation(v, pullback_projection(SmoothFunction(active, Var(c)), V)).body
        for c in active.coords
    )
    return VectorFieldFamily(V, active, coeffs)


def factor_projection(v: VectorField, factor: Manifold) -> VectorField:
    """iota o pi for ``factor``: the part of ``v`` tangent to that factor."""
    return iota_family(project_to_family(v, factor))


def horizontal_projection(v: VectorField) -> VectorField:
    V = _two_factor(v)
    return iota_family(project_to_family(v, V.factors[0]))


def vertical_projection(v: VectorField) -> VectorField:
    V = _two_factor(v)
    return iota_family(project_to_family(v, V.factors[1]))


def decompose(v: VectorField) -> tuple[VectorField, VectorField]:
    _two_factor(v)
    return horizontal_projection(v), vertical_projection(v)


def multi_decompose(v: VectorField) -> tuple[VectorField, VectorField, VectorField]:
    V = _product_of(v)
    if len(V.factors) != 3:
        raise FieldError(f"expected a three-factor product, got {len(V.factors)} factors")
    M, N, L = V.factors
    return (
        iota_family(project_to_family(v, M)),
        iota_family(project_to_family(v, N)),
        iota_family(project_to_family(v, L)),
    )


# ---------------------------------------------------------------------------
# Membership in X_F(V): fields annihilating every pullback from factor F


@dataclass(frozen=True)
class Witness:
    function: str
    point: dict[str, float]
    value: float

    def to_dict(self) -> dict:
        return {"function": self.function, "point": dict(self.point), "value": self.value}


@dataclass(frozen=True)
class Membership:
    holds: bool
    witness: Witness | None = None
    evaluations: int = 0

    def __bool__(self) -> bool:
        return self.holds


def _vanishes(fns: Iterable[tuple[str, Expr]], points: Sequence[Bindings], tol: float) -> Membership:
    count = 0
    for label, body in fns:
        run = compile_expr(body)
        for p in points:
            count += 1
            try:
                value = run(p)
            except NonFiniteError:
                value = math.nan
            if not abs(value) <= tol:
                return Membership(False, Witness(label, dict(p), value), count)
    return Membership(True, None, count)


def coordinate_functions(carrier: Carrier) -> list[SmoothFunction]:
    return [SmoothFunction(carrier, Var(c)) for c in carrier.coords]


def default_test_functions(factor: Manifold) -> list[SmoothFunction]:
    rng = random.Random(f"default/{factor.name}")
    return coordinate_functions(factor) + generate_functions(factor, DEFAULT_GENERATED, rng)


def annihilates(
    v: VectorField,
    factor: Manifold,
    points: Sequence[Bindings],
    tol: float = 1e-9,
    test_functions: Sequence[SmoothFunction] | None = None,
) -> Membership:
    """Whether v(pi_F^* g) = 0 at every point for every test function g on ``factor``.

    The test set defaults to the factor's coordinate functions plus a fixed
    batch of generated functions.
    """
    V = _product_of(v)
    V.check_factor(factor)
    tests = default_test_functions(factor) if test_functions is None else list(test_functions)
    return _vanishes(
        ((to_text(g.body), apply_derivation(v, pullback_projection(g, V)).body) for g in tests),
        points,
        tol,
    )


def is_horizontal(v, points, tol=1e-9, test_functions=None) -> Membership:
    """Membership in X_N(V): annihilates functions pulled back from the second factor."""
    V = _two_factor(v)
    return annihilates(v, V.factors[1], points, tol, test_functions)


def is_vertical(v, points, tol=1e-9, test_functions=None) -> Membership:
    """Membership in X_M(V): annihilates functions pulled back from the first factor."""
    V = _two_factor(v)
    return annihilates(v, V.factors[0], points, tol, test_functions)


# ---------------------------------------------------------------------------
# 1-forms


def pullback_oneform(omega: OneForm, V: ProductManifold) -> OneForm:
    if not isinstance(omega.carrier, Manifold) or omega.carrier not in V.factors:
        raise FieldError(f"{omega.carrier.name} is not a factor of {V}")
    comps = omega.components
    return OneForm(V, tuple(comps.get(c, ZERO) for c in V.coords))


def pair_oneform(alpha: OneForm, v: VectorField) -> SmoothFunction:
    _same_carrier(alpha.carrier, v.carrier)
    body: Expr = ZERO
    for a, b in zip(alpha.coefficients, v.coefficients):
        body = add(body, mul(a, b))
    return SmoothFunction(v.carrier, body)


def annihilated_by_forms(
    v: VectorField,
    factor: Manifold,
    points: Sequence[Bindings],
    tol: float = 1e-9,
    forms: Sequence[OneForm] | None = None,
) -> Membership:
    """Whether (pi_F^* eta)(v) = 0 for every test 1-form eta on ``factor``.

    The test set defaults to the coordinate differentials of the factor.
    """
    V = _product_of(v)
    V.check_factor(factor)
    tests = [OneForm.coordinate(factor, c) for c in factor.coords] if forms is None else list(forms)
    return _vanishes(
        ((_form_text(eta), pair_oneform(pullback_oneform(eta, V), v).body) for eta in tests),
        points,
        tol,
    )


def _form_text(eta: OneForm) -> str:
    return " + ".join(f"{to_text(e)}*d{c}" for c, e in eta.components.items())
