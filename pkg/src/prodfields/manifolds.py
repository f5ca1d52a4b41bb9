"""Coordinate charts, product manifolds, projections and embeddings.

Each manifold is a single global chart. Pullback along a projection is
variable inclusion; pullback along an embedding substitutes the fixed
point of the complementary factor(s).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping, Sequence, Union

from .exprcore import (
    Bindings,
    Const,
    Expr,
    ExprLike,
    as_expr,
    compile_expr,
    free_vars,
    is_identifier,
    simplify,
    substitute,
    to_text,
)

PRODUCT_NAME = "V"


class ManifoldError(ValueError):
    pass


@dataclass(frozen=True)
class Manifold:
    name: str
    coords: tuple[str, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if not coords:
            raise ManifoldError(f"manifold {self.name!r} needs at least one coordinate")
        for c in coords:
            if not is_identifier(c):
                raise ManifoldError(f"invalid coordinate name {c!r} on {self.name!r}")
        dup = sorted({c for c in coords if coords.count(c) > 1})
        if dup:
            raise ManifoldError(f"duplicate coordinate {dup[0]!r} on {self.name!r}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __str__(self) -> str:
        return f"{self.name}[{', '.join(self.coords)}]"


@dataclass(frozen=True)
class ProductManifold:
    factors: tuple[Manifold, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        object.__setattr__(self, "factors", factors)
        if len(factors) not in (2, 3):
            raise ManifoldError(f"a product needs 2 or 3 factors, got {len(factors)}")
        names = [f.name for f in factors]
        if len(set(names)) != len(names):
            raise ManifoldError(f"factor names must be distinct: {names}")
        seen: dict[str, str] = {}
        for f in factors:
            for c in f.coords:
                if c in seen:
                    raise ManifoldError(
                        f"coordinate {c!r} appears in both {seen[c]!r} and {f.name!r}"
                    )
                seen[c] = f.name

    name = PRODUCT_NAME

    @property
    def coords(self) -> tuple[str, ...]:
        return tuple(c for f in self.factors for c in f.coords)

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def factor(self, name: str) -> Manifold:
        for f in self.factors:
            if f.name == name:
                return f
        raise ManifoldError(f"{name!r} is not a factor of {self}")

    def check_factor(self, factor: Manifold) -> Manifold:
        if factor not in self.factors:
            raise ManifoldError(f"{factor} is not a factor of {self}")
        return factor

    def complement(self, factor: Manifold) -> tuple[Manifold, ...]:
        self.check_factor(factor)
        return tuple(f for f in self.factors if f != factor)

    def complement_coords(self, factor: Manifold) -> tuple[str, ...]:
        return tuple(c for f in self.complement(factor) for c in f.coords)

    def projection(self, factor: Manifold) -> Projection:
        return Projection(self, self.check_factor(factor))

    def embedding(self, factor: Manifold, point: Bindings) -> Embedding:
        return Embedding(self, self.check_factor(factor), _point_for(self, factor, point))

    def __str__(self) -> str:
        return f"{self.name} = {' x '.join(f.name for f in self.factors)}"


Carrier = Union[Manifold, ProductManifold]


def make_manifold(name: str, coords: Sequence[str]) -> Manifold:
    if name == PRODUCT_NAME:
        raise ManifoldError(f"the name {PRODUCT_NAME!r} is reserved for the product")
    return Manifold(name, tuple(coords))


def make_product(factors: Sequence[Manifold]) -> ProductManifold:
    return ProductManifold(tuple(factors))


def _point_for(V: ProductManifold, factor: Manifold, point: Bindings) -> dict[str, float]:
    expected = set(V.complement_coords(factor))
    missing = sorted(expected - set(point))
    extra = sorted(set(point) - expected)
    if missing:
        raise ManifoldError(f"embedding point is missing coordinate(s) {missing}")
    if extra:
        raise ManifoldError(f"embedding point has unexpected coordinate(s) {extra}")
    return {c: float(point[c]) for c in V.complement_coords(factor)}


@dataclass(frozen=True)
class SmoothFunction:
    carrier: Carrier
    body: Expr

    def __post_init__(self):
        object.__setattr__(self, "body", as_expr(self.body))
        stray = free_vars(self.body) - set(self.carrier.coords)
        if stray:
            raise ManifoldError(
                f"{to_text(self.body)} uses {sorted(stray)} which are not coordinates of {self.carrier.name}"
            )

    @cached_property
    def _evaluator(self) -> Callable[[Bindings], float]:
        return compile_expr(self.body)

    def __call__(self, point: Bindings) -> float:
        return self._evaluator(point)

    def __str__(self) -> str:
        return f"{to_text(self.body)} on {self.carrier.name}"


@dataclass(frozen=True)
class FunctionFamily:
    """A smooth family {g_n} of functions on ``active`` indexed by the other factor(s).

    Stored as one expression on the product; the parameter coordinates are
    the complementary ones.
    """

    product: ProductManifold
    active: Manifold
    body: Expr

    def __post_init__(self):
        self.product.check_factor(self.active)
        object.__setattr__(self, "body", as_expr(self.body))
        stray = free_vars(self.body) - set(self.product.coords)
        if stray:
            raise ManifoldError(f"family body uses unknown coordinates {sorted(stray)}")

    def member(self, point: Bindings) -> SmoothFunction:
        """The function g_n on the active factor for a numeric parameter point n."""
        return pullback_embedding(family_to_function(self), self.active, point)


@dataclass(frozen=True)
class Projection:
    product: ProductManifold
    factor: Manifold

    def __call__(self, point: Bindings) -> dict[str, float]:
        return {c: point[c] for c in self.factor.coords}

    def pullback(self, g: SmoothFunction) -> SmoothFunction:
        return pullback_projection(g, self.product)


@dataclass(frozen=True)
class Embedding:
    """i_{n0} (or j_{m0}): the factor inserted into the product at a fixed point."""

    product: ProductManifold
    factor: Manifold
    point: Mapping[str, float]

    def __call__(self, point: Bindings) -> dict[str, float]:
        merged = {c: point[c] for c in self.factor.coords} | dict(self.point)
        return {c: merged[c] for c in self.product.coords}

    def pullback(self, f: SmoothFunction) -> SmoothFunction:
        return pullback_embedding(f, self.factor, self.point)


def function(carrier: Carrier, body: ExprLike) -> SmoothFunction:
    return SmoothFunction(carrier, as_expr(body))


def pullback_projection(g: SmoothFunction, V: ProductManifold) -> SmoothFunction:
    if not isinstance(g.carrier, Manifold) or g.carrier not in V.factors:
        raise ManifoldError(f"{g.carrier.name} is not a factor of {V}")
    return SmoothFunction(V, g.body)


def pullback_embedding(f: SmoothFunction, factor: Manifold, point: Bindings) -> SmoothFunction:
    V = f.carrier
    if not isinstance(V, ProductManifold):
        raise ManifoldError("embedding pullbacks need a function on a product")
    V.check_factor(factor)
    fixed = _point_for(V, factor, point)
    body = simplify(substitute(f.body, {c: Const(v) for c, v in fixed.items()}))
    return SmoothFunction(factor, body)


def family_to_function(fam: FunctionFamily) -> SmoothFunction:
    return SmoothFunction(fam.product, fam.body)


def function_to_family(f: SmoothFunction, active: Manifold) -> FunctionFamily:
    if not isinstance(f.carrier, ProductManifold):
        raise ManifoldError("families live on products")
    return FunctionFamily(f.carrier, f.carrier.check_factor(active), f.body)
