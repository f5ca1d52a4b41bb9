"""Seeded sample points and randomly generated test objects.

Every random stream is a ``random.Random`` keyed by ``(seed, purpose)`` so
that the points, functions and fields used by a check never depend on what
other checks consumed. Streams are prefix-stable: asking for more samples
extends the list instead of replacing it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .exprcore import Bindings, Expr, NonFiniteError, compile_expr
from .fields import VectorField, VectorFieldFamily
from .manifolds import Carrier, Manifold, ProductManifold
from .randexpr import generate_functions, random_expr  # noqa: F401  (re-exported)

MAX_REJECTIONS = 100


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 42
    samples: int = 100
    tolerance: float = 1e-9
    generated_functions: int = 8
    generated_fields: int = 20

    def __post_init__(self):
        if not -(2**63) <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.generated_functions < 0:
            raise ValueError("generated_functions must be non-negative")
        if self.generated_fields < 1:
            raise ValueError("generated_fields must be at least 1")


def stream(seed: int, purpose: str) -> random.Random:
    return random.Random(f"{seed}/{purpose}")


def sample_points(
    carrier: Carrier,
    cfg: SampleConfig,
    accept: Callable[[Bindings], bool] | None = None,
    purpose: str = "points",
) -> list[dict[str, float]]:
    """``cfg.samples`` points uniform in [-1, 1]^dim.

    Points failing ``accept`` are redrawn; more than ``MAX_REJECTIONS``
    consecutive rejections is an error.
    """
    rng = stream(cfg.seed, purpose)
    points: list[dict[str, float]] = []
    rejected = 0
    while len(points) < cfg.samples:
        p = {c: rng.uniform(-1.0, 1.0) for c in carrier.coords}
        if accept is None or accept(p):
            points.append(p)
            rejected = 0
            continue
        rejected += 1
        if rejected > MAX_REJECTIONS:
            raise SamplingError(f"{MAX_REJECTIONS} consecutive sample points rejected on {carrier.name}")
    return points


def finite_at(exprs: Sequence[Expr]) -> Callable[[Bindings], bool]:
    """Acceptance predicate: every expression evaluates to a finite value."""
    runs = [compile_expr(e) for e in exprs]

    def accept(p: Bindings) -> bool:
        try:
            return all(math.isfinite(run(p)) for run in runs)
        except NonFiniteError:
            return False

    return accept


def generate_fields(carrier: Carrier, count: int, rng: random.Random) -> list[VectorField]:
    return [
        VectorField(carrier, tuple(random_expr(rng, carrier.coords) for _ in carrier.coords))
        for _ in range(count)
    ]


def generate_families(V: ProductManifold, active: Manifold, count: int, rng: random.Random) -> list[VectorFieldFamily]:
    return [
        VectorFieldFamily(V, active, tuple(random_expr(rng, V.coords) for _ in active.coords))
        for _ in range(count)
    ]
