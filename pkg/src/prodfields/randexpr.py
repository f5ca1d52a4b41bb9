"""Random smooth test functions: low-degree polynomials, sometimes wrapped in sin or exp."""

from __future__ import annotations

import itertools
import random
from typing import Sequence

from .exprcore import ZERO, Const, Expr, Unary, Var, add, mul, power
from .manifolds import Carrier, SmoothFunction

DEGREE = 3


def _monomials(n: int, degree: int = DEGREE) -> list[tuple[int, ...]]:
    return [m for m in itertools.product(range(degree + 1), repeat=n) if sum(m) <= degree]


def random_expr(rng: random.Random, coords: Sequence[str]) -> Expr:
    """2 to 5 distinct monomials of degree <= 3 with coefficients uniform in [-1, 1]."""
    pool = _monomials(len(coords))
    terms = rng.sample(pool, k=min(len(pool), rng.randint(2, 5)))
    body: Expr = ZERO
    for exps in terms:
        term: Expr = Const(rng.uniform(-1.0, 1.0))
        for c, k in zip(coords, exps):
            if k:
                term = mul(term, power(Var(c), Const(k)))
        body = add(body, term)
    wrap = rng.choice((None, None, "sin", "exp"))
    return Unary(wrap, body) if wrap else body


def generate_functions(carrier: Carrier, count: int, rng: random.Random) -> list[SmoothFunction]:
    return [SmoothFunction(carrier, random_expr(rng, carrier.coords)) for _ in range(count)]
