"""Sampled verification of the decomposition identities.

Each check turns one identity into pointwise comparisons at seeded sample
points. Functions are compared with the hybrid tolerance
``|a - b| <= tol * max(1, |a|, |b|)``; a check records the number of
comparisons, the largest error in those units and the first failing witness.

The checks call the ``fields`` module through its attributes, so a patched
implementation (see ``prodfields.mutations``) is what gets verified. The
chart-level component split used as an oracle lives here and never goes
through ``fields``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import fields as fl
from .exprcore import ZERO, Bindings, Const, Expr, NonFiniteError, add, compile_expr, free_vars, mul, to_text
from .manifolds import (
    Manifold,
    ProductManifold,
    SmoothFunction,
    family_to_function,
    function_to_family,
    pullback_embedding,
    pullback_projection,
)
from .sampling import (
    SampleConfig,
    finite_at,
    generate_families,
    generate_functions,
    generate_fields,
    sample_points,
    stream,
)

SUITES = ("leibniz", "pullbacks", "canonical-iso", "theorem", "exact-sequence", "one-forms", "three-factor", "all")

# Number of parameter values n at which embedding pullbacks are formed
# symbolically; each is then evaluated at every sample point's m-part.
EMBED_PARAMS = 5


class SuiteError(ValueError):
    pass


def _jsonable(x: float) -> float | str:
    return x if math.isfinite(x) else repr(x)


@dataclass
class CheckResult:
    name: str
    anchor: str
    points_tested: int = 0
    max_abs_error: float = 0.0
    passed: bool = True
    witness: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "points_tested": self.points_tested,
            "max_abs_error": _jsonable(self.max_abs_error),
            "pass": self.passed,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class CheckReport:
    suite: str
    seed: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
        }


def _safe(run: Callable[[Bindings], float], p: Bindings) -> float:
    try:
        return run(p)
    except NonFiniteError:
        return math.nan


def _point_dict(p: Bindings) -> dict[str, float]:
    return {k: float(v) for k, v in p.items()}


class Tally:
    """Accumulates comparisons for one check."""

    def __init__(self, result: CheckResult, tol: float):
        self.result = result
        self.tol = tol

    def _fail(self, witness: dict) -> None:
        self.result.passed = False
        if self.result.witness is None:
            self.result.witness = witness

    def values(self, label: str, a: float, b: float, point: Bindings) -> bool:
        self.result.points_tested += 1
        # Error in hybrid units: plain |a - b| while both values are within
        # [-1, 1], relative beyond. A passing comparison never exceeds tol.
        err = abs(a - b) / max(1.0, abs(a), abs(b))
        if math.isnan(err):
            self.result.max_abs_error = math.inf
        elif err > self.result.max_abs_error:
            self.result.max_abs_error = err
        if err <= self.tol:
            return True
        self._fail({"function": label, "point": _point_dict(point), "value": _jsonable(a), "expected": _jsonable(b)})
        return False

    def exprs(self, label: str, lhs: Expr, rhs: Expr, points: Sequence[Bindings]) -> bool:
        run_a, run_b = compile_expr(lhs), compile_expr(rhs)
        ok = True
        for p in points:
            ok &= self.values(label, _safe(run_a, p), _safe(run_b, p), p)
        return ok

    def require(self, cond: bool, label: str, witness: fl.Witness | None = None) -> bool:
        if cond:
            return True
        w = {"function": label}
        if witness is not None:
            w.update({"function": f"{label}: {witness.function}", "point": _point_dict(witness.point), "value": _jsonable(witness.value)})
        self._fail(w)
        return False

    def count(self, n: int) -> None:
        self.result.points_tested += n

    def membership(self, m: fl.Membership, label: str) -> bool:
        self.count(m.evaluations)
        return self.require(m.holds, label, m.witness)


# ---------------------------------------------------------------------------
# Independent chart-level oracle


def component_split(v: fl.VectorField, factor: Manifold) -> fl.VectorField:
    """Keep the coefficients along ``factor``'s coordinates, zero the rest."""
    keep = set(factor.coords)
    return fl.VectorField(v.carrier, tuple(e if c in keep else ZERO for c, e in zip(v.carrier.coords, v.coefficients)))


def zero_split(v: fl.VectorField, factor: Manifold) -> fl.VectorField:
    """Zero the coefficients along ``factor``'s coordinates."""
    drop = set(factor.coords)
    return fl.VectorField(v.carrier, tuple(ZERO if c in drop else e for c, e in zip(v.carrier.coords, v.coefficients)))


# ---------------------------------------------------------------------------
# Shared context


class Context:
    def __init__(
        self,
        V: ProductManifold,
        cfg: SampleConfig,
        fields_under_test: Sequence[fl.VectorField],
        functions: Sequence[SmoothFunction] = (),
    ):
        self.V = V
        self.cfg = cfg
        self.tol = cfg.tolerance
        supplied = [v for v in fields_under_test if v.carrier == V]
        user_fns = [f for f in functions if f.carrier == V]
        user_exprs = [e for v in supplied for e in v.coefficients] + [f.body for f in user_fns]
        self.points = sample_points(V, cfg, accept=finite_at(user_exprs) if user_exprs else None)
        self.fields = supplied + generate_fields(V, cfg.generated_fields, stream(cfg.seed, "fields"))
        self.functions = (
            fl.coordinate_functions(V)
            + generate_functions(V, cfg.generated_functions, stream(cfg.seed, "functions:V"))
            + user_fns
        )
        self.factor_tests = {
            F.name: fl.coordinate_functions(F)
            + generate_functions(F, cfg.generated_functions, stream(cfg.seed, f"functions:{F.name}"))
            for F in V.factors
        }
        self.families = {
            F.name: generate_families(V, F, cfg.generated_fields, stream(cfg.seed, f"families:{F.name}"))
            for F in V.factors
        }
        self.forms = {F.name: self._forms(F) for F in V.factors}

    def _forms(self, F: Manifold) -> list[fl.OneForm]:
        coords = [fl.OneForm.coordinate(F, c) for c in F.coords]
        gen = stream(self.cfg.seed, f"forms:{F.name}")
        extra = [
            fl.OneForm(F, tuple(g.body for g in generate_functions(F, F.dim, gen)))
            for _ in range(self.cfg.generated_functions)
        ]
        return coords + extra

    def split(self, p: Bindings, factor: Manifold) -> tuple[dict[str, float], dict[str, float]]:
        m = {c: p[c] for c in factor.coords}
        n = {c: p[c] for c in self.V.complement_coords(factor)}
        return m, n

    def embed_params(self, factor: Manifold) -> list[dict[str, float]]:
        return [self.split(p, factor)[1] for p in self.points[:EMBED_PARAMS]]

    # predicates -----------------------------------------------------------

    def annihilates(self, v: fl.VectorField, F: Manifold) -> fl.Membership:
        return fl.annihilates(v, F, self.points, self.tol, self.factor_tests[F.name])

    def is_zero(self, exprs: Iterable[Expr]) -> bool:
        for e in exprs:
            run = compile_expr(e)
            for p in self.points:
                if not abs(_safe(run, p)) <= self.tol:
                    return False
        return True

    def fields_equal(self, a: Sequence[Expr], b: Sequence[Expr]) -> bool:
        if len(a) != len(b):
            return False
        for ea, eb in zip(a, b):
            ra, rb = compile_expr(ea), compile_expr(eb)
            for p in self.points:
                x, y = _safe(ra, p), _safe(rb, p)
                if not abs(x - y) <= self.tol * max(1.0, abs(x), abs(y)):
                    return False
        return True

    def compare_fields(self, t: Tally, label: str, a, b) -> bool:
        """Componentwise comparison of two fields (or families) at the sample points."""
        if getattr(a, "active", None) != getattr(b, "active", None):
            return t.require(False, f"{label}: active factor {a.active.name} vs {b.active.name}")
        if len(a.coefficients) != len(b.coefficients):
            return t.require(False, f"{label}: {len(a.coefficients)} vs {len(b.coefficients)} coefficients")
        ok = True
        for i, (ea, eb) in enumerate(zip(a.coefficients, b.coefficients)):
            ok &= t.exprs(f"{label}[{i}]: {to_text(ea)} vs {to_text(eb)}", ea, eb, self.points)
        return ok

    def constructed_annihilating(self, F: Manifold) -> list[fl.VectorField]:
        return [zero_split(v, F) for v in self.fields]


# ---------------------------------------------------------------------------
# Checks


def check_linearity(ctx: Context, t: Tally) -> None:
    rng = stream(ctx.cfg.seed, "linearity")
    G = ctx.functions
    for i, v in enumerate(ctx.fields):
        for j, f1 in enumerate(G):
            f2 = G[(j + 1) % len(G)]
            a = Const(rng.uniform(-2.0, 2.0))
            combo = SmoothFunction(ctx.V, add(mul(a, f1.body), f2.body))
            lhs = fl.apply_derivation(v, combo).body
            rhs = add(mul(a, fl.apply_derivation(v, f1).body), fl.apply_derivation(v, f2).body)
            t.exprs(f"v{i}(a*f{j} + f{j + 1})", lhs, rhs, ctx.points)
        const = fl.apply_derivation(v, SmoothFunction(ctx.V, Const(rng.uniform(-2.0, 2.0)))).body
        t.exprs(f"v{i}(constant)", const, ZERO, ctx.points)


def check_leibniz(ctx: Context, t: Tally) -> None:
    G = ctx.functions
    for i, v in enumerate(ctx.fields):
        for j, f in enumerate(G):
            g = G[(j + 1) % len(G)]
            lhs = fl.apply_derivation(v, SmoothFunction(ctx.V, mul(f.body, g.body))).body
            rhs = add(
                mul(fl.apply_derivation(v, f).body, g.body),
                mul(f.body, fl.apply_derivation(v, g).body),
            )
            t.exprs(f"v{i}(f{j}*f{j + 1})", lhs, rhs, ctx.points)


def check_section_identity(ctx: Context, t: Tally) -> None:
    """i_n^* pi_F^* g = g."""
    for F in ctx.V.factors:
        for g in ctx.factor_tests[F.name]:
            lifted = pullback_projection(g, ctx.V)
            for n in ctx.embed_params(F):
                back = pullback_embedding(lifted, F, n)
                t.require(back.carrier == F, f"i_n^* pi^* {to_text(g.body)} lands on {back.carrier.name}")
                run_back, run_g = compile_expr(back.body), compile_expr(g.body)
                for p in ctx.points:
                    m, _ = ctx.split(p, F)
                    t.values(f"i_n^* pi_{F.name}^* ({to_text(g.body)}) at n={n}", _safe(run_back, m), _safe(run_g, m), m)


def check_fiber_constant(ctx: Context, t: Tally) -> None:
    """i_n^* pi_G^* h is the constant h(n) for every other factor G."""
    for F in ctx.V.factors:
        for G in ctx.V.complement(F):
            for h in ctx.factor_tests[G.name]:
                lifted = pullback_projection(h, ctx.V)
                run_h = compile_expr(h.body)
                for n in ctx.embed_params(F):
                    back = pullback_embedding(lifted, F, n)
                    label = f"i_n^* pi_{G.name}^* ({to_text(h.body)}) on {F.name} at n={n}"
                    t.require(not free_vars(back.body), f"{label} is not constant")
                    expected = _safe(run_h, {c: n[c] for c in G.coords})
                    run_back = compile_expr(back.body)
                    for p in ctx.points:
                        m, _ = ctx.split(p, F)
                        t.values(label, _safe(run_back, m), expected, m)


def check_algebra_morphism(ctx: Context, t: Tally) -> None:
    for F in ctx.V.factors:
        tests = ctx.factor_tests[F.name]
        for j in range(len(tests)):
            g1, g2, g3 = (tests[(j + k) % len(tests)] for k in range(3))
            combined = SmoothFunction(F, add(mul(g1.body, g2.body), g3.body))
            lhs = pullback_projection(combined, ctx.V).body
            pulled = [pullback_projection(g, ctx.V).body for g in (g1, g2, g3)]
            rhs = add(mul(pulled[0], pulled[1]), pulled[2])
            t.exprs(f"pi_{F.name}^*(g{j}*g{j + 1} + g{j + 2})", lhs, rhs, ctx.points)


def check_canonical_iso(ctx: Context, t: Tally) -> None:
    for F in ctx.V.factors:
        for j, f in enumerate(ctx.functions):
            fam = function_to_family(f, F)
            t.require(family_to_function(fam) == f, f"family_to_function(function_to_family(f{j}))")
            t.require(function_to_family(family_to_function(fam), F) == fam, f"function_to_family(family_to_function(g{j}))")
            run_f = compile_expr(family_to_function(fam).body)
            for n in ctx.embed_params(F):
                member = compile_expr(fam.member(n).body)
                for p in ctx.points:
                    m, _ = ctx.split(p, F)
                    full = {**m, **n}
                    t.values(f"g{j}_n(m) vs f{j}(m, n) on {F.name}", _safe(member, m), _safe(run_f, full), full)


def check_embedding_property(ctx: Context, t: Tally) -> None:
    """i_n^* (iota(w)(f)) = w_n(i_n^* f)."""
    for F in ctx.V.factors:
        for i, w in enumerate(ctx.families[F.name]):
            v = fl.iota_family(w)
            for j, f in enumerate(ctx.functions):
                vf = fl.apply_derivation(v, f)
                for n in ctx.embed_params(F):
                    lhs = pullback_embedding(vf, F, n).body
                    rhs = fl.apply_derivation(w.at(n), pullback_embedding(f, F, n)).body
                    run_l, run_r = compile_expr(lhs), compile_expr(rhs)
                    for p in ctx.points:
                        m, _ = ctx.split(p, F)
                        t.values(f"i_n^* iota(w{i})(f{j}) on {F.name}", _safe(run_l, m), _safe(run_r, m), m)


def check_left_inverse(ctx: Context, t: Tally) -> None:
    """pi o iota = Id on families."""
    for F in ctx.V.factors:
        for i, w in enumerate(ctx.families[F.name]):
            ctx.compare_fields(t, f"pi_{F.name}(iota(w{i}))", fl.project_to_family(fl.iota_family(w), F), w)


def check_iota_injective(ctx: Context, t: Tally) -> None:
    for F in ctx.V.factors:
        cases = ctx.families[F.name] + [fl.VectorFieldFamily.zero(ctx.V, F)]
        for i, w in enumerate(cases):
            v = fl.iota_family(w)
            t.require(
                ctx.is_zero(v.coefficients) == ctx.is_zero(w.coefficients),
                f"iota(w{i}) vanishes iff w{i} vanishes on {F.name}",
            )
            ctx.compare_fields(t, f"pi_{F.name}(iota(w{i}))", fl.project_to_family(v, F), w)


def _two(ctx: Context) -> tuple[Manifold, Manifold]:
    M, N = ctx.V.factors
    return M, N


def check_direct_sum(ctx: Context, t: Tally) -> None:
    M, N = _two(ctx)
    for i, v in enumerate(ctx.fields):
        h, r = fl.decompose(v)
        for j, f in enumerate(ctx.functions):
            lhs = add(fl.apply_derivation(h, f).body, fl.apply_derivation(r, f).body)
            t.exprs(f"hor(v{i})(f{j}) + ver(v{i})(f{j}) vs v{i}(f{j})", lhs, fl.apply_derivation(v, f).body, ctx.points)
        t.membership(ctx.annihilates(h, N), f"hor(v{i}) horizontal")
        t.membership(ctx.annihilates(r, M), f"ver(v{i}) vertical")


def check_projection_maps(ctx: Context, t: Tally) -> None:
    M, N = _two(ctx)
    for i, v in enumerate(ctx.fields):
        h = fl.horizontal_projection(v)
        r = fl.vertical_projection(v)
        t.membership(ctx.annihilates(h, N), f"hor(v{i}) in X_{N.name}(V)")
        t.membership(ctx.annihilates(v - h, M), f"v{i} - hor(v{i}) in X_{M.name}(V)")
        t.membership(ctx.annihilates(r, M), f"ver(v{i}) in X_{M.name}(V)")
        t.membership(ctx.annihilates(v - r, N), f"v{i} - ver(v{i}) in X_{N.name}(V)")


def check_idempotent(ctx: Context, t: Tally) -> None:
    for i, v in enumerate(ctx.fields):
        h = fl.horizontal_projection(v)
        r = fl.vertical_projection(v)
        ctx.compare_fields(t, f"hor(hor(v{i})) vs hor(v{i})", fl.horizontal_projection(h), h)
        ctx.compare_fields(t, f"ver(ver(v{i})) vs ver(v{i})", fl.vertical_projection(r), r)


def check_kernel(ctx: Context, t: Tally) -> None:
    """Ker(pi onto families on M) = X_M(V), in both directions."""
    M, _ = _two(ctx)
    cases = ctx.fields + ctx.constructed_annihilating(M)
    for i, v in enumerate(cases):
        in_kernel = ctx.is_zero(fl.project_to_family(v, M).coefficients)
        vertical = ctx.annihilates(v, M)
        t.count(vertical.evaluations)
        t.require(in_kernel == vertical.holds, f"case {i}: pi_{M.name}(v) = 0 is {in_kernel}, vertical is {vertical.holds}")


def check_image(ctx: Context, t: Tally) -> None:
    """Im(iota of families on M) = X_N(V)."""
    M, N = _two(ctx)
    for i, v in enumerate(ctx.constructed_annihilating(N)):
        ctx.compare_fields(t, f"iota(pi_{M.name}(h{i})) vs h{i}", fl.iota_family(fl.project_to_family(v, M)), v)
    for i, w in enumerate(ctx.families[M.name]):
        t.membership(ctx.annihilates(fl.iota_family(w), N), f"iota(w{i}) horizontal")


def check_isomorphism(ctx: Context, t: Tally) -> None:
    """iota is a bijection from families on F onto fields annihilating the other factor."""
    for F in ctx.V.factors:
        (G,) = ctx.V.complement(F)
        for i, w in enumerate(ctx.families[F.name]):
            v = fl.iota_family(w)
            t.membership(ctx.annihilates(v, G), f"iota(w{i}) in X_{G.name}(V)")
            ctx.compare_fields(t, f"pi_{F.name}(iota(w{i})) vs w{i}", fl.project_to_family(v, F), w)
        for i, v in enumerate(ctx.constructed_annihilating(G)):
            ctx.compare_fields(t, f"iota(pi_{F.name}(u{i})) vs u{i}", fl.iota_family(fl.project_to_family(v, F)), v)


def check_oracle(ctx: Context, t: Tally) -> None:
    M, N = _two(ctx)
    for i, v in enumerate(ctx.fields):
        ctx.compare_fields(t, f"hor(v{i}) vs split", fl.horizontal_projection(v), component_split(v, M))
        ctx.compare_fields(t, f"ver(v{i}) vs split", fl.vertical_projection(v), component_split(v, N))


def check_exact_injective(ctx: Context, t: Tally) -> None:
    M, _ = _two(ctx)
    for i, w in enumerate(ctx.families[M.name] + [fl.VectorFieldFamily.zero(ctx.V, M)]):
        v = fl.iota_family(w)
        t.require(ctx.is_zero(v.coefficients) == ctx.is_zero(w.coefficients), f"iota(w{i}) = 0 iff w{i} = 0")
        ctx.compare_fields(t, f"pi_{M.name}(iota(w{i}))", fl.project_to_family(v, M), w)


def check_exact_composite(ctx: Context, t: Tally) -> None:
    M, N = _two(ctx)
    for i, w in enumerate(ctx.families[M.name]):
        u = fl.project_to_family(fl.iota_family(w), N)
        ctx.compare_fields(t, f"pi_{N.name}(iota(w{i}))", u, fl.VectorFieldFamily.zero(ctx.V, N))


def check_exact_kernel(ctx: Context, t: Tally) -> None:
    M, N = _two(ctx)
    hits = 0
    for i, v in enumerate(ctx.fields + ctx.constructed_annihilating(N)):
        if not ctx.is_zero(fl.project_to_family(v, N).coefficients):
            continue
        hits += 1
        ctx.compare_fields(t, f"case {i} in Ker(pi_{N.name}) vs iota(pi_{M.name}(.))", fl.iota_family(fl.project_to_family(v, M)), v)
    t.require(hits > 0, f"no field in Ker(pi_{N.name}) was exercised")


def check_exact_surjective(ctx: Context, t: Tally) -> None:
    _, N = _two(ctx)
    for i, u in enumerate(ctx.families[N.name]):
        ctx.compare_fields(t, f"pi_{N.name}(iota(u{i})) vs u{i}", fl.project_to_family(fl.iota_family(u), N), u)


def check_oneforms(ctx: Context, t: Tally) -> None:
    """Annihilating pullbacks of functions vs of 1-forms, for each factor."""
    for F in ctx.V.factors:
        cases = ctx.fields + ctx.constructed_annihilating(F)
        for i, v in enumerate(cases):
            by_functions = ctx.annihilates(v, F)
            by_forms = fl.annihilated_by_forms(v, F, ctx.points, ctx.tol, ctx.forms[F.name])
            t.count(by_functions.evaluations + by_forms.evaluations)
            t.require(
                by_functions.holds == by_forms.holds,
                f"case {i} on {F.name}: function test {by_functions.holds}, 1-form test {by_forms.holds}",
                by_forms.witness or by_functions.witness,
            )


def check_three_decomposition(ctx: Context, t: Tally) -> None:
    V = ctx.V
    for i, v in enumerate(ctx.fields):
        parts = fl.multi_decompose(v)
        for j, f in enumerate(ctx.functions):
            total: Expr = ZERO
            for part in parts:
                total = add(total, fl.apply_derivation(part, f).body)
            t.exprs(f"sum of parts of v{i} on f{j}", total, fl.apply_derivation(v, f).body, ctx.points)
        for F, part in zip(V.factors, parts):
            for G in V.complement(F):
                t.membership(ctx.annihilates(part, G), f"{F.name}-part of v{i} annihilates {G.name}")
            ctx.compare_fields(t, f"{F.name}-part of v{i} vs split", part, component_split(v, F))


def check_three_kernel(ctx: Context, t: Tally) -> None:
    for F in ctx.V.factors:
        for i, v in enumerate(ctx.fields + ctx.constructed_annihilating(F)):
            in_kernel = ctx.is_zero(fl.project_to_family(v, F).coefficients)
            member = ctx.annihilates(v, F)
            t.count(member.evaluations)
            t.require(in_kernel == member.holds, f"case {i}: Ker(pi_{F.name}) vs X_{F.name}(V)")


def check_three_image(ctx: Context, t: Tally) -> None:
    V = ctx.V
    for F in V.factors:
        others = V.complement(F)
        cases = list(ctx.fields)
        cases += [component_split(v, F) for v in ctx.fields]
        cases += [zero_split(v, G) for G in others for v in ctx.fields[:5]]
        for i, v in enumerate(cases):
            in_image = ctx.fields_equal(fl.iota_family(fl.project_to_family(v, F)).coefficients, v.coefficients)
            in_kernels = all(ctx.is_zero(fl.project_to_family(v, G).coefficients) for G in others)
            t.count(len(ctx.points) * (1 + len(others)))
            t.require(in_image == in_kernels, f"case {i} on {F.name}: image {in_image}, kernels {in_kernels}")


@dataclass(frozen=True)
class CheckSpec:
    name: str
    anchor: str
    suite: str
    factors: int | None
    run: Callable[[Context, Tally], None]


CHECKS: tuple[CheckSpec, ...] = (
    CheckSpec("derivation.linearity", "vector fields are derivations", "leibniz", None, check_linearity),
    CheckSpec("derivation.leibniz", "vector fields are derivations", "leibniz", None, check_leibniz),
    CheckSpec("pullback.section_identity", "pi_M o i_n = Id_M", "pullbacks", None, check_section_identity),
    CheckSpec("pullback.fiber_constant", "pi_N o i_n0 = const n0", "pullbacks", None, check_fiber_constant),
    CheckSpec("pullback.algebra_morphism", "pullbacks are algebra morphisms", "pullbacks", None, check_algebra_morphism),
    CheckSpec("canonical_iso.roundtrip", "C(M,N) = C(V)", "canonical-iso", None, check_canonical_iso),
    CheckSpec("iota.embedding_property", "i_n^* v(f) = w_n(i_n^* f)", "canonical-iso", None, check_embedding_property),
    CheckSpec("iota.left_inverse", "pi o iota = Id", "canonical-iso", None, check_left_inverse),
    CheckSpec("iota.injective", "Ker(iota) = 0", "canonical-iso", None, check_iota_injective),
    CheckSpec("decomposition.direct_sum", "X(V) = X_N(V) + X_M(V)", "theorem", 2, check_direct_sum),
    CheckSpec("decomposition.projection_maps", "hor = iota o pi", "theorem", 2, check_projection_maps),
    CheckSpec("decomposition.idempotent", "projections are idempotent", "theorem", 2, check_idempotent),
    CheckSpec("decomposition.kernel", "Ker(pi) = X_M(V)", "theorem", 2, check_kernel),
    CheckSpec("decomposition.image", "Im(iota) = X_N(V)", "theorem", 2, check_image),
    CheckSpec("decomposition.isomorphism", "iota: X(M,N) = X_N(V)", "theorem", 2, check_isomorphism),
    CheckSpec("decomposition.oracle", "composition agrees with component split", "theorem", 2, check_oracle),
    CheckSpec("exact_sequence.injective", "exactness at X(M,N)", "exact-sequence", 2, check_exact_injective),
    CheckSpec("exact_sequence.composite_zero", "pi_N o iota_M = 0", "exact-sequence", 2, check_exact_composite),
    CheckSpec("exact_sequence.kernel_in_image", "Ker(pi_N) in Im(iota_M)", "exact-sequence", 2, check_exact_kernel),
    CheckSpec("exact_sequence.surjective", "exactness at X(N,M)", "exact-sequence", 2, check_exact_surjective),
    CheckSpec("one_forms.equivalence", "1-form characterization", "one-forms", None, check_oneforms),
    CheckSpec("three_factor.decomposition", "X(V) = X_NL + X_LM + X_MN", "three-factor", 3, check_three_decomposition),
    CheckSpec("three_factor.kernel", "Ker(pi_X(M,NxL)) = X_M(V)", "three-factor", 3, check_three_kernel),
    CheckSpec("three_factor.image_intersection", "Im(iota) = Ker(pi) n Ker(pi)", "three-factor", 3, check_three_image),
)


def select_checks(suite: str, n_factors: int) -> list[CheckSpec]:
    if suite not in SUITES:
        raise SuiteError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if suite == "all":
        return [c for c in CHECKS if c.factors in (None, n_factors)]
    chosen = [c for c in CHECKS if c.suite == suite]
    need = {c.factors for c in chosen} - {None}
    if need and n_factors not in need:
        raise SuiteError(f"suite {suite!r} needs a {need.pop()}-factor product, got {n_factors} factors")
    return chosen


def run_suite(
    V: ProductManifold,
    fields_under_test: Sequence[fl.VectorField],
    suite: str,
    cfg: SampleConfig | None = None,
    functions: Sequence[SmoothFunction] = (),
    only: Sequence[str] | None = None,
) -> CheckReport:
    """Run ``suite`` (optionally narrowed to the checks named in ``only``)."""
    cfg = cfg or SampleConfig()
    chosen = select_checks(suite, len(V.factors))
    if only is not None:
        unknown = set(only) - {c.name for c in chosen}
        if unknown:
            raise SuiteError(f"suite {suite!r} has no check named {', '.join(sorted(unknown))}")
        chosen = [c for c in chosen if c.name in only]
    ctx = Context(V, cfg, fields_under_test, functions)
    report = CheckReport(suite, cfg.seed)
    for spec in chosen:
        result = CheckResult(spec.name, spec.anchor)
        tally = Tally(result, ctx.tol)
        try:
            spec.run(ctx, tally)
        except Exception as exc:  # a crashing implementation is a failed check
            tally.require(False, f"{type(exc).__name__}: {exc}")
        report.checks.append(result)
    return report


def check_functions_equal(f1: SmoothFunction, f2: SmoothFunction, cfg: SampleConfig | None = None) -> CheckResult:
    """Compare two functions on a shared carrier at ``cfg.samples`` seeded points."""
    cfg = cfg or SampleConfig()
    if f1.carrier != f2.carrier:
        raise fl.FieldError(f"carrier mismatch: {f1.carrier.name} vs {f2.carrier.name}")
    result = CheckResult("functions_equal", "sampled equality")
    tally = Tally(result, cfg.tolerance)
    tally.exprs(f"{to_text(f1.body)} vs {to_text(f2.body)}", f1.body, f2.body, sample_points(f1.carrier, cfg))
    return result
