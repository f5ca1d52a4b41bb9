"""Command-line front end: ``decompose`` and ``verify`` over a JSON spec file.

Exit codes: 0 success, 1 verification failure, 2 usage, parse or spec error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import fields as fl
from .exprcore import ExprError, ParseError, parse_expr, to_text
from .manifolds import PRODUCT_NAME, Carrier, Manifold, ManifoldError, ProductManifold, SmoothFunction, make_manifold, make_product
from .mutations import MUTATIONS, mutated
from .sampling import SampleConfig, SamplingError
from .verify import SUITES, CheckReport, SuiteError, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class SpecError(ValueError):
    pass


@dataclass
class Spec:
    manifolds: dict[str, Manifold]
    product: ProductManifold
    functions: dict[str, SmoothFunction]
    fields: dict[str, fl.VectorField]


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise SpecError(message)


def _parse(text: Any, where: str):
    _expect(isinstance(text, str), f"{where}: expression must be a string")
    try:
        return parse_expr(text)
    except ParseError as exc:
        raise SpecError(f"{where}: parse error: {exc}") from None


def _unique(entries: list, kind: str) -> None:
    names = [e.get("name") for e in entries]
    for name in names:
        _expect(isinstance(name, str) and name, f"every {kind} needs a non-empty string name")
        _expect(names.count(name) == 1, f"duplicate {kind} name {name!r}")


def build_spec(data: Any) -> Spec:
    _expect(isinstance(data, dict), "spec must be a JSON object")
    for key in ("manifolds", "product"):
        _expect(key in data, f"spec is missing {key!r}")
    raw_manifolds = data["manifolds"]
    _expect(isinstance(raw_manifolds, list), "'manifolds' must be a list")
    _expect(all(isinstance(m, dict) for m in raw_manifolds), "each manifold must be an object")
    _unique(raw_manifolds, "manifold")
    manifolds: dict[str, Manifold] = {}
    for m in raw_manifolds:
        coords = m.get("coords")
        _expect(isinstance(coords, list) and all(isinstance(c, str) for c in coords), f"manifold {m['name']!r}: coords must be a list of names")
        try:
            manifolds[m["name"]] = make_manifold(m["name"], coords)
        except ManifoldError as exc:
            raise SpecError(f"manifold {m['name']!r}: {exc}") from None

    factor_names = data["product"]
    _expect(isinstance(factor_names, list), "'product' must be a list of manifold names")
    for name in factor_names:
        _expect(name in manifolds, f"product refers to unknown manifold {name!r}")
    try:
        product = make_product([manifolds[n] for n in factor_names])
    except ManifoldError as exc:
        raise SpecError(f"product: {exc}") from None

    def carrier(name: Any, owner: str) -> Carrier:
        if name == PRODUCT_NAME:
            return product
        _expect(name in manifolds, f"{owner}: unknown carrier {name!r}")
        return manifolds[name]

    raw_functions = data.get("functions", [])
    _expect(isinstance(raw_functions, list) and all(isinstance(f, dict) for f in raw_functions), "'functions' must be a list of objects")
    _unique(raw_functions, "function")
    functions: dict[str, SmoothFunction] = {}
    for f in raw_functions:
        where = f"function {f['name']!r}"
        body = _parse(f.get("expr"), where)
        try:
            functions[f["name"]] = SmoothFunction(carrier(f.get("on"), where), body)
        except ManifoldError as exc:
            raise SpecError(f"{where}: {exc}") from None

    raw_fields = data.get("fields", [])
    _expect(isinstance(raw_fields, list) and all(isinstance(v, dict) for v in raw_fields), "'fields' must be a list of objects")
    _unique(raw_fields, "field")
    fields: dict[str, fl.VectorField] = {}
    for v in raw_fields:
        where = f"field {v['name']!r}"
        on = carrier(v.get("on"), where)
        comps = v.get("components")
        _expect(isinstance(comps, dict), f"{where}: components must be an object")
        for c in on.coords:
            _expect(c in comps, f"{where}: missing component {c!r}")
        for c in comps:
            _expect(c in on.coords, f"{where}: {c!r} is not a coordinate of {on.name}")
        parsed = {c: _parse(comps[c], f"{where} component {c!r}") for c in on.coords}
        try:
            fields[v["name"]] = fl.VectorField.from_components(on, parsed)
        except fl.FieldError as exc:
            raise SpecError(f"{where}: {exc}") from None
    return Spec(manifolds, product, functions, fields)


def load_spec(path: str | Path) -> Spec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return build_spec(data)


# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _part_labels(V: ProductManifold) -> list[tuple[str, str]]:
    """(name, subspace) for the part tangent to each factor."""
    names = [F.name for F in V.factors]
    if len(names) == 2:
        M, N = names
        return [("horizontal", f"X_{N}(V)"), ("vertical", f"X_{M}(V)")]
    k = len(names)
    return [
        (f"along {names[i]}", "X_" + "".join(names[(i + j) % k] for j in range(1, k)) + "(V)")
        for i in range(k)
    ]


def cmd_decompose(spec: Spec, field_name: str, json_path: str | None, out=None) -> int:
    out = out or sys.stdout
    if field_name not in spec.fields:
        print(f"error: unknown field {field_name!r}", file=sys.stderr)
        return EXIT_USAGE
    v = spec.fields[field_name]
    if v.carrier != spec.product:
        print(f"error: field {field_name!r} is not carried on {PRODUCT_NAME}", file=sys.stderr)
        return EXIT_USAGE
    V = spec.product
    parts = fl.decompose(v) if len(V.factors) == 2 else fl.multi_decompose(v)
    doc = {"field": field_name, "product": [F.name for F in V.factors], "parts": []}
    print(f"field {field_name} on {V}", file=out)
    for F, (name, subspace), part in zip(V.factors, _part_labels(V), parts):
        comps = {c: to_text(e) for c, e in part.components.items()}
        doc["parts"].append({"name": name, "subspace": subspace, "factor": F.name, "components": comps})
        print(f"{name} {subspace}:", file=out)
        for c, text in comps.items():
            print(f"  d/d{c}: {text}", file=out)
    if json_path:
        Path(json_path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def print_report(report: CheckReport, cfg: SampleConfig, out=None) -> None:
    out = out or sys.stdout
    print(f"suite {report.suite}  seed {cfg.seed}  samples {cfg.samples}  tolerance {cfg.tolerance!r}", file=out)
    width = max(len(c.name) for c in report.checks)
    print(f"{'check'.ljust(width)}  {'points':>8}  {'max_abs_error':>24}  result", file=out)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{c.name.ljust(width)}  {c.points_tested:>8}  {_fmt(c.max_abs_error):>24}  {status}", file=out)
        if c.witness is not None:
            w = c.witness
            print(f"    witness: {w['function']}", file=out)
            if "point" in w:
                point = ", ".join(f"{k}={_fmt(x)}" for k, x in w["point"].items())
                value = w["value"] if isinstance(w["value"], str) else _fmt(w["value"])
                print(f"      at {point}: value {value}", file=out)
    print(f"overall: {'PASS' if report.passed else 'FAIL'}", file=out)


def cmd_verify(spec: Spec, suite: str, cfg: SampleConfig, json_path: str | None, mutation: str | None = None, out=None) -> int:
    fields_on_v = [v for v in spec.fields.values() if v.carrier == spec.product]
    fns_on_v = [f for f in spec.functions.values() if f.carrier == spec.product]
    try:
        with mutated(mutation):
            report = run_suite(spec.product, fields_on_v, suite, cfg, fns_on_v)
    except (SuiteError, SamplingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print_report(report, cfg, out)
    if json_path:
        Path(json_path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prodfields", description="Horizontal/vertical decomposition of vector fields on product manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="split a field into its parts along each factor")
    d.add_argument("--spec", required=True)
    d.add_argument("--field", required=True)
    d.add_argument("--json")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--spec", required=True)
    v.add_argument("--suite", required=True, choices=SUITES)
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--gen-funcs", type=int, default=8)
    v.add_argument("--gen-fields", type=int, default=20)
    v.add_argument("--json")
    v.add_argument("--mutation", choices=sorted(MUTATIONS), help="verify a deliberately broken build")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        spec = load_spec(args.spec)
    except (SpecError, ExprError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "decompose":
        return cmd_decompose(spec, args.field, args.json)
    try:
        cfg = SampleConfig(args.seed, args.samples, args.tol, args.gen_funcs, args.gen_fields)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return cmd_verify(spec, args.suite, cfg, args.json, args.mutation)


if __name__ == "__main__":
    sys.exit(main())
