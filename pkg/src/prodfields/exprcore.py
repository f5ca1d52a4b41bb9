"""Expression trees over named real coordinates.

Parsing, printing, numeric evaluation, symbolic differentiation and
substitution. Trees are immutable; every smooth object in the package
(functions, field coefficients, 1-form coefficients) is one of these.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Union

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")
BINARY_OPS = ("+", "-", "*", "/", "^")
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")

Bindings = Mapping[str, float]


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError, ValueError):
    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message} at byte offset {offset}{detail}")


class UnboundVariableError(ExprError, KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self) -> str:
        return f"unbound variable {self.name!r}"


class NonFiniteError(ExprError, ArithmeticError):
    def __init__(self, subexpr: Expr, reason: str = "non-finite result"):
        self.subexpr = subexpr
        super().__init__(f"{reason} in {to_text(subexpr)}")


def is_identifier(name: str) -> bool:
    return isinstance(name, str) and IDENT_RE.fullmatch(name) is not None


class Expr:
    """Base of the immutable expression tree."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)

    # Operator overloads build simplified trees; handy for constructing
    # coefficients in code and tests.
    def __add__(self, other): return add(self, as_expr(other))
    def __radd__(self, other): return add(as_expr(other), self)
    def __sub__(self, other): return sub(self, as_expr(other))
    def __rsub__(self, other): return sub(as_expr(other), self)
    def __mul__(self, other): return mul(self, as_expr(other))
    def __rmul__(self, other): return mul(as_expr(other), self)
    def __truediv__(self, other): return div(self, as_expr(other))
    def __rtruediv__(self, other): return div(as_expr(other), self)
    def __pow__(self, other): return power(self, as_expr(other))
    def __rpow__(self, other): return power(as_expr(other), self)
    def __neg__(self): return neg(self)


@dataclass(frozen=True, repr=False)
class Const(Expr):
    value: float

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value):
            raise ExprError(f"constants must be finite, got {self.value!r}")
        object.__setattr__(self, "value", value)

    def __repr__(self) -> str:
        return f"Const({self.value!r})"


@dataclass(frozen=True, repr=False)
class Var(Expr):
    name: str

    def __post_init__(self):
        if not is_identifier(self.name):
            raise ExprError(f"invalid variable name {self.name!r}")

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False)
class Unary(Expr):
    """Negation (op ``"neg"``) or one of the elementary functions."""

    op: str
    arg: Expr

    def __post_init__(self):
        if self.op != "neg" and self.op not in FUNCTIONS:
            raise ExprError(f"unknown unary operation {self.op!r}")

    def __repr__(self) -> str:
        return f"Unary({self.op!r}, {self.arg!r})"


@dataclass(frozen=True, repr=False)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ExprError(f"unknown binary operation {self.op!r}")

    def __repr__(self) -> str:
        return f"Binary({self.op!r}, {self.left!r}, {self.right!r})"


ZERO = Const(0.0)
ONE = Const(1.0)

ExprLike = Union[Expr, str, int, float]


def as_expr(value: ExprLike) -> Expr:
    """Coerce numbers and expression text to an Expr."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, (int, float)):
        return Const(value)
    if isinstance(value, str):
        return parse_expr(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# ---------------------------------------------------------------------------
# Light simplification: identity elements, annihilation by zero, folding.


def _fold(fn: Callable[[], float]) -> Const | None:
    try:
        value = fn()
    except (ValueError, ZeroDivisionError, OverflowError):
        return None
    if isinstance(value, complex) or not math.isfinite(value):
        return None
    return Const(value)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda: a.value + b.value) or Binary("+", a, b)
    if is_const(a, 0.0):
        return b
    if is_const(b, 0.0):
        return a
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda: a.value - b.value) or Binary("-", a, b)
    if is_const(b, 0.0):
        return a
    if is_const(a, 0.0):
        return neg(b)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda: a.value * b.value) or Binary("*", a, b)
    if is_const(a, 0.0) or is_const(b, 0.0):
        return ZERO
    if is_const(a, 1.0):
        return b
    if is_const(b, 1.0):
        return a
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda: a.value / b.value) or Binary("/", a, b)
    if is_const(a, 0.0):
        return ZERO
    if is_const(b, 1.0):
        return a
    return Binary("/", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda: math.pow(a.value, b.value)) or Binary("^", a, b)
    if is_const(b, 0.0):
        return ONE
    if is_const(b, 1.0):
        return a
    return Binary("^", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def apply_function(name: str, a: Expr) -> Expr:
    if name == "neg":
        return neg(a)
    if isinstance(a, Const):
        folded = _fold(lambda: _MATH[name](a.value))
        if folded is not None:
            return folded
    return Unary(name, a)


_SMART_BINARY = {"+": add, "-": sub, "*": mul, "/": div, "^": power}


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the light simplification rules."""
    if isinstance(e, Unary):
        return apply_function(e.op, simplify(e.arg))
    if isinstance(e, Binary):
        return _SMART_BINARY[e.op](simplify(e.left), simplify(e.right))
    return e


# ---------------------------------------------------------------------------
# Parser


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            stripped = len(text) - len(text[pos:].lstrip())
            if stripped == len(text):
                break
            m = _TOKEN_RE.match(text, pos)
            if m is None or m.lastgroup is None:
                raise ParseError(f"unexpected character {text[stripped]!r}", self._byte(stripped))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("eof", "", len(text)))
        self.i = 0

    def _byte(self, index: int) -> int:
        return len(self.text[:index].encode("utf-8"))

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def error(self, expected: set[str]) -> ParseError:
        kind, value, pos = self.peek()
        found = "end of input" if kind == "eof" else repr(value)
        return ParseError(f"unexpected {found}", self._byte(pos), frozenset(expected))

    def accept(self, op: str) -> bool:
        kind, value, _ = self.peek()
        if kind == "op" and value == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            raise self.error({op})

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "eof":
            raise self.error({"+", "-", "*", "/", "^", "end of input"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = Binary("+", e, self.term())
            elif self.accept("-"):
                e = Binary("-", e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            if self.accept("*"):
                e = Binary("*", e, self.factor())
            elif self.accept("/"):
                e = Binary("/", e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        # Unary minus binds looser than ^ so that -x^2 is -(x^2); the
        # exponent may itself carry a sign (2^-x).
        if self.accept("-"):
            return Unary("neg", self.factor())
        base = self.atom()
        if self.accept("^"):
            return Binary("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, value, pos = self.peek()
        if kind == "number":
            self.i += 1
            return Const(float(value))
        if kind == "ident":
            self.i += 1
            if self.accept("("):
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function {value!r}", self._byte(pos), frozenset(FUNCTIONS))
                arg = self.expr()
                self.expect(")")
                return Unary(value, arg)
            return Var(value)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise self.error({"number", "identifier", "(", "-"})


def parse_expr(text: str) -> Expr:
    """Parse expression text.

    Precedence from loosest to tightest: ``+ -``, ``* /``, unary minus,
    ``^`` (right-associative). Binary ``+ - * /`` associate to the left.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printer


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_text(e: Expr) -> str:
    """Fully parenthesized text; ``parse_expr(to_text(e))`` rebuilds ``e``."""
    if isinstance(e, Const):
        text = format_number(abs(e.value))
        return f"(-{text})" if math.copysign(1.0, e.value) < 0 and e.value != 0 else text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-{to_text(e.arg)})"
        return f"{e.op}({to_text(e.arg)})"
    if isinstance(e, Binary):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Structure queries and rewriting


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Unary):
        return free_vars(e.arg)
    if isinstance(e, Binary):
        return free_vars(e.left) | free_vars(e.right)
    return frozenset()


def substitute(e: Expr, subs: Mapping[str, ExprLike]) -> Expr:
    """Replace every named variable simultaneously; no simplification."""
    table = {name: as_expr(value) for name, value in subs.items()}

    def walk(node: Expr) -> Expr:
        if isinstance(node, Var):
            return table.get(node.name, node)
        if isinstance(node, Unary):
            return Unary(node.op, walk(node.arg))
        if isinstance(node, Binary):
            return Binary(node.op, walk(node.left), walk(node.right))
        return node

    return walk(e) if table else e


def differentiate(e: Expr, var: str) -> Expr:
    """Partial derivative of ``e`` with respect to ``var``."""
    if not is_identifier(var):
        raise ExprError(f"invalid variable name {var!r}")
    return _diff(e, var)


def _diff(e: Expr, x: str) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == x else ZERO
    if isinstance(e, Unary):
        u = e.arg
        du = _diff(u, x)
        if is_const(du, 0.0):
            return ZERO
        if e.op == "neg":
            return neg(du)
        if e.op == "sin":
            return mul(Unary("cos", u), du)
        if e.op == "cos":
            return mul(neg(Unary("sin", u)), du)
        if e.op == "exp":
            return mul(Unary("exp", u), du)
        if e.op == "log":
            return div(du, u)
        if e.op == "sqrt":
            return div(du, mul(Const(2.0), Unary("sqrt", u)))
        raise ExprError(f"no derivative rule for {e.op!r}")
    if isinstance(e, Binary):
        u, v = e.left, e.right
        du, dv = _diff(u, x), _diff(v, x)
        if e.op == "+":
            return add(du, dv)
        if e.op == "-":
            return sub(du, dv)
        if e.op == "*":
            return add(mul(du, v), mul(u, dv))
        if e.op == "/":
            return div(sub(mul(du, v), mul(u, dv)), power(v, Const(2.0)))
        if e.op == "^":
            if is_const(dv, 0.0):
                if is_const(du, 0.0):
                    return ZERO
                return mul(mul(v, power(u, sub(v, ONE))), du)
            if is_const(du, 0.0):
                return mul(mul(e, Unary("log", u)), dv)
            return mul(e, add(mul(dv, Unary("log", u)), div(mul(v, du), u)))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation


_MATH: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}


def _walk_eval(e: Expr, b: Bindings) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(b[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    try:
        if isinstance(e, Unary):
            a = _walk_eval(e.arg, b)
            value = -a if e.op == "neg" else _MATH[e.op](a)
        else:
            left, right = _walk_eval(e.left, b), _walk_eval(e.right, b)
            if e.op == "+":
                value = left + right
            elif e.op == "-":
                value = left - right
            elif e.op == "*":
                value = left * right
            elif e.op == "/":
                value = left / right
            else:
                value = math.pow(left, right)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise NonFiniteError(e, f"domain error ({exc})") from None
    if not math.isfinite(value):
        raise NonFiniteError(e)
    return value


def evaluate(e: Expr, b: Bindings) -> float:
    """Evaluate in double precision; raises on unbound names or non-finite values."""
    return _walk_eval(e, b)


_PY_BINARY = {"+": "+", "-": "-", "*": "*", "/": "/"}


def _codegen(e: Expr, names: dict[str, str]) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        if e.name not in names:
            names[e.name] = f"_v{len(names)}"
        return names[e.name]
    if isinstance(e, Unary):
        inner = _codegen(e.arg, names)
        return f"(-{inner})" if e.op == "neg" else f"_{e.op}({inner})"
    left, right = _codegen(e.left, names), _codegen(e.right, names)
    if e.op == "^":
        return f"_pow({left}, {right})"
    return f"({left} {_PY_BINARY[e.op]} {right})"


_NAMESPACE = {f"_{k}": v for k, v in _MATH.items()} | {"_pow": math.pow}


@lru_cache(maxsize=8192)
def compile_expr(e: Expr) -> Callable[[Bindings], float]:
    """Return a fast evaluator with the same contract as :func:`evaluate`.

    Errors are re-diagnosed with the tree walker so the offending
    subexpression is still reported.
    """
    names: dict[str, str] = {}
    try:
        body = _codegen(e, names)
        loads = "".join(f"    {local} = _b[{name!r}]\n" for name, local in names.items())
        src = f"def _f(_b):\n{loads}    return {body}\n"
        scope = dict(_NAMESPACE)
        exec(compile(src, "<expr>", "exec"), scope)
        fast = scope["_f"]
    except (RecursionError, MemoryError, SyntaxError):
        return lambda b: _walk_eval(e, b)

    def run(b: Bindings) -> float:
        try:
            value = fast(b)
        except (KeyError, ValueError, ZeroDivisionError, OverflowError, TypeError):
            return _walk_eval(e, b)
        if not math.isfinite(value):
            return _walk_eval(e, b)
        return value

    return run
