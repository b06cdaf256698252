"""Expression trees for real-valued functions of one variable.

Parsing, domain-aware evaluation, symbolic differentiation, light
simplification and round-trip formatting.  Evaluation follows real-analysis
semantics with the signed-root convention: a power whose exponent is a
syntactic fraction p/q (integers, q odd after reduction) is defined for
negative bases as sign(b)^p * |b|^(p/q).  A decimal exponent that merely
*equals* such a fraction does not qualify.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

__all__ = [
    "Constant",
    "Variable",
    "Unary",
    "Binary",
    "Expression",
    "DomainFault",
    "EvalResult",
    "ParseError",
    "parse",
    "evaluate",
    "compile_expression",
    "differentiate",
    "simplify",
    "format_expression",
    "LOG_OF_ZERO",
    "EVEN_ROOT_OF_NEGATIVE",
    "DIVISION_BY_ZERO",
    "IRRATIONAL_POWER_OF_NEGATIVE",
    "NONFINITE",
]

UNARY_OPS = frozenset({"neg", "abs", "sqrt", "cbrt", "exp", "ln", "sin", "cos", "tan"})
BINARY_OPS = frozenset({"add", "sub", "mul", "div", "pow"})
FUNCTION_NAMES = ("abs", "sqrt", "cbrt", "exp", "ln", "sin", "cos", "tan")


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Variable:
    pass


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expression"
    right: "Expression"


Expression = Union[Constant, Variable, Unary, Binary]

# Fault kinds.  Faults are values, not exceptions: the iteration engine
# classifies them, so evaluation never raises on finite input.
LOG_OF_ZERO = "log-of-zero"
EVEN_ROOT_OF_NEGATIVE = "even-root-of-negative"
DIVISION_BY_ZERO = "division-by-zero"
IRRATIONAL_POWER_OF_NEGATIVE = "irrational-power-of-negative"
NONFINITE = "nonfinite"


@dataclass(frozen=True)
class DomainFault:
    kind: str


EvalResult = Union[float, DomainFault]


class _FaultSignal(Exception):
    """Internal control flow for evaluation faults."""

    def __init__(self, fault: DomainFault):
        super().__init__(fault.kind)
        self.fault = fault


class ParseError(ValueError):
    """Malformed expression text; carries byte offset and expected tokens."""

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)
        self.offset = offset
        self.expected = expected


# ---------------------------------------------------------------------------
# Tokenizer / parser
#
# Grammar (whitespace-insensitive):
#   expr  := term (("+"|"-") term)*
#   term  := unary (("*"|"/") unary)*
#   unary := "-" unary | power
#   power := atom ("^" unary)?
#   atom  := NUMBER | "x" | "e" | "pi" | FUNC "(" expr ")" | "(" expr ")"
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(
                f"unexpected character {text[i]!r}", _byte_offset(text, i)
            )
        kind = m.lastgroup or "op"
        tokens.append((kind, m.group(), _byte_offset(text, i)))
        i = m.end()
    tokens.append(("end", "", _byte_offset(text, n)))
    return tokens


_ATOM_EXPECTED = ("number", "'x'", "'e'", "'pi'", "function name", "'('")


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, symbol: str) -> None:
        kind, text, off = self.peek()
        if kind == "op" and text == symbol:
            self.advance()
            return
        raise ParseError(f"unexpected token {text or 'end of input'!r}", off, (f"'{symbol}'",))

    def parse_expr(self) -> Expression:
        node = self.parse_term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.parse_term()
                node = Binary("add" if text == "+" else "sub", node, rhs)
            else:
                return node

    def parse_term(self) -> Expression:
        node = self.parse_unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.parse_unary()
                node = Binary("mul" if text == "*" else "div", node, rhs)
            else:
                return node

    def parse_unary(self) -> Expression:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Unary("neg", self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expression:
        base = self.parse_atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return Binary("pow", base, self.parse_unary())
        return base

    def parse_atom(self) -> Expression:
        kind, text, off = self.advance()
        if kind == "num":
            return Constant(float(text))
        if kind == "ident":
            if text == "x":
                return Variable()
            if text == "e":
                return Constant(math.e)
            if text == "pi":
                return Constant(math.pi)
            if text in FUNCTION_NAMES:
                self.expect_op("(")
                inner = self.parse_expr()
                self.expect_op(")")
                return Unary("ln" if text == "ln" else text, inner)
            raise ParseError(f"unknown identifier {text!r}", off, _ATOM_EXPECTED)
        if kind == "op" and text == "(":
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        raise ParseError(
            f"unexpected token {text or 'end of input'!r}", off, _ATOM_EXPECTED
        )


def parse(text: str) -> Expression:
    """Parse expression text into an AST.

    Raises ParseError (with byte offset and expected-token set) on malformed
    input.
    """
    try:
        parser = _Parser(text)
        node = parser.parse_expr()
    except RecursionError:
        raise ParseError("expression is nested too deeply", 0) from None
    kind, tok_text, off = parser.peek()
    if kind != "end":
        raise ParseError(
            f"unexpected token {tok_text!r}", off, ("operator", "end of input")
        )
    return node


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _literal_int(node: Expression) -> int | None:
    neg = False
    while isinstance(node, Unary) and node.op == "neg":
        neg = not neg
        node = node.child
    if isinstance(node, Constant) and math.isfinite(node.value) and node.value.is_integer():
        v = int(node.value)
        return -v if neg else v
    return None


def literal_rational(node: Expression) -> Fraction | None:
    """Syntactic rational exponent: an optionally negated integer literal or
    integer/integer fraction.  Anything else (including decimal literals that
    happen to equal p/q) returns None."""
    neg = False
    while isinstance(node, Unary) and node.op == "neg":
        neg = not neg
        node = node.child
    value: Fraction | None = None
    if isinstance(node, Constant):
        i = _literal_int(node)
        if i is not None:
            value = Fraction(i)
    elif isinstance(node, Binary) and node.op == "div":
        num = _literal_int(node.left)
        den = _literal_int(node.right)
        if num is not None and den is not None and den != 0:
            value = Fraction(num, den)
    if value is None:
        return None
    return -value if neg else value


def _ensure_finite(v: float) -> float:
    if math.isfinite(v):
        return v
    raise _FaultSignal(DomainFault(NONFINITE))


def _pow_checked(b: float, e: float) -> float:
    try:
        return _ensure_finite(math.pow(b, e))
    except (OverflowError, ValueError):
        raise _FaultSignal(DomainFault(NONFINITE)) from None


if hasattr(math, "cbrt"):
    _cbrt = math.cbrt
else:  # pragma: no cover - for Python < 3.11
    def _cbrt(v: float) -> float:
        return math.copysign(abs(v) ** (1.0 / 3.0), v)


def _compile(node: Expression) -> Callable[[float], float]:
    if isinstance(node, Constant):
        v = node.value
        if not math.isfinite(v):
            def _bad_constant(x: float) -> float:
                raise _FaultSignal(DomainFault(NONFINITE))

            return _bad_constant
        return lambda x: v

    if isinstance(node, Variable):
        return lambda x: x

    if isinstance(node, Unary):
        child = _compile(node.child)
        op = node.op
        if op == "neg":
            return lambda x: -child(x)
        if op == "abs":
            return lambda x: abs(child(x))
        if op == "sqrt":
            def _sqrt(x: float) -> float:
                v = child(x)
                if v < 0.0:
                    raise _FaultSignal(DomainFault(EVEN_ROOT_OF_NEGATIVE))
                return math.sqrt(v)

            return _sqrt
        if op == "cbrt":
            return lambda x: _cbrt(child(x))
        if op == "exp":
            def _exp(x: float) -> float:
                try:
                    return math.exp(child(x))
                except OverflowError:
                    raise _FaultSignal(DomainFault(NONFINITE)) from None

            return _exp
        if op == "ln":
            def _ln(x: float) -> float:
                v = child(x)
                if v <= 0.0:
                    raise _FaultSignal(DomainFault(LOG_OF_ZERO))
                return math.log(v)

            return _ln
        if op == "sin":
            return lambda x: math.sin(child(x))
        if op == "cos":
            return lambda x: math.cos(child(x))
        if op == "tan":
            return lambda x: _ensure_finite(math.tan(child(x)))
        raise ValueError(f"unknown unary op {op!r}")

    if isinstance(node, Binary):
        op = node.op
        left = _compile(node.left)
        if op == "pow":
            return _compile_pow(node, left)
        right = _compile(node.right)
        if op == "add":
            return lambda x: _ensure_finite(left(x) + right(x))
        if op == "sub":
            return lambda x: _ensure_finite(left(x) - right(x))
        if op == "mul":
            return lambda x: _ensure_finite(left(x) * right(x))
        if op == "div":
            def _div(x: float) -> float:
                den = right(x)
                if den == 0.0:
                    raise _FaultSignal(DomainFault(DIVISION_BY_ZERO))
                return _ensure_finite(left(x) / den)

            return _div
        raise ValueError(f"unknown binary op {op!r}")

    raise TypeError(f"not an expression node: {node!r}")


def _compile_pow(node: Binary, left: Callable[[float], float]) -> Callable[[float], float]:
    rat = literal_rational(node.right)
    if rat is not None:
        try:
            e = float(rat)
        except OverflowError:
            rat = None
    if rat is not None:
        p = rat.numerator
        q = rat.denominator
        negative_result = p % 2 != 0  # sign(b)^p for odd-root bases

        def _pow_rational(x: float) -> float:
            b = left(x)
            if b == 0.0:
                if p < 0:
                    raise _FaultSignal(DomainFault(DIVISION_BY_ZERO))
                return 1.0 if p == 0 else 0.0
            if b < 0.0:
                if q % 2 == 0:
                    raise _FaultSignal(DomainFault(EVEN_ROOT_OF_NEGATIVE))
                if q == 1:
                    return _pow_checked(b, e)
                m = _pow_checked(-b, e)
                return -m if negative_result else m
            return _pow_checked(b, e)

        return _pow_rational

    right = _compile(node.right)

    def _pow_general(x: float) -> float:
        b = left(x)
        e = right(x)
        if b == 0.0:
            if e < 0.0:
                raise _FaultSignal(DomainFault(DIVISION_BY_ZERO))
            return 1.0 if e == 0.0 else 0.0
        if b < 0.0 and not e.is_integer():
            raise _FaultSignal(DomainFault(IRRATIONAL_POWER_OF_NEGATIVE))
        return _pow_checked(b, e)

    return _pow_general


@lru_cache(maxsize=512)
def compile_expression(expr: Expression) -> Callable[[float], float]:
    """Compile an AST to a callable.  The callable raises an internal fault
    signal on domain errors; prefer evaluate() unless in a hot loop that
    handles faults itself."""
    return _compile(expr)


def evaluate(expr: Expression, x: float) -> EvalResult:
    """Evaluate at a finite point, returning a finite value or a DomainFault."""
    if not math.isfinite(x):
        raise ValueError(f"evaluation point must be finite, got {x!r}")
    try:
        return compile_expression(expr)(x)
    except _FaultSignal as sig:
        return sig.fault


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def _const(v: float) -> Expression:
    # Canonical form: the parser never produces negative Constant nodes, so
    # negative values are wrapped in neg to keep format/parse round-trips
    # structural.
    if v < 0:
        return Unary("neg", Constant(-v))
    return Constant(v)


def _rational_node(f: Fraction) -> Expression:
    if f.denominator == 1:
        return _const(float(f.numerator))
    node: Expression = Binary(
        "div", Constant(float(abs(f.numerator))), Constant(float(f.denominator))
    )
    if f < 0:
        node = Unary("neg", node)
    return node


def _contains_variable(node: Expression) -> bool:
    if isinstance(node, Variable):
        return True
    if isinstance(node, Unary):
        return _contains_variable(node.child)
    if isinstance(node, Binary):
        return _contains_variable(node.left) or _contains_variable(node.right)
    return False


def differentiate(expr: Expression) -> Expression:
    """Symbolic derivative, total on the AST.

    Domain faults surface at evaluation, not here.  Constant exponents use
    the power rule with exact rational arithmetic so that signed-root
    exponents stay syntactic fractions (x^(1/3) differentiates to an
    expression evaluable on negatives); variable exponents use
    u^v * (v' ln u + v u'/u).  abs differentiates to u/abs(u).
    """
    if isinstance(expr, Constant):
        return Constant(0.0)
    if isinstance(expr, Variable):
        return Constant(1.0)
    if isinstance(expr, Unary):
        u = expr.child
        du = differentiate(u)
        op = expr.op
        if op == "neg":
            return Unary("neg", du)
        if op == "abs":
            return Binary("mul", Binary("div", u, Unary("abs", u)), du)
        if op == "sqrt":
            return Binary("div", du, Binary("mul", Constant(2.0), Unary("sqrt", u)))
        if op == "cbrt":
            return Binary(
                "div",
                du,
                Binary("mul", Constant(3.0), Binary("pow", Unary("cbrt", u), Constant(2.0))),
            )
        if op == "exp":
            return Binary("mul", Unary("exp", u), du)
        if op == "ln":
            return Binary("div", du, u)
        if op == "sin":
            return Binary("mul", Unary("cos", u), du)
        if op == "cos":
            return Unary("neg", Binary("mul", Unary("sin", u), du))
        if op == "tan":
            return Binary("div", du, Binary("pow", Unary("cos", u), Constant(2.0)))
        raise ValueError(f"unknown unary op {op!r}")
    if isinstance(expr, Binary):
        u, v = expr.left, expr.right
        op = expr.op
        if op == "add":
            return Binary("add", differentiate(u), differentiate(v))
        if op == "sub":
            return Binary("sub", differentiate(u), differentiate(v))
        if op == "mul":
            return Binary(
                "add",
                Binary("mul", differentiate(u), v),
                Binary("mul", u, differentiate(v)),
            )
        if op == "div":
            return Binary(
                "div",
                Binary(
                    "sub",
                    Binary("mul", differentiate(u), v),
                    Binary("mul", u, differentiate(v)),
                ),
                Binary("pow", v, Constant(2.0)),
            )
        if op == "pow":
            return _differentiate_pow(u, v)
        raise ValueError(f"unknown binary op {op!r}")
    raise TypeError(f"not an expression node: {expr!r}")


def _differentiate_pow(u: Expression, v: Expression) -> Expression:
    du = differentiate(u)
    if not _contains_variable(v):
        rat = literal_rational(v)
        if rat is not None:
            # v * u^(v-1) * u', keeping the shifted exponent a syntactic
            # rational so signed-root domains survive differentiation.
            coeff = _rational_node(rat)
            shifted = _rational_node(rat - 1)
            return Binary("mul", Binary("mul", coeff, Binary("pow", u, shifted)), du)
        return Binary(
            "mul",
            Binary("mul", v, Binary("pow", u, Binary("sub", v, Constant(1.0)))),
            du,
        )
    dv = differentiate(v)
    return Binary(
        "mul",
        Binary("pow", u, v),
        Binary(
            "add",
            Binary("mul", dv, Unary("ln", u)),
            Binary("mul", v, Binary("div", du, u)),
        ),
    )


# ---------------------------------------------------------------------------
# Simplification
# ---------------------------------------------------------------------------

# Node kinds that cannot fault at evaluation (short of float overflow, which
# the bounded test domains never reach).  Used to keep 0*e -> 0 from erasing
# a fault the original expression would have reported.
_TOTAL_UNARY = frozenset({"neg", "abs", "sin", "cos"})
_TOTAL_BINARY = frozenset({"add", "sub", "mul"})


def _fault_free(node: Expression) -> bool:
    if isinstance(node, Constant):
        return math.isfinite(node.value)
    if isinstance(node, Variable):
        return True
    if isinstance(node, Unary):
        return node.op in _TOTAL_UNARY and _fault_free(node.child)
    if isinstance(node, Binary):
        return node.op in _TOTAL_BINARY and _fault_free(node.left) and _fault_free(node.right)
    return False


def _is_const(node: Expression, value: float) -> bool:
    return isinstance(node, Constant) and node.value == value


def _all_constant(node: Expression) -> bool:
    return not _contains_variable(node)


def _protected_fraction(node: Expression) -> bool:
    # A syntactic p/q with q > 1 carries signed-root semantics in exponent
    # position; folding it to a decimal would change evaluation.
    rat = literal_rational(node)
    return rat is not None and rat.denominator != 1


def simplify(expr: Expression) -> Expression:
    """Constant folding and identity elimination only.

    The result evaluates identically to the input wherever the input is
    defined.  Syntactic fractions are never folded to decimals.
    """
    if isinstance(expr, Unary):
        expr = Unary(expr.op, simplify(expr.child))
    elif isinstance(expr, Binary):
        expr = Binary(expr.op, simplify(expr.left), simplify(expr.right))

    if (
        not isinstance(expr, Constant)
        and _all_constant(expr)
        and not _protected_fraction(expr)
    ):
        if not (isinstance(expr, Unary) and expr.op == "neg" and isinstance(expr.child, Constant)):
            folded = evaluate(expr, 0.0)
            if isinstance(folded, float):
                return _const(folded)

    if isinstance(expr, Binary):
        op, a, b = expr.op, expr.left, expr.right
        if op == "add":
            if _is_const(b, 0.0):
                return a
            if _is_const(a, 0.0):
                return b
        elif op == "sub":
            if _is_const(b, 0.0):
                return a
        elif op == "mul":
            if _is_const(b, 1.0):
                return a
            if _is_const(a, 1.0):
                return b
            if _is_const(a, 0.0) and _fault_free(b):
                return Constant(0.0)
            if _is_const(b, 0.0) and _fault_free(a):
                return Constant(0.0)
        elif op == "div":
            if _is_const(b, 1.0):
                return a
        elif op == "pow":
            if _is_const(b, 1.0):
                return a
    return expr


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

_PREC_ATOM = 5
_PREC_POW = 4
_PREC_NEG = 3
_PREC_MULDIV = 2
_PREC_ADDSUB = 1


def _precedence(node: Expression) -> int:
    if isinstance(node, Constant):
        return _PREC_NEG if node.value < 0 else _PREC_ATOM
    if isinstance(node, Variable):
        return _PREC_ATOM
    if isinstance(node, Unary):
        return _PREC_NEG if node.op == "neg" else _PREC_ATOM
    if node.op == "pow":
        return _PREC_POW
    if node.op in ("mul", "div"):
        return _PREC_MULDIV
    return _PREC_ADDSUB


def _format_constant(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def format_expression(expr: Expression) -> str:
    """Render to text such that parse(format_expression(e)) is structurally
    identical to e for any parser-canonical tree (non-negative constants,
    negation spelled with neg nodes)."""

    def fmt(node: Expression) -> str:
        if isinstance(node, Constant):
            return _format_constant(node.value)
        if isinstance(node, Variable):
            return "x"
        if isinstance(node, Unary):
            if node.op == "neg":
                inner = fmt(node.child)
                if _precedence(node.child) < _PREC_NEG:
                    inner = f"({inner})"
                return f"-{inner}"
            return f"{node.op}({fmt(node.child)})"
        op = node.op
        left, right = fmt(node.left), fmt(node.right)
        if op == "pow":
            if _precedence(node.left) < _PREC_ATOM:
                left = f"({left})"
            # exponents sit at unary level: neg and pow nest bare
            if _precedence(node.right) < _PREC_NEG:
                right = f"({right})"
            return f"{left}^{right}"
        if op in ("mul", "div"):
            if _precedence(node.left) < _PREC_MULDIV:
                left = f"({left})"
            if _precedence(node.right) <= _PREC_MULDIV:
                right = f"({right})"
            return f"{left}{'*' if op == 'mul' else '/'}{right}"
        if _precedence(node.right) <= _PREC_ADDSUB:
            right = f"({right})"
        return f"{left} {'+' if op == 'add' else '-'} {right}"

    return fmt(expr)
