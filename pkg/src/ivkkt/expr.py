"""Scalar expression language for objectives and constraints.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" factor)?
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Functions: ``ln``, ``exp``, ``sqrt``, ``abs``. ``^`` binds tighter than unary
minus and is right-associative, so ``-x^2 == -(x^2)`` and ``2^3^2 == 512``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

FUNCTIONS = ("ln", "exp", "sqrt", "abs")


class ExprSyntaxError(ValueError):
    """Raised by :func:`parse`; ``offset`` is the byte offset into the source."""

    def __init__(self, message: str, offset: int, source: str = ""):
        self.message = message
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class EvalError(ArithmeticError):
    """Domain or binding failure during evaluation."""

    def __init__(self, message: str, subexpr: str = ""):
        self.subexpr = subexpr
        super().__init__(f"{message} in '{subexpr}'" if subexpr else message)


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Union[Const, Var, Neg, BinOp, Call]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int


def tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    raw = src.encode("utf-8")
    # offsets are reported in bytes; map char index -> byte index lazily
    def byte_at(i: int) -> int:
        return len(src[:i].encode("utf-8")) if not src.isascii() else i

    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m or m.end() == pos:
            if src[pos:].strip() == "":
                break
            start = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[start]!r}", byte_at(start), src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), byte_at(start)))
        pos = m.end()
    tokens.append(_Token("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _fail(self, expected: str) -> None:
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"expected {expected}, found {found}", t.offset, self.src)

    def _expect(self, text: str) -> None:
        if self.tok.kind == "op" and self.tok.text == text:
            self._advance()
        else:
            self._fail(repr(text))

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            self._fail("an expression")
        node = self.expr()
        if self.tok.kind != "end":
            self._fail("an operator or end of input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self._advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self._advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self._advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self._advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self._advance()
            return Const(float(t.text))
        if t.kind == "ident":
            self._advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise ExprSyntaxError(
                        f"unknown function {t.text!r} (known: {', '.join(FUNCTIONS)})", t.offset, self.src
                    )
                self._advance()
                arg = self.expr()
                self._expect(")")
                return Call(t.text, arg)
            if t.text in FUNCTIONS:
                self._fail(f"'(' after function {t.text!r}")
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        self._fail("a number, name or '('")
        raise AssertionError("unreachable")


def parse(src: str) -> Expr:
    return _Parser(src).parse()


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, (Neg, Call)):
        return free_vars(e.arg)
    return free_vars(e.left) | free_vars(e.right)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(e: Expr) -> str:
    """Print ``e`` back to source text that parses to an equivalent tree."""
    return _print(e, 0)


def _print(e: Expr, ctx: int) -> str:
    if isinstance(e, Const):
        s = repr(e.value)
        return f"({s})" if e.value < 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({_print(e.arg, 0)})"
    if isinstance(e, Neg):
        s = "-" + _print(e.arg, _PREC["neg"])
        return f"({s})" if ctx > _PREC["neg"] else s
    prec = _PREC[e.op]
    if e.op == "^":
        # right-associative; exponent is a factor, base must be an atom
        s = f"{_print(e.left, prec + 1)}^{_print(e.right, _PREC['neg'])}"
    else:
        s = f"{_print(e.left, prec)} {e.op} {_print(e.right, prec + 1)}"
    return f"({s})" if ctx > prec else s


def _fail(msg: str, node: Expr):
    raise EvalError(msg, to_source(node))


def _scalar_ln(x: float, node: Expr) -> float:
    if x <= 0.0:
        _fail(f"ln of non-positive value {x:.6g}", node)
    return math.log(x)


def _scalar_sqrt(x: float, node: Expr) -> float:
    if x < 0.0:
        _fail(f"sqrt of negative value {x:.6g}", node)
    return math.sqrt(x)


def _scalar_exp(x: float, node: Expr) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        _fail(f"exp overflow at {x:.6g}", node)


_SCALAR_FN = {"ln": _scalar_ln, "sqrt": _scalar_sqrt, "exp": _scalar_exp, "abs": lambda x, node: abs(x)}

Compiled = Callable[[Mapping[str, float]], float]


def compile_scalar(e: Expr) -> Compiled:
    """Compile ``e`` to a closure ``env -> float`` with strict domain checks."""
    if isinstance(e, Const):
        v = e.value
        return lambda env: v
    if isinstance(e, Var):
        name = e.name

        def var(env):
            try:
                return env[name]
            except KeyError:
                raise EvalError(f"unbound variable {name!r}", name) from None

        return var
    if isinstance(e, Neg):
        f = compile_scalar(e.arg)
        return lambda env: -f(env)
    if isinstance(e, Call):
        f = compile_scalar(e.arg)
        fn = _SCALAR_FN[e.fn]
        return lambda env: fn(f(env), e)
    a = compile_scalar(e.left)
    b = compile_scalar(e.right)
    if e.op == "+":
        return lambda env: a(env) + b(env)
    if e.op == "-":
        return lambda env: a(env) - b(env)
    if e.op == "*":
        return lambda env: a(env) * b(env)
    if e.op == "/":

        def div(env):
            den = b(env)
            if den == 0.0:
                _fail("division by zero", e)
            return a(env) / den

        return div

    def pw(env):
        x, y = a(env), b(env)
        try:
            return math.pow(x, y)
        except (ValueError, ZeroDivisionError):
            _fail(f"power {x:.6g}^{y:.6g} undefined", e)
        except OverflowError:
            _fail(f"power {x:.6g}^{y:.6g} overflows", e)

    return pw


def evaluate(e: Expr, env: Mapping[str, float]) -> float:
    """Evaluate ``e`` at ``env``; raises :class:`EvalError` on domain errors."""
    value = compile_scalar(e)(env)
    if not math.isfinite(value):
        raise EvalError("non-finite result", to_source(e))
    return value


_ARRAY_FN = {
    "ln": lambda x: np.log(np.where(x > 0, x, np.nan)),
    "sqrt": lambda x: np.sqrt(np.where(x >= 0, x, np.nan)),
    "exp": np.exp,
    "abs": np.abs,
}


def compile_array(e: Expr) -> Callable[[Mapping[str, np.ndarray]], np.ndarray]:
    """Vectorized evaluation; domain errors become NaN instead of raising."""
    if isinstance(e, Const):
        v = e.value
        return lambda env: v
    if isinstance(e, Var):
        name = e.name
        return lambda env: env[name]
    if isinstance(e, Neg):
        f = compile_array(e.arg)
        return lambda env: -f(env)
    if isinstance(e, Call):
        f = compile_array(e.arg)
        fn = _ARRAY_FN[e.fn]
        return lambda env: fn(f(env))
    a = compile_array(e.left)
    b = compile_array(e.right)
    op = {
        "+": np.add,
        "-": np.subtract,
        "*": np.multiply,
        "/": lambda x, y: np.divide(x, np.where(y == 0, np.nan, y)),
        "^": np.power,
    }[e.op]
    return lambda env: op(a(env), b(env))


def evaluate_array(e: Expr, env: Mapping[str, np.ndarray], size: int) -> np.ndarray:
    """Evaluate over arrays of length ``size``; non-finite entries become NaN."""
    with np.errstate(all="ignore"):
        out = np.asarray(compile_array(e)(env), dtype=float)
    out = np.broadcast_to(out, (size,)).copy()
    out[~np.isfinite(out)] = np.nan
    return out


def constant_value(src: str) -> float:
    """Evaluate a variable-free expression such as ``exp(2)`` or ``-0.5``."""
    e = parse(src)
    if free_vars(e):
        raise EvalError(f"constant expected, found variables {sorted(free_vars(e))}", src)
    return evaluate(e, {})
