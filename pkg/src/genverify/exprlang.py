"""Scalar expression language for scenario manifests.

Grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ['^' exponent]
    atom    := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
    exponent:= ['-'] NUMBER

Variables are x1..xn (1-indexed).  '^' binds tighter than unary minus
and its exponent must be a numeric literal.  There is no implicit
multiplication.  Functions: exp, log, sin, cos, sqrt.

Parsed trees are immutable and evaluate against either plain floats or
``Jet2`` values; the jets module supplies both code paths.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import jets

__all__ = ["Expr", "Num", "Var", "Neg", "BinOp", "Call", "Pow", "ParseError", "EvalError", "parse", "evaluate", "pretty"]

_FUNCS = ("exp", "log", "sin", "cos", "sqrt")


class ParseError(ValueError):
    """Syntax or validation error, carrying the byte offset in the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(ArithmeticError):
    """Numeric domain error during evaluation, carrying the environment."""

    def __init__(self, message: str, point=None):
        if point is not None:
            message = f"{message} at point {point}"
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 0-based; prints as x{index+1}


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


Expr = Union[Num, Var, Neg, BinOp, Call, Pow]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Tokenizer:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0
        self.tok = None  # (kind, text, offset)
        self._advance()

    def _advance(self):
        m = _TOKEN_RE.match(self.src, self.pos)
        if m is None:
            rest = self.src[self.pos :]
            if rest.strip() == "":
                self.tok = ("end", "", len(self.src))
                self.pos = len(self.src)
                return
            bad = self.pos + len(rest) - len(rest.lstrip())
            raise ParseError(f"unexpected character {self.src[bad]!r}", bad)
        self.pos = m.end()
        for kind in ("num", "ident", "op"):
            text = m.group(kind)
            if text is not None:
                self.tok = (kind, text, m.start(kind))
                return

    def peek(self):
        return self.tok

    def take(self):
        t = self.tok
        self._advance()
        return t


def parse(src: str, n: int) -> Expr:
    """Parse an expression over variables x1..xn."""
    tz = _Tokenizer(src)
    e = _parse_expr(tz, n)
    kind, text, off = tz.peek()
    if kind != "end":
        raise ParseError(f"unexpected token {text!r}", off)
    return e


def _parse_expr(tz: _Tokenizer, n: int) -> Expr:
    e = _parse_term(tz, n)
    while tz.peek()[0] == "op" and tz.peek()[1] in "+-":
        op = tz.take()[1]
        e = BinOp(op, e, _parse_term(tz, n))
    return e


def _parse_term(tz: _Tokenizer, n: int) -> Expr:
    e = _parse_unary(tz, n)
    while tz.peek()[0] == "op" and tz.peek()[1] in "*/":
        op = tz.take()[1]
        e = BinOp(op, e, _parse_unary(tz, n))
    return e


def _parse_unary(tz: _Tokenizer, n: int) -> Expr:
    kind, text, off = tz.peek()
    if kind == "op" and text == "-":
        tz.take()
        return Neg(_parse_unary(tz, n))
    return _parse_power(tz, n)


def _parse_power(tz: _Tokenizer, n: int) -> Expr:
    base = _parse_atom(tz, n)
    kind, text, off = tz.peek()
    if kind == "op" and text == "^":
        tz.take()
        return Pow(base, _parse_exponent(tz))
    return base


def _parse_exponent(tz: _Tokenizer) -> float:
    sign = 1.0
    kind, text, off = tz.peek()
    if kind == "op" and text == "-":
        tz.take()
        sign = -1.0
        kind, text, off = tz.peek()
    if kind != "num":
        raise ParseError("exponent must be a numeric literal", off)
    tz.take()
    nxt = tz.peek()
    if nxt[0] == "op" and nxt[1] == "^":
        raise ParseError("exponent must be a numeric literal", nxt[2])
    return sign * float(text)


def _parse_atom(tz: _Tokenizer, n: int) -> Expr:
    kind, text, off = tz.take()
    if kind == "num":
        return Num(float(text))
    if kind == "ident":
        if text in _FUNCS:
            k, t, o = tz.take()
            if not (k == "op" and t == "("):
                raise ParseError(f"expected '(' after {text}", o)
            arg = _parse_expr(tz, n)
            k, t, o = tz.take()
            if not (k == "op" and t == ")"):
                raise ParseError("expected ')'", o)
            return Call(text, arg)
        m = re.fullmatch(r"x([1-9]\d*)", text)
        if m is None:
            raise ParseError(f"unknown identifier {text!r}", off)
        idx = int(m.group(1))
        if idx > n:
            raise ParseError(f"variable x{idx} out of range for dimension {n}", off)
        return Var(idx - 1)
    if kind == "op" and text == "(":
        e = _parse_expr(tz, n)
        k, t, o = tz.take()
        if not (k == "op" and t == ")"):
            raise ParseError("expected ')'", o)
        return e
    raise ParseError(f"unexpected token {text!r}", off)


def evaluate(e: Expr, env):
    """Evaluate against a sequence of floats or Jet2 values (length n)."""
    try:
        return _eval(e, env)
    except jets.JetDomainError as err:
        point = [v.value if isinstance(v, jets.Jet2) else float(v) for v in env]
        raise EvalError(str(err), point) from err


def _eval(e: Expr, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.index]
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, BinOp):
        a = _eval(e.lhs, env)
        b = _eval(e.rhs, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if isinstance(b, float) and b == 0.0:
            raise jets.JetDomainError("division by zero")
        return a / b
    if isinstance(e, Call):
        return getattr(jets, e.func)(_eval(e.arg, env))
    if isinstance(e, Pow):
        return jets.pow_const(_eval(e.base, env), e.exponent)
    raise TypeError(f"not an expression node: {e!r}")


def _fmt_num(v: float) -> str:
    return repr(v) if v != int(v) else str(int(v))


def pretty(e: Expr) -> str:
    """Render to a string that reparses to a structurally identical tree."""
    return _pretty(e, 0)


# precedence levels: 0 add, 1 mul, 2 unary, 3 power, 4 atom
def _pretty(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return f"({s})" if e.value < 0 and ctx >= 2 else s
    if isinstance(e, Var):
        return f"x{e.index + 1}"
    if isinstance(e, Call):
        return f"{e.func}({_pretty(e.arg, 0)})"
    if isinstance(e, Neg):
        s = "-" + _pretty(e.arg, 2)
        return f"({s})" if ctx > 2 else s
    if isinstance(e, Pow):
        exp = _fmt_num(e.exponent) if e.exponent >= 0 else f"-{_fmt_num(-e.exponent)}"
        s = f"{_pretty(e.base, 4)}^{exp}"
        return f"({s})" if ctx > 3 else s
    if isinstance(e, BinOp):
        level = 0 if e.op in "+-" else 1
        lhs = _pretty(e.lhs, level)
        rhs = _pretty(e.rhs, level + 1)
        s = f"{lhs} {e.op} {rhs}"
        return f"({s})" if ctx > level else s
    raise TypeError(f"not an expression node: {e!r}")
