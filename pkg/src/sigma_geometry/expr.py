"""A small arithmetic-expression language for metric components.

Grammar (left-associative except ``^``, which is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?
    unary  := '-'? atom
    atom   := number | ident '(' expr ')' | var | '(' expr ')'
    var    := 'x' digit+

Variables are 1-based (``x1`` is the first coordinate).  Evaluation is
vectorised: ``evaluate(e, x)`` accepts ``x`` of shape ``(..., dim)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalError, ExprSyntaxError, UnknownFunction, VariableOutOfRange

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str, dim: int):
        self.src = src
        self.dim = dim
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, pos = self.take()
        if value != text or kind != "op":
            found = value or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", pos, self.src)

    def parse(self) -> Expr:
        e = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", pos, self.src)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.factor())
        return left

    def factor(self) -> Expr:
        base = self.unary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> Expr:
        kind, value, pos = self.take()
        if kind == "num":
            return Num(float(value))
        if kind == "ident":
            var = re.fullmatch(r"x(\d+)", value)
            if var:
                idx = int(var.group(1))
                if idx < 1 or idx > self.dim:
                    raise VariableOutOfRange(
                        f"variable {value} outside x1..x{self.dim}", pos, self.src
                    )
                return Var(idx)
            if value not in FUNCTIONS:
                raise UnknownFunction(f"unknown function {value!r}", pos, self.src)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(value, arg)
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = value or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", pos, self.src)


def parse(src: str, dim: int) -> Expr:
    if dim < 1:
        raise ValueError("dim must be positive")
    return _Parser(src, dim).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def to_source(e: Expr) -> str:
    """Canonical text form; ``parse(to_source(e))`` reproduces ``e``."""
    return _show(e, 0)


def _show(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        text = repr(float(e.value))
        if text.startswith("-") or text in ("inf", "nan"):
            raise ValueError(f"constant {e.value!r} has no source form")
        return text
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Call):
        return f"{e.name}({_show(e.arg, 0)})"
    if isinstance(e, Neg):
        return "-" + _atom(e.operand)
    prec = _PREC[e.op]
    if e.op == "^":
        text = f"{_unary(e.left)}^{_show(e.right, prec)}"
    else:
        # left-associative: the right operand needs parentheses at equal precedence
        text = f"{_show(e.left, prec)}{e.op}{_show(e.right, prec + 1)}"
    return f"({text})" if prec < ctx else text


def _atom(e: Expr) -> str:
    if isinstance(e, (Num, Var, Call)):
        return _show(e, 0)
    return f"({_show(e, 0)})"


def _unary(e: Expr) -> str:
    if isinstance(e, Neg):
        return _show(e, 0)
    return _atom(e)


def variables(e: Expr) -> set[int]:
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Call)):
        return variables(e.operand if isinstance(e, Neg) else e.arg)
    return variables(e.left) | variables(e.right)


def _first_bad(mask, *arrays):
    idx = np.argwhere(np.atleast_1d(mask))[0]
    return tuple(float(np.atleast_1d(a)[tuple(idx)]) if np.ndim(a) else float(a) for a in arrays)


def evaluate(e: Expr, x) -> np.ndarray | float:
    """Evaluate at coordinates ``x`` (shape ``(..., dim)``); raises EvalError on domain errors."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(e, x)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _eval(e: Expr, x: np.ndarray):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if x.shape[-1] < e.index:
            raise EvalError("x", (e.index,), f"point has only {x.shape[-1]} coordinates")
        return x[..., e.index - 1]
    if isinstance(e, Neg):
        return -_eval(e.operand, x)
    if isinstance(e, Call):
        a = _eval(e.arg, x)
        if e.name == "sqrt":
            bad = np.asarray(a) < 0
            if np.any(bad):
                raise EvalError("sqrt", _first_bad(bad, a), "negative argument")
            return np.sqrt(a)
        out = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}[e.name](a)
        bad = ~np.isfinite(out)
        if np.any(bad):
            raise EvalError(e.name, _first_bad(bad, a), "non-finite result")
        return out
    a = _eval(e.left, x)
    b = _eval(e.right, x)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        bad = np.asarray(b) == 0
        if np.any(bad):
            raise EvalError("/", _first_bad(bad, a, b), "division by zero")
        return a / b
    out = np.power(np.asarray(a, dtype=float), b)
    bad = ~np.isfinite(out)
    if np.any(bad):
        raise EvalError("^", _first_bad(bad, a, b), "undefined power")
    return out
