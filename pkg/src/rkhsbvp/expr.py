"""Small arithmetic expression language for coefficients and right-hand sides.

Expressions are built over the variables ``x`` and ``u`` (the unknown, for
nonlinear right-hand sides), numeric literals, ``+ - * / ^``, unary minus and
the functions ``exp``, ``ln``, ``sin``, ``cos``, ``sqrt``.

>>> e = parse_expression("exp(-x)*u^2")
>>> eval_expression(e, 0.0, 2.0)
4.0
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Expr",
    "ExpressionSyntaxError",
    "ExpressionDomainError",
    "parse_expression",
    "eval_expression",
    "to_string",
    "references",
]

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")
VARIABLES = ("x", "u")


class ExpressionSyntaxError(ValueError):
    """Raised for malformed input; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExpressionDomainError(ArithmeticError):
    """Raised when an expression is evaluated outside its domain."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


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
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary (('*'|'/') unary)*
    # unary  := '-' unary | '+' unary | power
    # power  := atom ('^' unary)?        right-associative
    # atom   := number | name | name '(' expr ')' | '(' expr ')'

    def __init__(self, text: str, aliases: Mapping[str, str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.aliases = aliases

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.advance()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {text!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        if kind == "op" and text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            name = self.aliases.get(text, text)
            if name not in VARIABLES:
                raise ExpressionSyntaxError(f"unknown identifier {text!r}", pos)
            return Var(name)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {found}", pos)


def parse_expression(text: str, aliases: Mapping[str, str] | None = None) -> Expr:
    """Parse ``text`` into an expression tree.

    ``aliases`` renames identifiers before lookup, e.g. ``{"y": "u"}`` so a
    right-hand side can be written in terms of ``y``.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return _Parser(text, aliases or {}).parse()


def references(e: Expr, name: str) -> bool:
    """Whether variable ``name`` occurs anywhere in ``e``."""
    if isinstance(e, Var):
        return e.name == name
    if isinstance(e, Num):
        return False
    if isinstance(e, Neg):
        return references(e.operand, name)
    if isinstance(e, Call):
        return references(e.arg, name)
    return references(e.left, name) or references(e.right, name)


def _check(cond, message):
    if np.any(cond):
        raise ExpressionDomainError(message)


def _eval(e: Expr, x, u):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name == "x":
            return x
        if u is None:
            raise ExpressionDomainError("expression references u but no value was bound")
        return u
    if isinstance(e, Neg):
        return -_eval(e.operand, x, u)
    if isinstance(e, Call):
        a = _eval(e.arg, x, u)
        if e.func == "ln":
            _check(np.asarray(a) <= 0, "ln of a nonpositive argument")
            return np.log(a)
        if e.func == "sqrt":
            _check(np.asarray(a) < 0, "sqrt of a negative argument")
            return np.sqrt(a)
        return getattr(np, e.func)(a)
    left = _eval(e.left, x, u)
    right = _eval(e.right, x, u)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if e.op == "/":
        _check(np.asarray(right) == 0, "division by zero")
        return left / right
    with np.errstate(all="ignore"):
        out = np.power(np.asarray(left, dtype=float), right)
    _check(~np.isfinite(out) & np.isfinite(left) & np.isfinite(right), "invalid power")
    return out


def eval_expression(e: Expr, x, u=None):
    """Evaluate ``e`` at ``x`` (and ``u``); scalars in, float out, arrays broadcast.

    Raises :class:`ExpressionDomainError` for ln/sqrt outside their domain,
    division by zero, or a missing ``u`` binding.
    """
    with np.errstate(over="ignore"):
        out = _eval(e, x, u)
    if np.ndim(out) == 0 and np.ndim(x) == 0 and np.ndim(u) == 0:
        return float(out)
    shape = np.broadcast_shapes(np.shape(x), np.shape(u) if u is not None else ())
    return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_string(e: Expr) -> str:
    """Pretty-print with the minimal parentheses needed to re-parse to ``e``."""

    def go(node: Expr, parent: int, right_side: bool = False, op: str = "") -> str:
        if isinstance(node, Num):
            s, prec = _fmt_num(node.value), 5
            if node.value < 0 or math.copysign(1.0, node.value) < 0:
                s, prec = "(" + s + ")", 5
        elif isinstance(node, Var):
            s, prec = node.name, 5
        elif isinstance(node, Call):
            s, prec = f"{node.func}({go(node.arg, 0)})", 5
        elif isinstance(node, Neg):
            prec = _PREC["neg"]
            s = "-" + go(node.operand, prec)
        else:
            prec = _PREC[node.op]
            if node.op == "^":
                # base binds tighter than '^'; exponent is a unary operand
                s = go(node.left, prec + 1) + "^" + go(node.right, _PREC["neg"])
            else:
                left = go(node.left, prec)
                right = go(node.right, prec + 1)
                s = f"{left} {node.op} {right}"
        if prec < parent:
            return "(" + s + ")"
        return s

    return go(e, 0)
