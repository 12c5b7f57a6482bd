"""Small arithmetic expression language for potential strings.

Grammar (whitespace is ignored)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom (('^' | '**') unary)?
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus and is right associative, so
``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^9``.

Names resolve, in order, to: functions (``exp``, ``abs``, ``log``, ``sqrt``),
the constants ``pi`` and ``e``, and finally to variables supplied at
evaluation time (coordinates ``x``, ``x1..xn``, ``y``, ``y1..yk``, the model
potential ``f``, the scale ``tau`` and any free parameters such as ``theta``).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import ExpressionError

FUNCTIONS: dict[str, Callable] = {
    "exp": np.exp,
    "abs": np.abs,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


def tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"unexpected character {text[pos:].lstrip()[:1]!r} at offset {pos}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    tokens.append(("end", ""))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val = self.take()
        if val != value:
            got = val if kind != "end" else "end of input"
            raise ExpressionError(f"expected {value!r}, got {got!r} in {self.text!r}")

    def parse(self):
        if self.peek()[0] == "end":
            raise ExpressionError("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExpressionError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            return Unary(op, self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise ExpressionError(f"unknown function {val!r}")
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in FUNCTIONS:
                raise ExpressionError(f"function {val!r} needs an argument")
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            return Var(val)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        got = val if kind != "end" else "end of input"
        raise ExpressionError(f"unexpected {got!r} in {self.text!r}")


def parse(text: str):
    """Parse ``text`` into an expression tree."""
    if not isinstance(text, str):
        raise ExpressionError("expression must be a string")
    return _Parser(text).parse()


def variables(node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Call):
        return variables(node.arg)
    if isinstance(node, Unary):
        return variables(node.operand)
    return variables(node.left) | variables(node.right)


def evaluate(node, env: Mapping[str, object]):
    """Evaluate a tree with numpy broadcasting over the values in ``env``."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise ExpressionError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Call):
        return FUNCTIONS[node.func](evaluate(node.arg, env))
    if isinstance(node, Unary):
        val = evaluate(node.operand, env)
        return -val if node.op == "-" else val
    a = evaluate(node.left, env)
    b = evaluate(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


def to_string(node) -> str:
    """Canonical fully parenthesized rendering (used for digests)."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Unary):
        return f"({node.op}{to_string(node.operand)})"
    return f"({to_string(node.left)}{node.op}{to_string(node.right)})"
