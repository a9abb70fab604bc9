"""Parser for curve expressions like ``z/(1 - z^2)``.

Plain precedence climbing over ``+ - * / ^`` with unary minus, parentheses,
integer literals and a single free variable.  ``^`` takes integer exponents
only and binds tighter than unary minus; ``* /`` and ``+ -`` associate to
the left.  Everything evaluates into an exact rational function; rational
literals such as ``5/48`` need no special handling since ``/`` is exact.

Syntax errors carry the byte offset of the offending token.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ._rat import Q, rat_str
from .algebra import RationalFunction
from .errors import ExpressionSyntaxError, MalformedInputError

__all__ = ["parse_expression", "parse_ast", "ast_to_text", "Num", "Var", "Unary", "Binary"]


@dataclass(frozen=True)
class Num:
    value: object  # exact rational

    def __str__(self) -> str:
        return rat_str(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Unary:
    op: str
    arg: object

    def __str__(self) -> str:
        return f"(-{self.arg})"


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


Node = Union[Num, Var, Unary, Binary]


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    offset: int


def _tokenize(text: str) -> list:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


_BIN_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


class _Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ExpressionSyntaxError(f"expected {op!r}", tok.offset)
        return self.advance()

    def parse_expr(self, min_prec: int = 1) -> Node:
        node = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in _BIN_PREC:
                return node
            prec = _BIN_PREC[tok.text]
            if prec < min_prec:
                return node
            self.advance()
            rhs = self.parse_expr(prec + 1)
            node = Binary(tok.text, node, rhs)

    def parse_unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Unary("-", self.parse_unary())
        if tok.kind == "op" and tok.text == "+":
            self.advance()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exponent = self.parse_exponent()
            return Binary("^", base, exponent)
        return base

    def parse_exponent(self) -> Node:
        # integer exponents only, optionally signed or parenthesized
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            inner = self.parse_exponent()
            return Unary("-", inner)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.parse_exponent()
            self.expect_op(")")
            return inner
        if tok.kind == "num":
            self.advance()
            return Num(Q(int(tok.text)))
        raise ExpressionSyntaxError("exponent must be an integer", tok.offset)

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(Q(int(tok.text)))
        if tok.kind == "name":
            self.advance()
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.parse_expr()
            close = self.peek()
            if close.kind != "op" or close.text != ")":
                raise ExpressionSyntaxError("unbalanced parenthesis", close.offset)
            self.advance()
            return node
        raise ExpressionSyntaxError("expected a value", tok.offset)


def parse_ast(text: str) -> Node:
    """Parse expression text into its syntax tree."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    parser = _Parser(_tokenize(text))
    node = parser.parse_expr()
    tail = parser.peek()
    if tail.kind != "end":
        raise ExpressionSyntaxError(f"unexpected trailing input {tail.text!r}", tail.offset)
    return node


def _free_variables(node: Node, acc: set):
    if isinstance(node, Var):
        acc.add(node.name)
    elif isinstance(node, Unary):
        _free_variables(node.arg, acc)
    elif isinstance(node, Binary):
        _free_variables(node.left, acc)
        _free_variables(node.right, acc)


def _eval_ast(node: Node) -> RationalFunction:
    if isinstance(node, Num):
        return RationalFunction.const(node.value)
    if isinstance(node, Var):
        return RationalFunction.variable()
    if isinstance(node, Unary):
        return -_eval_ast(node.arg)
    if isinstance(node, Binary):
        if node.op == "^":
            base = _eval_ast(node.left)
            if not isinstance(node.right, (Num, Unary)):
                raise MalformedInputError("exponent must be an integer literal")
            exp_node = node.right
            sign = 1
            while isinstance(exp_node, Unary):
                sign = -sign
                exp_node = exp_node.arg
            exponent = sign * int(exp_node.value)
            if Q(exp_node.value).denominator != 1:
                raise MalformedInputError("exponent must be an integer")
            return base**exponent
        left = _eval_ast(node.left)
        right = _eval_ast(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right.is_zero():
                raise MalformedInputError("division by the zero polynomial")
            return left / right
    raise MalformedInputError(f"unknown node {node!r}")


def parse_expression(text: str, variable: Optional[str] = None) -> RationalFunction:
    """Parse expression text into an exact rational function.

    At most one distinct variable name may appear; ``variable`` restricts it
    to a specific name when given.
    """
    node = parse_ast(text)
    names: set = set()
    _free_variables(node, names)
    if len(names) > 1:
        raise ExpressionSyntaxError(
            f"more than one variable: {sorted(names)}", 0
        )
    if variable is not None and names and names != {variable}:
        raise ExpressionSyntaxError(
            f"expected variable {variable!r}, found {names.pop()!r}", 0
        )
    return _eval_ast(node)


def ast_to_text(node: Node) -> str:
    """Fully parenthesized canonical text; parses back to the same tree shape."""
    return str(node)
