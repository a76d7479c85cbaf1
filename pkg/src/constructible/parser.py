"""Text front end: tokenizer, precedence-climbing parser, canonical printer.

Grammar (see docs/grammar.md)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" exponent)?
    exponent:= unary               -- must fold to a rational literal
    atom    := number | "y" | ("log" | "ln") "(" expr ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so ``-y^2``
is ``-(y^2)`` and ``2^3^2`` is ``2^9``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ExprSyntaxError, NonRationalExponent, UnknownIdentifier
from .expr import Add, CExpr, Const, Div, Mul, Pow, Sub, SubExpr, Var, normalize_to_definition

_NUMBER = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_MAX_DEPTH = 200
_MAX_DIGITS = 1000


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    span: tuple[int, int]


@dataclass(frozen=True)
class RawNode:
    """Parse tree node.  ``value`` holds a number or a power's exponent."""

    kind: str
    children: tuple["RawNode", ...] = ()
    value: Fraction | None = None
    span: tuple[int, int] = field(default=(0, 0), compare=False)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            tokens.append(Token("num", m.group(), m.span()))
            i = m.end()
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(Token("ident", m.group(), m.span()))
            i = m.end()
            continue
        if c in "+-*/^()":
            tokens.append(Token("op", c, (i, i + 1)))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", (i, i + 1), text)
    tokens.append(Token("end", "", (len(text), len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.depth = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token, cls=ExprSyntaxError):
        return cls(message, tok.span, self.text)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            shown = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}", tok)
        return self.advance()

    def _enter(self, tok: Token):
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise self.error("expression nested too deeply", tok)

    def parse(self) -> RawNode:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(f"unexpected {tok.text!r}", tok)
        return node

    def expr(self) -> RawNode:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance()
            rhs = self.term()
            node = RawNode("add" if op.text == "+" else "sub", (node, rhs), span=(node.span[0], rhs.span[1]))
        return node

    def term(self) -> RawNode:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance()
            rhs = self.unary()
            node = RawNode("mul" if op.text == "*" else "div", (node, rhs), span=(node.span[0], rhs.span[1]))
        return node

    def unary(self) -> RawNode:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            self._enter(tok)
            inner = self.unary()
            self.depth -= 1
            return RawNode("neg", (inner,), span=(tok.span[0], inner.span[1]))
        if tok.kind == "op" and tok.text == "+":
            raise self.error("unary plus is not supported", tok)
        return self.power()

    def power(self) -> RawNode:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            self._enter(tok)
            exp_node = self.unary()
            self.depth -= 1
            q = _fold_exponent(exp_node, self.text)
            return RawNode("pow", (base,), value=q, span=(base.span[0], exp_node.span[1]))
        return base

    def _number(self, tok: Token) -> Fraction:
        mantissa, _, exp = tok.text.lower().partition("e")
        if len(mantissa) > _MAX_DIGITS or (exp and abs(int(exp)) > _MAX_DIGITS):
            raise self.error("numeric literal out of range", tok)
        return Fraction(tok.text)

    def atom(self) -> RawNode:
        tok = self.advance()
        if tok.kind == "num":
            return RawNode("num", value=self._number(tok), span=tok.span)
        if tok.kind == "ident":
            if tok.text == "y":
                return RawNode("y", span=tok.span)
            if tok.text in ("log", "ln"):
                self.expect("(")
                self._enter(tok)
                arg = self.expr()
                self.depth -= 1
                close = self.expect(")")
                return RawNode("log", (arg,), span=(tok.span[0], close.span[1]))
            raise self.error(f"unknown identifier {tok.text!r}", tok, UnknownIdentifier)
        if tok.kind == "op" and tok.text == "(":
            self._enter(tok)
            inner = self.expr()
            self.depth -= 1
            self.expect(")")
            return inner
        shown = tok.text or "end of input"
        raise self.error(f"unexpected {shown!r}", tok)


def _fold_exponent(node: RawNode, text: str) -> Fraction:
    try:
        return _const_value(node)
    except _NotConstant as exc:
        raise NonRationalExponent(f"exponent must be a rational literal ({exc})", node.span, text) from None


class _NotConstant(Exception):
    pass


def _const_value(node: RawNode) -> Fraction:
    k = node.kind
    if k == "num":
        return node.value
    if k in ("y", "log"):
        raise _NotConstant(f"contains {k}")
    if k == "neg":
        return -_const_value(node.children[0])
    if k == "pow":
        from .constants import rational_power

        base = _const_value(node.children[0])
        q = node.value
        if q.denominator == 1:
            if base == 0 and q < 0:
                raise _NotConstant("zero to a negative power")
            return base ** q.numerator
        r = rational_power(base, q) if base > 0 else None
        if r is None:
            raise _NotConstant("irrational value")
        return r
    a, b = (_const_value(c) for c in node.children)
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if b == 0:
        raise _NotConstant("division by zero")
    return a / b


def parse(text: str) -> RawNode:
    """Parse text into a raw tree; every failure is an ``ExprSyntaxError``."""
    if not isinstance(text, str):
        raise ExprSyntaxError("input must be text")
    try:
        return _Parser(text).parse()
    except RecursionError:
        raise ExprSyntaxError("expression nested too deeply", (0, len(text)), text) from None


def parse_cexpr(text: str) -> CExpr:
    return normalize_to_definition(parse(text))


# -- printing --------------------------------------------------------------

_SUM, _PROD, _UNARY, _POW, _ATOM = range(1, 6)


def _prec(e: SubExpr) -> int:
    if isinstance(e, (Add, Sub)):
        return _SUM
    if isinstance(e, (Mul, Div)):
        return _PROD
    if isinstance(e, Pow):
        return _POW
    if isinstance(e, Const):
        if e.value.denominator != 1:
            return _PROD
        return _UNARY if e.value < 0 else _ATOM
    return _ATOM


def _wrap(e: SubExpr, parens: bool) -> str:
    s = print_sub(e)
    return f"({s})" if parens else s


def _exponent_str(q: Fraction) -> str:
    if q.denominator == 1 and q >= 0:
        return str(q.numerator)
    return f"({q})"


def print_sub(e: SubExpr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return "y"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _prec(e.base) < _ATOM)}^{_exponent_str(e.exp)}"
    op, level = {Add: ("+", _SUM), Sub: ("-", _SUM), Mul: ("*", _PROD), Div: ("/", _PROD)}[type(e)]
    left = _wrap(e.left, _prec(e.left) < level)
    right = _wrap(e.right, _prec(e.right) <= level)
    if level == _SUM:
        return f"{left} {op} {right}"
    return f"{left}{op}{right}"


def print_canonical(e: CExpr) -> str:
    """Deterministic text that parses back to the same ``CExpr``."""
    if not e.terms:
        return "0"
    several = len(e.terms) > 1
    parts = []
    for t in e.terms:
        logs = "".join(f"*log({print_sub(g)})" for g in t.logs)
        if t.logs:
            if isinstance(t.factor, Const) and t.factor.value == 1:
                parts.append(logs[1:])
            else:
                parts.append(_wrap(t.factor, _prec(t.factor) < _PROD) + logs)
        else:
            parts.append(_wrap(t.factor, several and _prec(t.factor) == _SUM))
    return " + ".join(parts)
