"""Recursive-descent parser for operator expressions.

    expr   := term (('+' | '-') term)*
    term   := ['-'] factor ('*' factor)*
    factor := atom ('^' nat)*
    atom   := nat | 'x' nat | 'd' nat '[' nat ']' | '(' expr ')'

``d<i>[k]`` is the divided power d_i^[k].  Whitespace is ignored and
naturals are reduced mod p when the tree is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..ring import DiffOp, mul, power


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'x', 'd', or the punctuation character itself; 'end'
    text: str
    line: int
    column: int


_PUNCT = set("+-*^[]()")


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        ch = source[pos]
        if ch == "\n":
            line, col = line + 1, 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            col += 1
            continue
        if ch.isdigit():
            start = pos
            while pos < len(source) and source[pos].isdigit():
                pos += 1
            tokens.append(Token("num", source[start:pos], line, col))
            col += pos - start
            continue
        if ch in "xd" or ch in _PUNCT:
            tokens.append(Token(ch, ch, line, col))
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        pos += 1
        col += 1
    tokens.append(Token("end", "", line, col))
    return tokens


# AST


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class DPow:
    index: int
    order: int


@dataclass(frozen=True)
class Group:
    inner: "Node"


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Product:
    factors: tuple
    negate: bool = False


@dataclass(frozen=True)
class Sum:
    terms: tuple  # (sign, node) pairs with sign +1 or -1


Node = Union[Num, Var, DPow, Group, Power, Product, Sum]


class _Parser:
    def __init__(self, source: str, n: int | None):
        self.tokens = tokenize(source)
        self.pos = 0
        self.n = n

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.column)

    def expect(self, kind: str) -> Token:
        tok = self.tok
        if tok.kind != kind:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            self.fail(f"expected {kind!r}, found {found}")
        self.pos += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        terms = [(1, self.term())]
        while self.tok.kind in "+-":
            sign = 1 if self.tok.kind == "+" else -1
            self.pos += 1
            terms.append((sign, self.term()))
        return terms[0][1] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Node:
        negate = False
        if self.tok.kind == "-":
            negate = True
            self.pos += 1
        factors = [self.factor()]
        while self.tok.kind == "*":
            self.pos += 1
            factors.append(self.factor())
        if len(factors) == 1 and not negate:
            return factors[0]
        return Product(tuple(factors), negate)

    def factor(self) -> Node:
        node = self.atom()
        while self.tok.kind == "^":
            self.pos += 1
            node = Power(node, int(self.expect("num").text))
        return node

    def index(self, tok: Token) -> int:
        i = int(self.expect("num").text)
        if i < 1 or (self.n is not None and i > self.n):
            bound = f"1..{self.n}" if self.n is not None else ">= 1"
            self.fail(f"variable index {i} out of range {bound}", tok)
        return i

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return Num(int(tok.text))
        if tok.kind == "x":
            self.pos += 1
            return Var(self.index(tok))
        if tok.kind == "d":
            self.pos += 1
            i = self.index(tok)
            self.expect("[")
            k = int(self.expect("num").text)
            self.expect("]")
            return DPow(i, k)
        if tok.kind == "(":
            self.pos += 1
            inner = self.expr()
            self.expect(")")
            return Group(inner)
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        self.fail(f"expected a number, x<i>, d<i>[k] or '(', found {found}")


def parse(source: str, n: int | None = None) -> Node:
    """Parse ``source``; indices are checked against ``n`` when given."""
    return _Parser(source, n).parse()


def evaluate(node: Node, p: int, n: int) -> DiffOp:
    if isinstance(node, Num):
        return DiffOp.scalar(node.value, p, n)
    if isinstance(node, Var):
        return DiffOp.x(node.index, p, n)
    if isinstance(node, DPow):
        return DiffOp.d(node.index, node.order, p, n)
    if isinstance(node, Group):
        return evaluate(node.inner, p, n)
    if isinstance(node, Power):
        return power(evaluate(node.base, p, n), node.exponent)
    if isinstance(node, Product):
        out = evaluate(node.factors[0], p, n)
        for f in node.factors[1:]:
            out = mul(out, evaluate(f, p, n))
        return -out if node.negate else out
    out = DiffOp.zero(p, n)
    for sign, t in node.terms:
        v = evaluate(t, p, n)
        out = out + v if sign > 0 else out - v
    return out


def parse_element(source: str, p: int, n: int) -> DiffOp:
    return evaluate(parse(source, n), p, n)


def infer_n(source: str) -> int:
    """Largest variable index mentioned (at least 1)."""
    best = 1
    for node in _walk(parse(source)):
        if isinstance(node, (Var, DPow)):
            best = max(best, node.index)
    return best


def _walk(node: Node):
    yield node
    if isinstance(node, Group):
        yield from _walk(node.inner)
    elif isinstance(node, Power):
        yield from _walk(node.base)
    elif isinstance(node, Product):
        for f in node.factors:
            yield from _walk(f)
    elif isinstance(node, Sum):
        for _, t in node.terms:
            yield from _walk(t)
