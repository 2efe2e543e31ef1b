"""A recursive-descent checker for the Graphviz DOT language.

pydot's pyparsing grammar needs seconds per thousand-node graph, so bulk
checks use this instead and pydot cross-checks a smaller sample.
Returns the node and edge statement counts so both routes can be compared.
"""

from __future__ import annotations

import re

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*|/\*.*?\*/|^\#[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<html><(?:[^<>]|<[^<>]*>)*>)
  | (?P<edgeop>->|--)
  | (?P<number>-?(?:\.[0-9]+|[0-9]+(?:\.[0-9]*)?))
  | (?P<name>[A-Za-z_\x80-￿][A-Za-z_0-9\x80-￿]*)
  | (?P<punct>[{}\[\];,=:])
""", re.VERBOSE | re.DOTALL | re.MULTILINE)

_KEYWORDS = {"strict", "graph", "digraph", "subgraph", "node", "edge"}


class DotSyntaxError(ValueError):
    pass


def tokenize(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DotSyntaxError(f"bad character {text[pos]!r} at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        value = m.group()
        if kind == "name" and value.lower() in _KEYWORDS:
            kind = value.lower()
        elif kind == "punct":
            kind = value
        out.append((kind, value))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0
        self.nodes = 0
        self.edges = 0
        self.directed = False

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.toks[j][0] if j < len(self.toks) else None

    def take(self, *kinds: str) -> str:
        if self.peek() not in kinds:
            raise DotSyntaxError(f"expected {'/'.join(kinds)} at token {self.i}, got {self.peek()}")
        self.i += 1
        return self.toks[self.i - 1][1]

    def is_id(self, k: int = 0) -> bool:
        return self.peek(k) in ("name", "number", "string", "html")

    def graph(self) -> None:
        if self.peek() == "strict":
            self.i += 1
        self.directed = self.take("graph", "digraph") == "digraph"
        if self.is_id():
            self.i += 1
        self.take("{")
        self.stmt_list()
        self.take("}")
        if self.i != len(self.toks):
            raise DotSyntaxError("trailing tokens after graph")

    def stmt_list(self) -> None:
        while self.peek() not in ("}", None):
            self.stmt()
            if self.peek() == ";":
                self.i += 1

    def stmt(self) -> None:
        kind = self.peek()
        if kind in ("graph", "node", "edge"):
            self.i += 1
            self.attr_list()
        elif self.is_id() and self.peek(1) == "=":
            self.i += 2
            self.take("name", "number", "string", "html")
        else:
            self.node_or_edge()

    def node_or_edge(self) -> None:
        single = self.operand()
        hops = 0
        while self.peek() == "edgeop":
            op = self.take("edgeop")
            if (op == "->") != self.directed:
                raise DotSyntaxError(f"edge operator {op} in wrong graph kind")
            self.operand()
            hops += 1
        if hops:
            self.edges += hops
        elif single:
            self.nodes += 1
        if self.peek() == "[":
            self.attr_list()

    def operand(self) -> bool:
        if self.peek() in ("subgraph", "{"):
            self.subgraph()
            return False
        self.take("name", "number", "string", "html")
        if self.peek() == ":":
            self.i += 1
            self.take("name", "number", "string", "html")
            if self.peek() == ":":
                self.i += 1
                self.take("name")
        return True

    def subgraph(self) -> None:
        if self.peek() == "subgraph":
            self.i += 1
            if self.is_id():
                self.i += 1
        self.take("{")
        self.stmt_list()
        self.take("}")

    def attr_list(self) -> None:
        self.take("[")
        while True:
            while self.peek() != "]":
                self.take("name", "number", "string", "html")
                self.take("=")
                self.take("name", "number", "string", "html")
                if self.peek() in (";", ","):
                    self.i += 1
            self.take("]")
            if self.peek() != "[":
                return
            self.i += 1


def check(text: str) -> tuple[int, int]:
    """Raise DotSyntaxError unless ``text`` is one DOT graph; return (node stmts, edges)."""
    p = _Parser(tokenize(text))
    p.graph()
    return p.nodes, p.edges
