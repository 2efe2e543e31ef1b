"""Composite program graphs.

A program graph has one node per syntax-tree node, per list-valued field
and per primitive field value, plus one *syntax node* per token of source.
The tree itself supplies FIELD edges; tokens hang off the innermost tree node
that produced them via SYNTAX edges and are chained in source order by
NEXT_SYNTAX.  Control flow, data flow, lexical order, assignments and calls
add the remaining relationship edges.

Edge orientation follows the relation names: an edge ``u -> v`` of type
LAST_WRITE says that ``v`` may be the most recent write of the variable at
``u``; LAST_LEXICAL_USE points from an occurrence back to the previous
occurrence of the same identifier.
"""

from __future__ import annotations

import ast
import enum
import io
import keyword
import re
import token as token_module
import tokenize
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from . import data_flow
from .control_flow import ControlFlowGraph, NotFound, get_control_flow_graph
from .frontend import Program, SourceInput, SourceSpan, load, normalize_fragment, unparse


class NodeClass(str, enum.Enum):
    AST_NODE = "AstNode"
    AST_LIST = "AstList"
    AST_VALUE = "AstValue"
    SYNTAX = "SyntaxNode"


class EdgeType(str, enum.Enum):
    FIELD = "FIELD"
    SYNTAX = "SYNTAX"
    NEXT_SYNTAX = "NEXT_SYNTAX"
    LAST_LEXICAL_USE = "LAST_LEXICAL_USE"
    CFG_NEXT = "CFG_NEXT"
    LAST_READ = "LAST_READ"
    LAST_WRITE = "LAST_WRITE"
    COMPUTED_FROM = "COMPUTED_FROM"
    CALLS = "CALLS"
    FORMAL_ARG_NAME = "FORMAL_ARG_NAME"
    RETURNS_TO = "RETURNS_TO"

    def __str__(self) -> str:
        return self.value


ALL_EDGE_TYPES = tuple(EdgeType)
_EDGE_ORDER = {t: i for i, t in enumerate(ALL_EDGE_TYPES)}

# CPython shares one instance of each of these across the whole tree.
_SINGLETONS = (ast.operator, ast.unaryop, ast.cmpop, ast.boolop, ast.expr_context)
_PRIMITIVES = (str, bytes, bool, int, float, complex, type(Ellipsis))


@dataclass(eq=False)
class ProgramGraphNode:
    id: int
    node_class: NodeClass
    kind: str
    text: str | None = None
    span: SourceSpan | None = None
    ast_node: ast.AST | None = field(default=None, repr=False)

    def key(self) -> tuple:
        return (self.id, self.node_class.value, self.kind, self.text,
                None if self.span is None else tuple(self.span.as_list()))


class Edge(NamedTuple):
    src: int
    dst: int
    type: EdgeType


class ProgramGraph:
    def __init__(self, program: Program | None = None):
        self.program = program
        self.nodes: list[ProgramGraphNode] = []
        self.edges: list[Edge] = []
        self.root = 0
        self.source_sha256: str | None = None
        self._by_ast: dict[int, int] = {}
        self._by_span: dict[tuple[int, int], list[int]] | None = None

    def add_node(self, node_class: NodeClass, kind: str, text: str | None = None,
                 span: SourceSpan | None = None, ast_node: ast.AST | None = None) -> ProgramGraphNode:
        node = ProgramGraphNode(len(self.nodes), node_class, kind, text, span, ast_node)
        self.nodes.append(node)
        if ast_node is not None and node_class is NodeClass.AST_NODE \
                and not isinstance(ast_node, _SINGLETONS):
            self._by_ast[id(ast_node)] = node.id
        return node

    def node_for(self, ast_node: ast.AST) -> ProgramGraphNode:
        try:
            return self.nodes[self._by_ast[id(ast_node)]]
        except KeyError:
            raise NotFound(repr(ast_node)) from None

    def has_ast(self, ast_node: ast.AST) -> bool:
        return id(ast_node) in self._by_ast

    def edges_of_type(self, edge_type: EdgeType) -> list[Edge]:
        return [e for e in self.edges if e.type is edge_type]

    def nodes_by_span(self, char_start: int, char_end: int) -> list[ProgramGraphNode]:
        if self._by_span is None:
            self._by_span = {}
            for n in self.nodes:
                if n.span is not None:
                    self._by_span.setdefault((n.span.char_start, n.span.char_end), []).append(n.id)
        return [self.nodes[i] for i in self._by_span.get((char_start, char_end), [])]

    def syntax_nodes(self) -> list[ProgramGraphNode]:
        return [n for n in self.nodes if n.node_class is NodeClass.SYNTAX]

    def get_node_by_source_and_identifier(self, fragment: str, identifier: str) -> ProgramGraphNode:
        """First occurrence of ``identifier`` inside the first node rendering as ``fragment``."""
        if not fragment.strip() or not identifier:
            raise ValueError("fragment and identifier must be non-empty")
        if self.program is None:
            raise NotFound(fragment)
        wanted = normalize_fragment(fragment)
        for ast_node in self.program.nodes():
            if isinstance(ast_node, _SINGLETONS) or not self.has_ast(ast_node):
                continue
            if not isinstance(ast_node, (ast.stmt, ast.expr)):
                continue
            if unparse(ast_node) != wanted:
                continue
            for inner in _preorder(ast_node):
                if _identifier_of(inner) == identifier and self.has_ast(inner):
                    return self.node_for(inner)
            raise NotFound(f"{identifier!r} in {fragment!r}")
        raise NotFound(fragment)

    def census(self) -> dict[EdgeType, int]:
        counts = Counter(e.type for e in self.edges)
        return {t: counts.get(t, 0) for t in ALL_EDGE_TYPES}

    def structure(self) -> tuple:
        """Everything that identifies the graph, independent of AST objects."""
        return (self.root, tuple(n.key() for n in self.nodes),
                tuple((e.src, e.dst, e.type.value) for e in self.edges))

    def __eq__(self, other) -> bool:
        return isinstance(other, ProgramGraph) and self.structure() == other.structure()

    __hash__ = None


def _preorder(root: ast.AST):
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed([c for c in ast.iter_child_nodes(node)
                               if not isinstance(c, ast.expr_context)]))


def _identifier_of(node: ast.AST) -> str | None:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.arg):
        return node.arg
    return None


# -- tokens -----------------------------------------------------------------------

_SKIPPED_TOKENS = {token_module.NEWLINE, token_module.NL, token_module.INDENT,
                   token_module.DEDENT, token_module.ENDMARKER, token_module.ENCODING}
_EXPR_END = {token_module.NUMBER, token_module.STRING}
_NON_WS = re.compile(r"\S+")


@dataclass
class _Token:
    text: str
    start: int
    end: int
    type: int


def source_tokens(program: Program) -> list[_Token]:
    """Lexical elements of the source, with any stray text (line continuations) kept."""
    source = program.source
    lines = program.lines
    raw: list[_Token] = []
    try:
        for tok in tokenize.generate_tokens(io.StringIO(source).readline):
            if tok.type in _SKIPPED_TOKENS or not tok.string:
                continue
            start = lines.offset(*tok.start)
            end = lines.offset(*tok.end)
            raw.append(_Token(tok.string, start, end, tok.type))
    except (tokenize.TokenError, SyntaxError):
        raw = [_Token(m.group(), m.start(), m.end(), token_module.OP)
               for m in _NON_WS.finditer(source)]
    out: list[_Token] = []
    pos = 0
    for tok in raw:
        for m in _NON_WS.finditer(source, pos, tok.start):
            out.append(_Token(m.group(), m.start(), m.end(), token_module.ERRORTOKEN))
        out.append(tok)
        pos = tok.end
    for m in _NON_WS.finditer(source, pos):
        out.append(_Token(m.group(), m.start(), m.end(), token_module.ERRORTOKEN))
    return out


# -- construction -------------------------------------------------------------------


class _Builder:
    def __init__(self, program: Program, edge_types: frozenset[EdgeType]):
        self.program = program
        self.edge_types = edge_types
        self.graph = ProgramGraph(program)
        self.edges: set[Edge] = set()
        self.ast_children: dict[int, list[int]] = {}

    def emit(self, src: int, dst: int, edge_type: EdgeType) -> None:
        if edge_type in self.edge_types:
            self.edges.add(Edge(src, dst, edge_type))

    def build(self) -> ProgramGraph:
        self.build_tree()
        self.build_syntax()
        wants = self.edge_types
        if wants & {EdgeType.CFG_NEXT, EdgeType.LAST_READ, EdgeType.LAST_WRITE}:
            cfg = get_control_flow_graph(self.program)
            self.build_cfg_next(cfg)
            if wants & {EdgeType.LAST_READ, EdgeType.LAST_WRITE}:
                self.build_last_access(cfg)
        if EdgeType.LAST_LEXICAL_USE in wants:
            self.build_lexical_use()
        if EdgeType.COMPUTED_FROM in wants:
            self.build_computed_from()
        if wants & {EdgeType.CALLS, EdgeType.FORMAL_ARG_NAME, EdgeType.RETURNS_TO}:
            self.build_calls()
        self.graph.edges = sorted(self.edges, key=lambda e: (e.src, e.dst, _EDGE_ORDER[e.type]))
        return self.graph

    def build_tree(self) -> None:
        graph, program = self.graph, self.program
        # (parent pg id or None, parent AstNode pg id or None, item)
        stack: list[tuple[int | None, int | None, object, str]] = [(None, None, program.tree, "")]
        while stack:
            parent, owner, item, fname = stack.pop()
            if isinstance(item, ast.AST):
                node = graph.add_node(NodeClass.AST_NODE, type(item).__name__,
                                      span=program.span(item) if not isinstance(item, _SINGLETONS) else None,
                                      ast_node=item)
                self.ast_children[node.id] = []
                if owner is not None:
                    self.ast_children[owner].append(node.id)
                children = []
                for name, value in ast.iter_fields(item):
                    if name == "ctx" or value is None:
                        continue
                    if isinstance(value, list):
                        children.append((node.id, node.id, value, name))
                    elif isinstance(value, ast.AST) or isinstance(value, _PRIMITIVES):
                        children.append((node.id, node.id, value, name))
                stack.extend(reversed(children))
            elif isinstance(item, list):
                node = graph.add_node(NodeClass.AST_LIST, fname)
                stack.extend(reversed([(node.id, owner, v, fname) for v in item if v is not None]))
            else:
                text = item if isinstance(item, str) else repr(item)
                node = graph.add_node(NodeClass.AST_VALUE, type(item).__name__, text)
            if parent is not None:
                self.emit(parent, node.id, EdgeType.FIELD)

    def build_syntax(self) -> None:
        graph = self.graph
        tokens = source_tokens(self.program)
        owners = self.attach_tokens(tokens)
        self.regroup_parens(tokens, owners)
        lines = self.program.lines
        previous = None
        for tok, owner in zip(tokens, owners):
            node = graph.add_node(NodeClass.SYNTAX, token_module.tok_name.get(tok.type, "OP"),
                                  tok.text, lines.span(tok.start, tok.end))
            self.emit(owner, node.id, EdgeType.SYNTAX)
            if previous is not None:
                self.emit(previous, node.id, EdgeType.NEXT_SYNTAX)
            previous = node.id

    def attach_tokens(self, tokens: list[_Token]) -> list[int]:
        """Owner of each token: the innermost tree node whose span encloses it."""
        graph = self.graph
        owners = [graph.root] * len(tokens)
        stack = [(graph.root, 0, len(tokens))]
        while stack:
            nid, lo, hi = stack.pop()
            children = [c for c in self.ast_children[nid] if graph.nodes[c].span is not None]
            children.sort(key=lambda c: (graph.nodes[c].span.char_start, graph.nodes[c].span.char_end))
            i = lo
            for c in children:
                span = graph.nodes[c].span
                while i < hi and tokens[i].start < span.char_start:
                    owners[i] = nid
                    i += 1
                j = i
                while j < hi and tokens[j].end <= span.char_end and tokens[j].start >= span.char_start:
                    j += 1
                if j > i:
                    stack.append((c, i, j))
                i = j
            while i < hi:
                owners[i] = nid
                i += 1
        return owners

    def regroup_parens(self, tokens: list[_Token], owners: list[int]) -> None:
        """Move grouping parentheses onto the expression they enclose."""
        graph = self.graph
        match: dict[int, int] = {}
        opened: list[int] = []
        for i, tok in enumerate(tokens):
            if tok.type != token_module.OP:
                continue
            if tok.text in "([{":
                opened.append(i)
            elif tok.text in ")]}" and opened:
                match[opened.pop()] = i
        extent = {}

        def span_of(nid: int) -> tuple[int, int]:
            if nid not in extent:
                s = graph.nodes[nid].span
                extent[nid] = (s.char_start, s.char_end)
            return extent[nid]

        pairs = [(l, r) for l, r in match.items()
                 if tokens[l].text == "(" and r > l + 1 and self._grouping(tokens, l)]
        pairs.sort(key=lambda p: p[1] - p[0])
        for l, r in pairs:
            owner = owners[l]
            if owners[r] != owner:
                continue
            lo, hi = tokens[l + 1].start, tokens[r - 1].end
            for c in self.ast_children[owner]:
                if graph.nodes[c].span is None:
                    continue
                cs, ce = span_of(c)
                if cs <= lo and hi <= ce:
                    owners[l] = owners[r] = c
                    extent[c] = (min(cs, tokens[l].start), max(ce, tokens[r].end))
                    break

    @staticmethod
    def _grouping(tokens: list[_Token], i: int) -> bool:
        if i == 0:
            return True
        prev = tokens[i - 1]
        if prev.type in _EXPR_END:
            return False
        if prev.type == token_module.NAME:
            return keyword.iskeyword(prev.text) and prev.text not in ("None", "True", "False")
        return prev.text not in (")", "]", "}")

    def anchor(self, ast_node: ast.AST | None) -> int | None:
        if ast_node is None or isinstance(ast_node, _SINGLETONS):
            return None
        return self.graph._by_ast.get(id(ast_node))

    def build_cfg_next(self, cfg: ControlFlowGraph) -> None:
        for a, b in cfg.statement_edges:
            src = self.anchor(cfg.nodes[a].ast_node)
            dst = self.anchor(cfg.nodes[b].ast_node)
            if src is not None and dst is not None:
                self.emit(src, dst, EdgeType.CFG_NEXT)

    def build_last_access(self, cfg: ControlFlowGraph) -> None:
        for site, previous in data_flow.last_access(cfg).items():
            src = self.anchor(site.ast_node)
            if src is None:
                continue
            for prior in previous:
                if prior.node == site.node and prior.index < site.index \
                        and prior.ast_node is site.ast_node:
                    continue
                dst = self.anchor(prior.ast_node)
                if dst is None:
                    continue
                kind = EdgeType.LAST_WRITE if prior.kind == data_flow.WRITE else EdgeType.LAST_READ
                self.emit(src, dst, kind)

    def build_lexical_use(self) -> None:
        occurrences: dict[str, list[tuple[int, int]]] = {}
        for node in self.graph.nodes:
            if node.node_class is not NodeClass.AST_NODE:
                continue
            name = _identifier_of(node.ast_node)
            if name is None or node.span is None:
                continue
            occurrences.setdefault(name, []).append((node.span.char_start, node.id))
        for items in occurrences.values():
            items.sort()
            for (_, earlier), (_, later) in zip(items, items[1:]):
                self.emit(later, earlier, EdgeType.LAST_LEXICAL_USE)

    def build_computed_from(self) -> None:
        for node in _preorder(self.program.tree):
            if isinstance(node, ast.Assign):
                targets, value, augmented = node.targets, node.value, False
            elif isinstance(node, ast.AnnAssign) and node.value is not None:
                targets, value, augmented = [node.target], node.value, False
            elif isinstance(node, ast.AugAssign):
                targets, value, augmented = [node.target], node.value, True
            else:
                continue
            lhs = [n for t in targets for n in _preorder(t)
                   if isinstance(n, ast.Name) and not isinstance(n.ctx, ast.Load)]
            rhs = [n for n in _preorder(value) if isinstance(n, ast.Name)
                   and isinstance(n.ctx, ast.Load)]
            for t in lhs:
                src = self.anchor(t)
                for v in rhs:
                    self.emit(src, self.anchor(v), EdgeType.COMPUTED_FROM)
                if augmented:
                    self.emit(src, src, EdgeType.COMPUTED_FROM)

    def build_calls(self) -> None:
        tree = self.program.tree
        definitions: dict[str, list[ast.AST]] = {}
        methods = {id(s) for n in _preorder(tree) if isinstance(n, ast.ClassDef) for s in n.body}
        for node in _preorder(tree):
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)) and id(node) not in methods:
                definitions.setdefault(node.name, []).append(node)
        if not definitions:
            return
        returns = {id(d): _own_returns(d) for defs in definitions.values() for d in defs}
        for call in _preorder(tree):
            if not (isinstance(call, ast.Call) and isinstance(call.func, ast.Name)):
                continue
            for definition in definitions.get(call.func.id, ()):
                call_id = self.anchor(call)
                self.emit(call_id, self.anchor(definition), EdgeType.CALLS)
                args = definition.args
                positional = [*args.posonlyargs, *args.args]
                for i, arg in enumerate(call.args):
                    if isinstance(arg, ast.Starred) or i >= len(positional):
                        break
                    self.emit(self.anchor(arg), self.anchor(positional[i]), EdgeType.FORMAL_ARG_NAME)
                by_name = {a.arg: a for a in (*args.args, *args.kwonlyargs)}
                for kw in call.keywords:
                    if kw.arg is not None and kw.arg in by_name:
                        self.emit(self.anchor(kw), self.anchor(by_name[kw.arg]),
                                  EdgeType.FORMAL_ARG_NAME)
                for ret in returns[id(definition)]:
                    self.emit(self.anchor(ret), call_id, EdgeType.RETURNS_TO)


def _own_returns(definition: ast.AST) -> list[ast.Return]:
    """Return statements of a function, excluding those of nested scopes."""
    found = []
    stack = list(reversed(definition.body))
    while stack:
        node = stack.pop()
        if isinstance(node, ast.Return):
            found.append(node)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)):
            continue
        stack.extend(reversed([c for c in ast.iter_child_nodes(node) if isinstance(c, ast.stmt)
                               or isinstance(c, (ast.ExceptHandler, ast.match_case))]))
    return found


def get_program_graph(program: SourceInput | Program,
                      edge_types: Iterable[EdgeType | str] | None = None) -> ProgramGraph:
    """Build the program graph of a module.

    ``edge_types`` restricts which edge types are produced; all eleven by
    default.  Nodes are the same whatever the selection.
    """
    prog = load(program)
    if isinstance(program, ast.AST):
        # Syntax nodes need real source positions; work from the rendering.
        prog = load(prog.source)
    wanted = frozenset(ALL_EDGE_TYPES if edge_types is None else (EdgeType(t) for t in edge_types))
    return _Builder(prog, wanted).build()


def edge_type_census(pg: ProgramGraph) -> dict[EdgeType, int]:
    return pg.census()
