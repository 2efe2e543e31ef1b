"""Control-flow graphs over Python syntax trees.

Graphs are built at statement granularity first: every statement, branch
test, loop step and pseudo-instruction becomes a :class:`ControlFlowNode`.
Basic blocks are then recovered as maximal chains of nodes linked by single
normal edges, so the block view and the statement view always agree.

Exceptions are modeled with optional *interrupting* edges.  Any node may
raise, so each one gets an interrupting edge to the nearest enclosing
handler, ``finally`` suite, or the exit of its function.
"""

from __future__ import annotations

import ast
import copy
import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .frontend import (
    ControlContextError,
    ParseStatus,
    Program,
    SourceInput,
    load,
    normalize_fragment,
    unparse,
)


class NodeKind(str, enum.Enum):
    STATEMENT = "Statement"
    TEST = "Test"
    ITER_CREATE = "IterCreate"
    WITH = "With"
    SUBJECT = "Subject"
    PATTERN = "Pattern"
    ELEMENT = "Element"
    # Pseudo-instructions: no single source statement backs these.
    ARGS = "ArgsBinding"
    ITER_NEXT = "IterNext"
    HANDLER = "HandlerMatch"
    BINDING = "ExceptionBinding"
    EXIT = "Exit"


PSEUDO_KINDS = frozenset({NodeKind.ARGS, NodeKind.ITER_NEXT, NodeKind.HANDLER,
                          NodeKind.BINDING, NodeKind.EXIT})

LABEL_STYLES = ("table", "figure")


class NotFound(LookupError):
    pass


def header_source(node: ast.AST) -> str:
    """One-line rendering of a def or class header, without the colon."""
    stub = copy.copy(node)
    stub.body = [ast.Pass()]
    stub.decorator_list = []
    first = unparse(stub).splitlines()[0]
    return first[:-1] if first.endswith(":") else first


@dataclass(eq=False)
class ControlFlowNode:
    id: int
    kind: NodeKind
    ast_node: ast.AST | None
    function: int
    names: tuple[str, ...] = ()
    iterator: str | None = None
    extra: ast.AST | None = None
    block: int = -1

    @property
    def is_pseudo(self) -> bool:
        return self.kind in PSEUDO_KINDS

    def label(self, style: str = "table") -> str:
        kind = self.kind
        node = self.ast_node
        table = style == "table"
        if kind is NodeKind.EXIT:
            return "<exit>"
        if kind is NodeKind.ARGS:
            names = ", ".join(self.names)
            return f"{names} ← args" if table else f"{names} = args"
        if kind is NodeKind.BINDING:
            return f"{self.names[0]} ← exception" if table else f"{self.names[0]} = exception"
        if kind is NodeKind.ITER_CREATE:
            text = unparse(node)
            return text if table else f"{self.iterator} = {text}"
        if kind is NodeKind.ITER_NEXT:
            target = unparse(node)
            return f"{target} ← iter" if table else f"{target} = next({self.iterator})"
        if kind is NodeKind.HANDLER:
            if isinstance(node, ast.ExceptHandler):
                return "except"
            return unparse(node)
        if kind is NodeKind.PATTERN:
            return f"case {unparse(node)}"
        if kind is NodeKind.ELEMENT and self.names:
            # dict comprehension: the anchor is the key, the value rides along
            return self.names[0]
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            return header_source(node)
        return unparse(node)

    def evaluated(self) -> list[ast.AST]:
        """Expressions (or statements) whose evaluation this node performs."""
        node = self.ast_node
        if node is None or self.kind in (NodeKind.EXIT, NodeKind.ARGS, NodeKind.BINDING):
            return []
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            args = node.args
            return [*node.decorator_list, *args.defaults,
                    *(d for d in args.kw_defaults if d is not None)]
        if isinstance(node, ast.ClassDef):
            return [*node.decorator_list, *node.bases, *node.keywords]
        if isinstance(node, ast.ExceptHandler):
            return []
        return [node] if self.extra is None else [node, self.extra]


@dataclass(eq=False)
class BasicBlock:
    id: int
    nodes: list[ControlFlowNode]
    function: int
    label: str | None = None

    def sources(self, style: str = "table") -> list[str]:
        """Node labels; the ``figure`` style drops the exit pseudo-node like ``labels``."""
        return [n.label(style) for n in self.nodes
                if style != "figure" or n.kind is not NodeKind.EXIT]

    def __repr__(self) -> str:
        return f"BasicBlock({self.id}, {self.sources()!r})"


@dataclass(eq=False)
class FunctionGraph:
    """The subgraph of one scope: the module, a def, class body, lambda or comprehension."""

    index: int
    name: str
    kind: str
    ast_node: ast.AST
    parent: int | None
    nodes: list[ControlFlowNode] = field(default_factory=list)
    blocks: list[BasicBlock] = field(default_factory=list)

    @property
    def entry(self) -> ControlFlowNode:
        return self.nodes[0]

    @property
    def exit(self) -> ControlFlowNode:
        return self.nodes[-1]

    @property
    def entry_block(self) -> BasicBlock:
        return self.blocks[0]


class ControlFlowGraph:
    """Statement-level and basic-block control flow for a whole module."""

    def __init__(self, program: Program, include_interrupting: bool):
        self.program = program
        self.include_interrupting = include_interrupting
        self.nodes: list[ControlFlowNode] = []
        self.functions: list[FunctionGraph] = []
        self.blocks: list[BasicBlock] = []
        self._succ: list[list[int]] = []
        self._pred: list[list[int]] = []
        self._isucc: list[list[int]] = []
        self._ipred: list[list[int]] = []

    # -- construction helpers -------------------------------------------------

    def _add_node(self, kind: NodeKind, ast_node, function: int, **extra) -> ControlFlowNode:
        node = ControlFlowNode(len(self.nodes), kind, ast_node, function, **extra)
        self.nodes.append(node)
        self.functions[function].nodes.append(node)
        self._succ.append([])
        self._pred.append([])
        self._isucc.append([])
        self._ipred.append([])
        return node

    def _add_edge(self, src: int, dst: int) -> None:
        if dst not in self._succ[src]:
            self._succ[src].append(dst)
            self._pred[dst].append(src)

    def _add_interrupting(self, src: int, dst: int) -> None:
        if dst not in self._isucc[src]:
            self._isucc[src].append(dst)
            self._ipred[dst].append(src)

    # -- node-level queries ---------------------------------------------------

    def successors(self, node: int, interrupting: bool = False) -> list[int]:
        if interrupting:
            return self._succ[node] + [n for n in self._isucc[node] if n not in self._succ[node]]
        return list(self._succ[node])

    def predecessors(self, node: int, interrupting: bool = False) -> list[int]:
        if interrupting:
            return self._pred[node] + [n for n in self._ipred[node] if n not in self._pred[node]]
        return list(self._pred[node])

    def interrupting_successors(self, node: int) -> list[int]:
        return list(self._isucc[node])

    @property
    def statement_edges(self) -> list[tuple[int, int]]:
        return sorted((a, b) for a in range(len(self.nodes)) for b in self._succ[a])

    @property
    def interrupting_statement_edges(self) -> list[tuple[int, int]]:
        return sorted((a, b) for a in range(len(self.nodes)) for b in self._isucc[a])

    # -- block-level queries --------------------------------------------------

    def block_of(self, node: ControlFlowNode | int) -> BasicBlock:
        nid = node if isinstance(node, int) else node.id
        return self.blocks[self.nodes[nid].block]

    def block_successors(self, block: BasicBlock | int) -> list[int]:
        b = self.blocks[block] if isinstance(block, int) else block
        return sorted({self.nodes[n].block for n in self._succ[b.nodes[-1].id]})

    def block_interrupting_successors(self, block: BasicBlock | int) -> list[int]:
        b = self.blocks[block] if isinstance(block, int) else block
        return sorted({self.nodes[t].block for n in b.nodes for t in self._isucc[n.id]})

    @property
    def normal_edges(self) -> list[tuple[int, int]]:
        return [(b.id, s) for b in self.blocks for s in self.block_successors(b)]

    @property
    def interrupting_edges(self) -> list[tuple[int, int]]:
        return [(b.id, s) for b in self.blocks for s in self.block_interrupting_successors(b)]

    @property
    def entry_block(self) -> BasicBlock:
        return self.functions[0].entry_block

    def get_exit_blocks(self) -> list[BasicBlock]:
        """Blocks with no normal successor, the synthetic exits among them."""
        return [b for b in self.blocks if not self._succ[b.nodes[-1].id]]

    def get_block_by_source(self, fragment: str) -> BasicBlock:
        """First block in program order holding a node that renders as ``fragment``."""
        node = self.get_node_by_source(fragment)
        return self.blocks[node.block]

    def get_node_by_source(self, fragment: str) -> ControlFlowNode:
        if not fragment.strip():
            raise ValueError("empty source fragment")
        wanted = normalize_fragment(fragment)
        loose = "".join(fragment.split())
        for node in self.nodes:
            for style in LABEL_STYLES:
                label = node.label(style)
                if label == wanted or "".join(label.split()) == loose:
                    return node
        raise NotFound(fragment)

    def function(self, name: str) -> FunctionGraph:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise NotFound(name)

    def labels(self, function: str | int | None = None, style: str = "table") -> list[str]:
        """Statement-level node labels in program order.

        The ``figure`` style leaves out the ``<exit>`` pseudo-node, since it
        lists only what corresponds to executed source.
        """
        nodes = self._select(function)
        if style == "figure":
            nodes = [n for n in nodes if n.kind is not NodeKind.EXIT]
        return [n.label(style) for n in nodes]

    def _select(self, function: str | int | None) -> list[ControlFlowNode]:
        if function is None:
            return list(self.nodes)
        fn = self.functions[function] if isinstance(function, int) else self.function(function)
        return list(fn.nodes)

    def nodes_for_ast(self, ast_node: ast.AST) -> list[ControlFlowNode]:
        return [n for n in self.nodes if n.ast_node is ast_node]


# -- construction ---------------------------------------------------------------


class _Loop:
    def __init__(self, header: int, region_depth: int):
        self.header = header
        self.region_depth = region_depth
        self.breaks: list[int] = []


class _Region:
    """A protected span of code: a try body with handlers, or a finally guard."""

    def __init__(self, kind: str):
        self.kind = kind
        self.raisers: list[int] = []
        self.entering: list[int] = []
        self.pending: list[tuple[str, _Loop | None]] = []


class _Frame:
    def __init__(self, fn: FunctionGraph, allows_return: bool):
        self.fn = fn
        self.allows_return = allows_return
        self.loops: list[_Loop] = []
        self.regions: list[_Region] = []
        self.returns: list[int] = []
        self.raisers: list[int] = []
        self.for_depth = 0


_FUNCTION_DEFS = (ast.FunctionDef, ast.AsyncFunctionDef)
_COMPREHENSIONS = (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)
_COMP_NAMES = {ast.ListComp: "<listcomp>", ast.SetComp: "<setcomp>",
               ast.GeneratorExp: "<genexpr>", ast.DictComp: "<dictcomp>"}


def _param_names(args: ast.arguments) -> tuple[str, ...]:
    names = [a.arg for a in (*args.posonlyargs, *args.args)]
    if args.vararg:
        names.append(args.vararg.arg)
    names.extend(a.arg for a in args.kwonlyargs)
    if args.kwarg:
        names.append(args.kwarg.arg)
    return tuple(names)


def nested_scopes(exprs: Iterable[ast.AST]) -> Iterator[ast.AST]:
    """Lambdas and comprehensions evaluated directly by ``exprs``.

    Parts of a nested scope that run in the enclosing scope (defaults, the
    outermost iterable) are searched too; the nested bodies are not.
    """
    stack = list(reversed(list(exprs)))
    while stack:
        item = stack.pop()
        if isinstance(item, tuple):
            yield item[1]
            continue
        if isinstance(item, ast.Lambda):
            inner = [*item.args.defaults, *(d for d in item.args.kw_defaults if d is not None)]
            stack.append(("emit", item))
            stack.extend(reversed(inner))
        elif isinstance(item, _COMPREHENSIONS):
            stack.append(("emit", item))
            stack.append(item.generators[0].iter)
        elif isinstance(item, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            continue
        else:
            children = [c for c in ast.iter_child_nodes(item)
                        if not isinstance(c, ast.expr_context)]
            stack.extend(reversed(children))


class _Builder:
    def __init__(self, graph: ControlFlowGraph):
        self.graph = graph
        self.frames: list[_Frame] = []

    @property
    def frame(self) -> _Frame:
        return self.frames[-1]

    # -- node creation ----------------------------------------------------------

    def node(self, kind: NodeKind, ast_node, frontier: Iterable[int], scan: bool = True,
             **extra) -> int:
        frame = self.frame
        n = self.graph._add_node(kind, ast_node, frame.fn.index, **extra)
        for src in frontier:
            self.graph._add_edge(src, n.id)
        if kind is not NodeKind.EXIT:
            if frame.regions:
                frame.regions[-1].raisers.append(n.id)
            else:
                frame.raisers.append(n.id)
        if scan:
            for scope in nested_scopes(n.evaluated()):
                self.build_nested(scope)
        return n.id

    def edge(self, src: int, dst: int) -> None:
        self.graph._add_edge(src, dst)

    def interrupt(self, sources: Iterable[int], dst: int) -> None:
        if self.graph.include_interrupting:
            for src in sources:
                self.graph._add_interrupting(src, dst)

    def error(self, status: ParseStatus, node: ast.AST, message: str):
        raise ControlContextError(status, message, getattr(node, "lineno", None),
                                  getattr(node, "col_offset", None))

    # -- scopes -----------------------------------------------------------------

    def open_function(self, name: str, kind: str, ast_node, allows_return: bool) -> _Frame:
        parent = self.frames[-1].fn.index if self.frames else None
        fn = FunctionGraph(len(self.graph.functions), name, kind, ast_node, parent)
        self.graph.functions.append(fn)
        frame = _Frame(fn, allows_return)
        self.frames.append(frame)
        return frame

    def close_function(self, frontier: list[int]) -> None:
        frame = self.frame
        exit_id = self.node(NodeKind.EXIT, None, frontier + frame.returns, scan=False)
        self.interrupt(frame.raisers, exit_id)
        self.frames.pop()

    def build_module(self, tree: ast.Module) -> None:
        self.open_function("<module>", "module", tree, allows_return=False)
        self.close_function(self.body(tree.body, []))

    def build_nested(self, node: ast.AST) -> None:
        if isinstance(node, _FUNCTION_DEFS):
            self.open_function(node.name, "function", node, allows_return=True)
            frontier = []
            names = _param_names(node.args)
            if names:
                frontier = [self.node(NodeKind.ARGS, node.args, [], names=names)]
            self.close_function(self.body(node.body, frontier))
        elif isinstance(node, ast.ClassDef):
            self.open_function(node.name, "class", node, allows_return=False)
            self.close_function(self.body(node.body, []))
        elif isinstance(node, ast.Lambda):
            self.open_function("<lambda>", "lambda", node, allows_return=True)
            frontier = []
            names = _param_names(node.args)
            if names:
                frontier = [self.node(NodeKind.ARGS, node.args, [], names=names)]
            frontier = [self.node(NodeKind.ELEMENT, node.body, frontier)]
            self.close_function(frontier)
        else:
            self.comprehension(node)

    def comprehension(self, node: ast.AST) -> None:
        self.open_function(_COMP_NAMES[type(node)], "comprehension", node, allows_return=False)
        gens = node.generators
        frontier = [self.node(NodeKind.ARGS, gens[0], [], names=(".0",))]
        headers: list[int] = []
        for i, gen in enumerate(gens):
            iterator = f".{i}"
            if i:
                frontier = [self.node(NodeKind.ITER_CREATE, gen.iter, frontier, iterator=iterator)]
            header = self.node(NodeKind.ITER_NEXT, gen.target, frontier, iterator=iterator)
            if headers:
                self.edge(header, headers[-1])
            headers.append(header)
            frontier = [header]
            for cond in gen.ifs:
                test = self.node(NodeKind.TEST, cond, frontier)
                self.edge(test, header)
                frontier = [test]
        if isinstance(node, ast.DictComp):
            label = f"{unparse(node.key)}: {unparse(node.value)}"
            eid = self.node(NodeKind.ELEMENT, node.key, frontier, names=(label,),
                            extra=node.value)
        else:
            eid = self.node(NodeKind.ELEMENT, node.elt, frontier)
        self.edge(eid, headers[-1])
        self.close_function([headers[0]])

    # -- statements -------------------------------------------------------------

    def body(self, stmts: list[ast.stmt], frontier: list[int]) -> list[int]:
        for stmt in stmts:
            frontier = self.statement(stmt, frontier)
        return frontier

    def statement(self, stmt: ast.stmt, frontier: list[int]) -> list[int]:
        method = getattr(self, "visit_" + type(stmt).__name__, None)
        if method is not None:
            return method(stmt, frontier)
        return [self.node(NodeKind.STATEMENT, stmt, frontier)]

    def visit_FunctionDef(self, stmt, frontier):
        n = self.node(NodeKind.STATEMENT, stmt, frontier)
        self.build_nested(stmt)
        return [n]

    visit_AsyncFunctionDef = visit_FunctionDef
    visit_ClassDef = visit_FunctionDef

    def visit_Return(self, stmt, frontier):
        if not self.frame.allows_return:
            self.error(ParseStatus.RETURN_OUTSIDE_FUNCTION, stmt, "'return' outside function")
        n = self.node(NodeKind.STATEMENT, stmt, frontier)
        self.jump("return", [n])
        return []

    def visit_Raise(self, stmt, frontier):
        self.node(NodeKind.STATEMENT, stmt, frontier)
        return []

    def visit_Break(self, stmt, frontier):
        if not self.frame.loops:
            self.error(ParseStatus.BREAK_OUTSIDE_LOOP, stmt, "'break' outside loop")
        self.jump("break", frontier, self.frame.loops[-1])
        return []

    def visit_Continue(self, stmt, frontier):
        if not self.frame.loops:
            self.error(ParseStatus.CONTINUE_OUTSIDE_LOOP, stmt, "'continue' not properly in loop")
        self.jump("continue", frontier, self.frame.loops[-1])
        return []

    def jump(self, kind: str, frontier: list[int], loop: _Loop | None = None) -> None:
        """Route a return/break/continue, passing through any finally suites."""
        frame = self.frame
        floor = loop.region_depth if loop is not None else 0
        for region in reversed(frame.regions[floor:]):
            if region.kind == "finally":
                region.entering.extend(frontier)
                if (kind, loop) not in region.pending:
                    region.pending.append((kind, loop))
                return
        if kind == "return":
            frame.returns.extend(frontier)
        elif kind == "break":
            loop.breaks.extend(frontier)
        else:
            for src in frontier:
                self.edge(src, loop.header)

    def visit_If(self, stmt, frontier):
        test = self.node(NodeKind.TEST, stmt.test, frontier)
        return self.body(stmt.body, [test]) + self.body(stmt.orelse, [test])

    def visit_While(self, stmt, frontier):
        test = self.node(NodeKind.TEST, stmt.test, frontier)
        loop = _Loop(test, len(self.frame.regions))
        self.frame.loops.append(loop)
        for src in self.body(stmt.body, [test]):
            self.edge(src, test)
        self.frame.loops.pop()
        return self.body(stmt.orelse, [test]) + loop.breaks

    def visit_For(self, stmt, frontier):
        frame = self.frame
        iterator = f".{frame.for_depth}"
        create = self.node(NodeKind.ITER_CREATE, stmt.iter, frontier, iterator=iterator)
        header = self.node(NodeKind.ITER_NEXT, stmt.target, [create], iterator=iterator)
        loop = _Loop(header, len(frame.regions))
        frame.loops.append(loop)
        frame.for_depth += 1
        for src in self.body(stmt.body, [header]):
            self.edge(src, header)
        frame.for_depth -= 1
        frame.loops.pop()
        return self.body(stmt.orelse, [header]) + loop.breaks

    visit_AsyncFor = visit_For

    def visit_With(self, stmt, frontier):
        for item in stmt.items:
            frontier = [self.node(NodeKind.WITH, item, frontier)]
        return self.body(stmt.body, frontier)

    visit_AsyncWith = visit_With

    def visit_Match(self, stmt, frontier):
        failing = [self.node(NodeKind.SUBJECT, stmt.subject, frontier)]
        out: list[int] = []
        for case in stmt.cases:
            pattern = self.node(NodeKind.PATTERN, case.pattern, failing)
            matched = [pattern]
            failing = [pattern]
            if case.guard is not None:
                guard = self.node(NodeKind.TEST, case.guard, [pattern])
                matched = [guard]
                failing = [pattern, guard]
            out += self.body(case.body, matched)
        return out + failing

    def visit_Try(self, stmt, frontier):
        frame = self.frame
        final = _Region("finally") if stmt.finalbody else None
        if final:
            frame.regions.append(final)
        handlers = _Region("handlers") if stmt.handlers else None
        if handlers:
            frame.regions.append(handlers)
        out = self.body(stmt.body, frontier)
        if handlers:
            frame.regions.pop()
        out = self.body(stmt.orelse, out)
        previous = None
        for handler in stmt.handlers:
            anchor = handler.type if handler.type is not None else handler
            match = self.node(NodeKind.HANDLER, anchor, [] if previous is None else [previous])
            if previous is None:
                self.interrupt(handlers.raisers, match)
            cont = [match]
            if handler.name:
                cont = [self.node(NodeKind.BINDING, handler, cont, names=(handler.name,))]
            out += self.body(handler.body, cont)
            previous = match if handler.type is not None else None
        if final:
            frame.regions.pop()
            first = len(self.graph.nodes)
            out = self.body(stmt.finalbody, out + final.entering)
            if first < len(self.graph.nodes):
                entry = next(n.id for n in self.graph.nodes[first:]
                             if n.function == frame.fn.index)
                self.interrupt(final.raisers, entry)
            for kind, loop in final.pending:
                self.jump(kind, out, loop)
        return out

    visit_TryStar = visit_Try


def _partition_blocks(graph: ControlFlowGraph) -> None:
    succ, pred = graph._succ, graph._pred
    for fn in graph.functions:
        entry = fn.nodes[0].id

        def is_leader(nid: int) -> bool:
            if nid == entry or len(pred[nid]) != 1:
                return True
            p = pred[nid][0]
            return len(succ[p]) != 1 or p == nid

        for node in fn.nodes:
            if node.block >= 0 or not is_leader(node.id):
                continue
            chain = [node]
            node.block = -2
            while len(succ[chain[-1].id]) == 1:
                nxt = graph.nodes[succ[chain[-1].id][0]]
                if nxt.block != -1 or is_leader(nxt.id):
                    break
                nxt.block = -2
                chain.append(nxt)
            fn.blocks.append(BasicBlock(-1, chain, fn.index))
        # Cycles with no leader cannot occur (every loop has a branching test),
        # but unassigned nodes would break invariants, so guard anyway.
        for node in fn.nodes:
            if node.block == -1:
                node.block = -2
                fn.blocks.append(BasicBlock(-1, [node], fn.index))
        fn.blocks.sort(key=lambda b: b.nodes[0].id)
    graph.blocks = sorted((b for fn in graph.functions for b in fn.blocks),
                          key=lambda b: b.nodes[0].id)
    for i, block in enumerate(graph.blocks):
        block.id = i
        for node in block.nodes:
            node.block = i
    for fn in graph.functions:
        fn.blocks[0].label = f"<entry:{fn.name}>"
        for block in fn.blocks:
            if len(block.nodes) == 1 and block.nodes[0].kind is NodeKind.EXIT:
                block.label = "<exit>"


def get_control_flow_graph(program: SourceInput | Program,
                           include_interrupting: bool = False) -> ControlFlowGraph:
    """Build the control-flow graph of a module and every scope nested in it.

    Raises ParseFailure for unparsable source and ControlContextError for a
    return, break or continue in a context that does not permit it.
    """
    prog = load(program)
    graph = ControlFlowGraph(prog, include_interrupting)
    _Builder(graph).build_module(prog.tree)
    _partition_blocks(graph)
    return graph
