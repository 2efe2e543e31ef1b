"""Fixed-point data-flow analyses over control-flow graphs.

The solver is the textbook worklist algorithm over gen/kill transfer
functions with set union as the join.  Two analyses are built on it:
liveness (backward, over variable names) and last access (forward, over
access sites).

Variables are simple names.  ``a.b`` and ``a[i]`` read ``a`` and never kill
it.  Loop iterators introduced by for-loop desugaring are named ``.0``,
``.1``, ... and take part in the analyses like any other local.
"""

from __future__ import annotations

import ast
import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .control_flow import ControlFlowGraph, ControlFlowNode, NodeKind

READ = "read"
WRITE = "write"


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class NotAWhileLoop(TypeError):
    pass


@dataclass(frozen=True)
class Access:
    name: str
    kind: str
    ast_node: ast.AST | None = field(default=None, compare=False, hash=False)


@dataclass(frozen=True)
class AccessSite:
    """One variable access: the ``index``-th access performed by CFG node ``node``."""

    node: int
    index: int
    name: str
    kind: str
    ast_node: ast.AST | None = field(default=None, compare=False, hash=False, repr=False)

    @property
    def is_synthetic(self) -> bool:
        return self.name.startswith(".")


# -- access extraction -----------------------------------------------------------


def _target_accesses(target: ast.AST, out: list[Access]) -> None:
    if isinstance(target, ast.Name):
        out.append(Access(target.id, WRITE, target))
    elif isinstance(target, (ast.Tuple, ast.List)):
        for elt in target.elts:
            _target_accesses(elt, out)
    elif isinstance(target, ast.Starred):
        _target_accesses(target.value, out)
    else:
        _expr_accesses(target, out)


def _pattern_accesses(pattern: ast.AST, out: list[Access]) -> None:
    stack = [pattern]
    while stack:
        p = stack.pop()
        if isinstance(p, ast.MatchValue):
            _expr_accesses(p.value, out)
        elif isinstance(p, ast.MatchClass):
            _expr_accesses(p.cls, out)
            stack.extend(reversed([*p.patterns, *p.kwd_patterns]))
        elif isinstance(p, ast.MatchMapping):
            for key in p.keys:
                _expr_accesses(key, out)
            stack.extend(reversed(p.patterns))
            if p.rest:
                out.append(Access(p.rest, WRITE, p))
        elif isinstance(p, ast.MatchAs):
            if p.pattern is not None:
                _pattern_accesses(p.pattern, out)
            if p.name:
                out.append(Access(p.name, WRITE, p))
        elif isinstance(p, ast.MatchStar):
            if p.name:
                out.append(Access(p.name, WRITE, p))
        elif isinstance(p, (ast.MatchSequence, ast.MatchOr)):
            stack.extend(reversed(p.patterns))


def _expr_accesses(node: ast.AST, out: list[Access]) -> None:
    """Append the accesses ``node`` performs, in evaluation order."""
    # An explicit stack keeps deep expressions from exhausting recursion.
    stack: list = [node]
    while stack:
        item = stack.pop()
        if isinstance(item, Access):
            out.append(item)
            continue
        if isinstance(item, ast.Name):
            kind = READ if isinstance(item.ctx, ast.Load) else WRITE
            out.append(Access(item.id, kind, item))
        elif isinstance(item, ast.Assign):
            for target in reversed(item.targets):
                stack.append(("target", target))
            stack.append(item.value)
        elif isinstance(item, tuple):
            _, target = item
            sub: list[Access] = []
            _target_accesses(target, sub)
            stack.extend(reversed(sub))
        elif isinstance(item, ast.AugAssign):
            if isinstance(item.target, ast.Name):
                stack.append(Access(item.target.id, WRITE, item.target))
                stack.append(item.value)
                stack.append(Access(item.target.id, READ, item.target))
            else:
                stack.append(item.value)
                stack.append(item.target)
        elif isinstance(item, ast.AnnAssign):
            if item.value is not None:
                stack.append(("target", item.target))
                stack.append(item.value)
            elif not isinstance(item.target, ast.Name):
                stack.append(item.target)
        elif isinstance(item, ast.NamedExpr):
            stack.append(("target", item.target))
            stack.append(item.value)
        elif isinstance(item, (ast.For, ast.AsyncFor, ast.comprehension)):
            stack.append(("target", item.target))
        elif isinstance(item, ast.withitem):
            if item.optional_vars is not None:
                stack.append(("target", item.optional_vars))
            stack.append(item.context_expr)
        elif isinstance(item, ast.Delete):
            for target in reversed(item.targets):
                stack.append(("target", target))
        elif isinstance(item, (ast.Import, ast.ImportFrom)):
            for alias in reversed(item.names):
                if alias.name == "*":
                    continue
                bound = alias.asname or alias.name.split(".")[0]
                stack.append(Access(bound, WRITE, alias))
        elif isinstance(item, (ast.Global, ast.Nonlocal)):
            continue
        elif isinstance(item, ast.Lambda):
            args = item.args
            stack.extend(reversed([*args.defaults, *(d for d in args.kw_defaults if d)]))
        elif isinstance(item, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
            stack.append(item.generators[0].iter)
        elif isinstance(item, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            continue
        elif isinstance(item, ast.pattern):
            sub = []
            _pattern_accesses(item, sub)
            stack.extend(reversed(sub))
        elif isinstance(item, ast.arguments):
            continue
        else:
            children = [c for c in ast.iter_child_nodes(item)
                        if not isinstance(c, (ast.expr_context, ast.arguments))]
            stack.extend(reversed(children))


def node_accesses(node: ControlFlowNode) -> list[Access]:
    """Variable accesses performed by one CFG node, in evaluation order."""
    kind = node.kind
    out: list[Access] = []
    if kind is NodeKind.EXIT:
        return out
    if kind is NodeKind.ARGS:
        if isinstance(node.ast_node, ast.arguments):
            args = node.ast_node
            params = [*args.posonlyargs, *args.args,
                      *([args.vararg] if args.vararg else []), *args.kwonlyargs,
                      *([args.kwarg] if args.kwarg else [])]
            return [Access(a.arg, WRITE, a) for a in params]
        return [Access(name, WRITE, None) for name in node.names]
    if kind is NodeKind.BINDING:
        return [Access(node.names[0], WRITE, node.ast_node)]
    if kind is NodeKind.ITER_CREATE:
        _expr_accesses(node.ast_node, out)
        out.append(Access(node.iterator, WRITE, None))
        return out
    if kind is NodeKind.ITER_NEXT:
        out.append(Access(node.iterator, READ, None))
        _target_accesses(node.ast_node, out)
        return out
    if kind is NodeKind.PATTERN:
        _pattern_accesses(node.ast_node, out)
        return out
    st = node.ast_node
    if isinstance(st, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
        for expr in node.evaluated():
            _expr_accesses(expr, out)
        out.append(Access(st.name, WRITE, st))
        return out
    for expr in node.evaluated():
        _expr_accesses(expr, out)
    return out


def access_sites(graph: ControlFlowGraph) -> list[AccessSite]:
    sites = []
    for node in graph.nodes:
        for i, acc in enumerate(node_accesses(node)):
            sites.append(AccessSite(node.id, i, acc.name, acc.kind, acc.ast_node))
    return sites


def declared_nonlocal(graph: ControlFlowGraph, function: int) -> set[str]:
    """Names a scope declares ``global`` or ``nonlocal``."""
    names: set[str] = set()
    for node in graph.functions[function].nodes:
        if isinstance(node.ast_node, (ast.Global, ast.Nonlocal)):
            names.update(node.ast_node.names)
    return names


# -- the solver ------------------------------------------------------------------


@dataclass
class AnalysisSpec:
    """A gen/kill data-flow problem.

    ``gen`` and ``kill`` map each node to a set of facts.  The transfer
    function is ``gen | (incoming - kill)`` and the join is union, so the
    problem is monotone and the least fixed point exists.
    """

    direction: Direction
    gen: Mapping[Hashable, frozenset]
    kill: Mapping[Hashable, frozenset]
    include_interrupting: bool = False

    def transfer(self, node, incoming: frozenset) -> frozenset:
        return self.gen.get(node, frozenset()) | (incoming - self.kill.get(node, frozenset()))


@dataclass
class AnalysisState:
    """Facts holding on entry to (``inputs``) and exit from (``outputs``) each node."""

    inputs: dict
    outputs: dict

    def __eq__(self, other) -> bool:
        return (isinstance(other, AnalysisState) and self.inputs == other.inputs
                and self.outputs == other.outputs)


class EdgeList:
    """Minimal graph adapter for running the solver on arbitrary edge sets."""

    def __init__(self, nodes: Iterable, edges: Iterable[tuple]):
        self.nodes = list(nodes)
        self._succ = {n: [] for n in self.nodes}
        self._pred = {n: [] for n in self.nodes}
        for a, b in edges:
            self._succ[a].append(b)
            self._pred[b].append(a)

    def successors(self, node, interrupting: bool = False):
        return self._succ[node]

    def predecessors(self, node, interrupting: bool = False):
        return self._pred[node]


def _graph_nodes(graph) -> list:
    nodes = graph.nodes
    if nodes and isinstance(nodes[0], ControlFlowNode):
        return [n.id for n in nodes]
    return list(nodes)


def solve(graph, spec: AnalysisSpec, order: Sequence | None = None) -> AnalysisState:
    """Least fixed point of ``spec`` on ``graph`` by worklist iteration.

    ``graph`` is a ControlFlowGraph (nodes addressed by id) or anything with
    ``nodes``, ``successors`` and ``predecessors``.  ``order`` seeds the
    worklist; the result does not depend on it.
    """
    nodes = _graph_nodes(graph)
    forward = spec.direction is Direction.FORWARD
    interrupting = spec.include_interrupting

    def upstream(n):
        return graph.predecessors(n, interrupting) if forward else graph.successors(n, interrupting)

    def downstream(n):
        return graph.successors(n, interrupting) if forward else graph.predecessors(n, interrupting)

    before = {n: frozenset() for n in nodes}
    after = {n: frozenset() for n in nodes}
    work = deque(order if order is not None else nodes)
    queued = set(work)
    while work:
        n = work.popleft()
        queued.discard(n)
        incoming = frozenset().union(*(after[p] for p in upstream(n)))
        before[n] = incoming
        result = spec.transfer(n, incoming)
        if result != after[n]:
            after[n] = result
            for m in downstream(n):
                if m not in queued:
                    queued.add(m)
                    work.append(m)
    if forward:
        return AnalysisState(before, after)
    return AnalysisState(after, before)


def is_fixed_point(graph, spec: AnalysisSpec, state: AnalysisState) -> bool:
    """Whether one more application of the equations leaves ``state`` unchanged."""
    forward = spec.direction is Direction.FORWARD
    for n in _graph_nodes(graph):
        if forward:
            incoming = frozenset().union(*(state.outputs[p] for p in
                                           graph.predecessors(n, spec.include_interrupting)))
            if incoming != state.inputs[n] or spec.transfer(n, incoming) != state.outputs[n]:
                return False
        else:
            incoming = frozenset().union(*(state.inputs[s] for s in
                                           graph.successors(n, spec.include_interrupting)))
            if incoming != state.outputs[n] or spec.transfer(n, incoming) != state.inputs[n]:
                return False
    return True


# -- liveness --------------------------------------------------------------------


def liveness_universe(graph: ControlFlowGraph, function: int) -> set[str]:
    """Names local to a scope, plus those it declares global or nonlocal."""
    declared = declared_nonlocal(graph, function)
    local = {a.name for n in graph.functions[function].nodes for a in node_accesses(n)
             if a.kind == WRITE}
    return local | declared


def liveness_spec(graph: ControlFlowGraph, include_interrupting: bool = False) -> AnalysisSpec:
    gen: dict[int, frozenset] = {}
    kill: dict[int, frozenset] = {}
    universes = [liveness_universe(graph, f.index) for f in graph.functions]
    declared = [declared_nonlocal(graph, f.index) for f in graph.functions]
    for node in graph.nodes:
        universe = universes[node.function]
        exempt = declared[node.function]
        read, written = set(), set()
        for acc in node_accesses(node):
            if acc.name not in universe:
                continue
            if acc.kind == READ:
                if acc.name not in written:
                    read.add(acc.name)
            elif acc.name not in exempt:
                written.add(acc.name)
        gen[node.id] = frozenset(read)
        kill[node.id] = frozenset(written)
    return AnalysisSpec(Direction.BACKWARD, gen, kill, include_interrupting)


@dataclass
class Liveness:
    """Liveness results at node and block granularity."""

    graph: ControlFlowGraph
    state: AnalysisState
    show_synthetic: bool = False

    def _filter(self, names: frozenset) -> frozenset:
        if self.show_synthetic:
            return names
        return frozenset(n for n in names if not n.startswith("."))

    def live_in(self, node: ControlFlowNode | int) -> frozenset:
        nid = node if isinstance(node, int) else node.id
        return self._filter(self.state.inputs[nid])

    def live_out(self, node: ControlFlowNode | int) -> frozenset:
        nid = node if isinstance(node, int) else node.id
        return self._filter(self.state.outputs[nid])

    def block_live_in(self, block) -> frozenset:
        return self.live_in(block.nodes[0])

    def block_live_out(self, block) -> frozenset:
        return self.live_out(block.nodes[-1])

    def table(self, function: str | int | None = None) -> list[tuple[int, list[str], frozenset, frozenset]]:
        """Rows of (block number, sources, live in, live out), numbered from 1."""
        if function is None:
            blocks = self.graph.blocks
        else:
            fn = (self.graph.functions[function] if isinstance(function, int)
                  else self.graph.function(function))
            blocks = fn.blocks
        return [(i, b.sources("figure"), self.block_live_in(b), self.block_live_out(b))
                for i, b in enumerate(blocks, 1)]


def liveness(graph: ControlFlowGraph, include_interrupting: bool = False,
             show_synthetic: bool = False) -> Liveness:
    spec = liveness_spec(graph, include_interrupting)
    return Liveness(graph, solve(graph, spec), show_synthetic)


# -- last access -----------------------------------------------------------------


def last_access_spec(graph: ControlFlowGraph, sites: list[AccessSite] | None = None,
                     include_interrupting: bool = False) -> AnalysisSpec:
    if sites is None:
        sites = access_sites(graph)
    by_var: dict[tuple[int, str], set[AccessSite]] = {}
    by_node: dict[int, list[AccessSite]] = {}
    for s in sites:
        fn = graph.nodes[s.node].function
        by_var.setdefault((fn, s.name), set()).add(s)
        by_node.setdefault(s.node, []).append(s)
    gen: dict[int, frozenset] = {}
    kill: dict[int, frozenset] = {}
    for nid, node_sites in by_node.items():
        fn = graph.nodes[nid].function
        final: dict[str, AccessSite] = {}
        for s in node_sites:
            final[s.name] = s
        gen[nid] = frozenset(final.values())
        kill[nid] = frozenset().union(*(by_var[(fn, name)] for name in final))
    return AnalysisSpec(Direction.FORWARD, gen, kill, include_interrupting)


def last_access(graph: ControlFlowGraph,
                include_interrupting: bool = False) -> dict[AccessSite, frozenset[AccessSite]]:
    """For each access site, the sites that may be the previous access of its variable."""
    sites = access_sites(graph)
    spec = last_access_spec(graph, sites, include_interrupting)
    state = solve(graph, spec)
    result: dict[AccessSite, frozenset[AccessSite]] = {}
    by_node: dict[int, list[AccessSite]] = {}
    for s in sites:
        by_node.setdefault(s.node, []).append(s)
    for nid, node_sites in by_node.items():
        current: dict[str, set[AccessSite]] = {}
        for s in state.inputs[nid]:
            current.setdefault(s.name, set()).add(s)
        for s in node_sites:
            result[s] = frozenset(current.get(s.name, ()))
            current[s.name] = {s}
    return result


# -- loop variables --------------------------------------------------------------


def loop_variables(while_node: ast.AST, graph: ControlFlowGraph) -> set[str]:
    """Variables live on entry to a while loop and assigned inside it."""
    if not isinstance(while_node, ast.While):
        raise NotAWhileLoop(type(while_node).__name__)
    tests = graph.nodes_for_ast(while_node.test)
    if not tests:
        raise LookupError("while loop is not part of this graph")
    test = tests[0]
    live = liveness(graph, show_synthetic=True).live_in(test)
    fn = test.function
    written: set[str] = set()
    inside = {id(n) for n in ast.walk(while_node)}
    for node in graph.functions[fn].nodes:
        if node.ast_node is not None and id(node.ast_node) in inside:
            written.update(a.name for a in node_accesses(node) if a.kind == WRITE)
    return {name for name in live & written if not name.startswith(".")}


def reaching_definitions_spec(graph: ControlFlowGraph) -> AnalysisSpec:
    """Reaching definitions expressed on the same framework (an example, not a shipped analysis)."""
    sites = [s for s in access_sites(graph) if s.kind == WRITE]
    by_var: dict[tuple[int, str], set[AccessSite]] = {}
    for s in sites:
        by_var.setdefault((graph.nodes[s.node].function, s.name), set()).add(s)
    gen: dict[int, frozenset] = {}
    kill: dict[int, frozenset] = {}
    for node in graph.nodes:
        mine = [s for s in sites if s.node == node.id]
        final = {s.name: s for s in mine}
        gen[node.id] = frozenset(final.values())
        kill[node.id] = frozenset().union(*(by_var[(node.function, n)] for n in final)) if final else frozenset()
    return AnalysisSpec(Direction.FORWARD, gen, kill)
