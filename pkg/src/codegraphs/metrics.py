"""Cyclomatic complexity and whole-graph statistics."""

from __future__ import annotations

import ast
import statistics
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .control_flow import ControlFlowGraph, get_control_flow_graph
from .frontend import Program, SourceInput, load
from .program_graph import EdgeType, ProgramGraph

DEFAULT_CAP = 5000
LOC_CAP = 800
M_CAP = 200


@dataclass(frozen=True)
class ComplexityResult:
    M: int
    E: int
    N: int
    P: int


def _scope_closure(cfg: ControlFlowGraph, root: int) -> set[int]:
    keep = {root}
    for fn in cfg.functions:
        chain, seen = fn.index, []
        while chain is not None and chain not in keep:
            seen.append(chain)
            chain = cfg.functions[chain].parent
        if chain is not None:
            keep.update(seen)
    return keep


def complexity_of_graph(cfg: ControlFlowGraph) -> ComplexityResult:
    """M = E - N + 2P over basic blocks and normal edges.

    A module that is nothing but one function definition is measured as that
    function (and anything nested in it), leaving out the trivial module body.
    """
    functions = set(range(len(cfg.functions)))
    body = cfg.program.tree.body
    if len(body) == 1 and isinstance(body[0], (ast.FunctionDef, ast.AsyncFunctionDef)):
        for fn in cfg.functions:
            if fn.ast_node is body[0] and fn.parent == 0:
                functions = _scope_closure(cfg, fn.index)
                break
    blocks = [b.id for b in cfg.blocks if b.function in functions]
    edges = [(a, b) for a, b in cfg.normal_edges if cfg.blocks[a].function in functions]
    parent = {b: b for b in blocks}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    n, e = len(blocks), len(edges)
    p = len({find(b) for b in blocks})
    return ComplexityResult(e - n + 2 * p, e, n, p)


def cyclomatic_complexity(program: SourceInput | Program) -> ComplexityResult:
    return complexity_of_graph(get_control_flow_graph(load(program)))


@dataclass(frozen=True)
class GraphMetrics:
    node_count: int
    edge_count: int
    max_degree: int
    mean_degree: float
    ast_height: int
    diameter: int | None
    max_betweenness: float | None
    skipped_expensive: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def tree_height(n: int, tree_edges: Iterable[tuple[int, int]], root: int) -> int:
    children: dict[int, list[int]] = {}
    for u, v in tree_edges:
        children.setdefault(u, []).append(v)
    height = 0
    frontier = deque([(root, 0)])
    while frontier:
        v, d = frontier.popleft()
        height = max(height, d)
        frontier.extend((c, d + 1) for c in children.get(v, ()))
    return height


def metrics_of(n: int, edges: Sequence[tuple[int, int]], tree_edges: Iterable[tuple[int, int]] = (),
               root: int = 0, cap: int = DEFAULT_CAP, backend: str | None = None) -> GraphMetrics:
    """Statistics of an arbitrary directed multigraph read as undirected."""
    degree = [0] * n
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    skipped = n > cap
    diameter = betweenness = None
    if not skipped and n:
        indptr, indices = kernels.csr(n, edges)
        diameter, raw = kernels.brandes(indptr, indices, backend)
        scale = (n - 1) * (n - 2) / 2
        betweenness = max(raw) / scale if n >= 3 else 0.0
    return GraphMetrics(
        node_count=n,
        edge_count=len(edges),
        max_degree=max(degree, default=0),
        mean_degree=2 * len(edges) / n if n else 0.0,
        ast_height=tree_height(n, tree_edges, root) if n else 0,
        diameter=diameter,
        max_betweenness=betweenness,
        skipped_expensive=skipped,
    )


def graph_metrics(pg: ProgramGraph, cap: int = DEFAULT_CAP, backend: str | None = None) -> GraphMetrics:
    edges = [(e.src, e.dst) for e in pg.edges]
    tree = [(e.src, e.dst) for e in pg.edges if e.type is EdgeType.FIELD]
    return metrics_of(len(pg.nodes), edges, tree, pg.root, cap, backend)


# -- regression -------------------------------------------------------------------


class InsufficientData(ValueError):
    """Too few distinct points remain for a regression."""


@dataclass(frozen=True)
class Regression:
    slope: float
    intercept: float
    r_squared: float
    outliers_excluded: int
    n: int


def count_loc(source: str) -> int:
    """Non-empty lines of code."""
    return sum(1 for line in source.splitlines() if line.strip())


def complexity_regression(rows: Iterable[tuple[int, int]], loc_cap: int = LOC_CAP,
                          m_cap: int = M_CAP) -> Regression:
    """Least-squares fit of complexity against LOC, ignoring oversized programs."""
    rows = list(rows)
    kept = [(loc, m) for loc, m in rows if loc <= loc_cap and m <= m_cap]
    excluded = len(rows) - len(kept)
    if len(kept) < 2:
        raise InsufficientData(f"{len(kept)} rows after excluding {excluded}")
    xs = [float(x) for x, _ in kept]
    ys = [float(y) for _, y in kept]
    try:
        slope, intercept = statistics.linear_regression(xs, ys)
    except statistics.StatisticsError as exc:
        raise InsufficientData(str(exc)) from None
    mean_y = statistics.fmean(ys)
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    if ss_tot == 0:
        r2 = 1.0 if ss_res == 0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return Regression(slope, intercept, r2, excluded, len(kept))
