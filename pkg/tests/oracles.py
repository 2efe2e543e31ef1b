"""Independent reference computations the package is checked against.

Nothing here calls into the code under test beyond reading graph structure.
"""

from __future__ import annotations

import ast
from collections import deque

import numpy as np

from codegraphs.control_flow import NodeKind
from codegraphs.data_flow import AnalysisState, Direction


# -- shortest paths ------------------------------------------------------------------


def simple_adjacency(n: int, edges) -> list[set[int]]:
    adj = [set() for _ in range(n)]
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    return adj


def all_pairs(n: int, edges) -> np.ndarray:
    """Floyd-Warshall distances; inf where unreachable."""
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, nbrs in enumerate(simple_adjacency(n, edges)):
        for v in nbrs:
            d[u, v] = 1
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def path_counts(n: int, edges, dist: np.ndarray) -> np.ndarray:
    """sigma[s, t]: number of shortest s-t paths, built layer by layer from ``dist``."""
    adj = simple_adjacency(n, edges)
    sigma = np.zeros((n, n))
    for s in range(n):
        sigma[s, s] = 1
        order = sorted((t for t in range(n) if np.isfinite(dist[s, t])), key=lambda t: dist[s, t])
        for t in order:
            if t != s:
                sigma[s, t] = sum(sigma[s, u] for u in adj[t] if dist[s, u] == dist[s, t] - 1)
    return sigma


def brute_diameter(n: int, edges) -> int:
    if n == 0:
        return 0
    d = all_pairs(n, edges)
    return int(d[np.isfinite(d)].max())


def brute_max_betweenness(n: int, edges) -> float:
    """Max over v of sum_{s<t} sigma_st(v)/sigma_st, normalized by (n-1)(n-2)/2."""
    if n < 3:
        return 0.0
    d = all_pairs(n, edges)
    sigma = path_counts(n, edges, d)
    finite = np.isfinite(d)
    best = 0.0
    for v in range(n):
        on_path = finite[:, [v]] & finite[[v], :] & (d[:, [v]] + d[[v], :] == d)
        mask = on_path.copy()
        mask[v, :] = False
        mask[:, v] = False
        np.fill_diagonal(mask, False)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(mask, sigma[:, [v]] * sigma[[v], :] / np.where(mask, sigma, 1), 0.0)
        best = max(best, frac.sum() / 2)
    return best / ((n - 1) * (n - 2) / 2)


# -- least squares -------------------------------------------------------------------


def ols(xs, ys) -> tuple[float, float, float]:
    """Slope, intercept and R^2 through numpy's least-squares solver."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - (slope * x + intercept)
    ss_tot = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 - (residual ** 2).sum() / ss_tot if ss_tot else 1.0
    return float(slope), float(intercept), float(r2)


# -- data flow -----------------------------------------------------------------------


def _loads(node: ast.AST) -> set[str]:
    return {n.id for n in ast.walk(node) if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load)}


def _stores(node: ast.AST) -> set[str]:
    return {n.id for n in ast.walk(node) if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Store)}


def uses_defs(node) -> tuple[set[str], set[str]]:
    """Reads and writes of a statement-level node from the structured fuzzer's vocabulary."""
    kind, tree = node.kind, node.ast_node
    if kind is NodeKind.EXIT:
        return set(), set()
    if kind is NodeKind.ARGS:
        return set(), set(node.names)
    if kind is NodeKind.ITER_CREATE:
        return _loads(tree), {node.iterator}
    if kind is NodeKind.ITER_NEXT:
        return {node.iterator}, _stores(tree)
    if isinstance(tree, (ast.FunctionDef, ast.ClassDef)):
        header = [*tree.decorator_list] + (
            [*tree.args.defaults] if isinstance(tree, ast.FunctionDef) else [*tree.bases])
        return set().union(*(_loads(h) for h in header)), {tree.name}
    if isinstance(tree, ast.AugAssign):
        return {tree.target.id} | _loads(tree.value), {tree.target.id}
    if isinstance(tree, ast.Assign):
        return _loads(tree.value), set().union(*(_stores(t) for t in tree.targets))
    return _loads(tree), _stores(tree)


def liveness_by_paths(cfg, function: int) -> dict[int, frozenset]:
    """Live-in sets by enumerating simple paths: v is live at n when some path
    from n reaches a use of v with no write of v on the way."""
    nodes = [n.id for n in cfg.functions[function].nodes]
    ud = {n: uses_defs(cfg.nodes[n]) for n in nodes}
    universe = set().union(*(ud[n][1] for n in nodes)) if nodes else set()
    result = {}
    for start in nodes:
        live = set()
        for var in universe:
            stack = [(start, frozenset([start]))]
            found = False
            while stack and not found:
                n, seen = stack.pop()
                uses, defs = ud[n]
                if var in uses:
                    found = True
                elif var not in defs:
                    for m in cfg.successors(n):
                        if m not in seen:
                            stack.append((m, seen | {m}))
            if found:
                live.add(var)
        result[start] = frozenset(live)
    return result


def last_access_by_paths(cfg, sites) -> dict:
    """For each access site, the earlier sites of the same variable that can
    reach it along a path touching no other access of that variable."""
    by_node: dict[int, list] = {}
    for s in sites:
        by_node.setdefault(s.node, []).append(s)
    result = {}
    for target in sites:
        var, fn = target.name, cfg.nodes[target.node].function
        found = set()
        # same node, earlier index
        earlier = [s for s in by_node[target.node] if s.name == var and s.index < target.index]
        if earlier:
            found.add(max(earlier, key=lambda s: s.index))
        else:
            touched = {n for n, ss in by_node.items() if any(s.name == var for s in ss)}
            seen = set()
            frontier = deque(cfg.predecessors(target.node))
            while frontier:
                n = frontier.popleft()
                if n in seen or cfg.nodes[n].function != fn:
                    continue
                seen.add(n)
                if n in touched:
                    found.add(max((s for s in by_node[n] if s.name == var), key=lambda s: s.index))
                else:
                    frontier.extend(cfg.predecessors(n))
        result[target] = frozenset(found)
    return result


def round_robin(cfg, spec) -> AnalysisState:
    """Sweep every node in id order until nothing changes."""
    nodes = [n.id for n in cfg.nodes]
    forward = spec.direction is Direction.FORWARD
    before = {n: frozenset() for n in nodes}
    after = {n: frozenset() for n in nodes}
    changed = True
    while changed:
        changed = False
        for n in nodes:
            ups = cfg.predecessors(n) if forward else cfg.successors(n)
            incoming = frozenset().union(*(after[u] for u in ups))
            out = spec.transfer(n, incoming)
            if incoming != before[n] or out != after[n]:
                before[n], after[n] = incoming, out
                changed = True
    return AnalysisState(before, after) if forward else AnalysisState(after, before)
