import math
import random

import networkx as nx
import pytest

from codegraphs import kernels
from codegraphs.metrics import (InsufficientData, complexity_regression, count_loc,
                                cyclomatic_complexity, graph_metrics, metrics_of)
from codegraphs.program_graph import get_program_graph
from fuzzing import rich_program, structured_program
from oracles import brute_diameter, brute_max_betweenness, ols
from programs import LOOP_FN, GOLDEN


@pytest.mark.parametrize("source, expected", [
    (GOLDEN["fn8"], 1), (LOOP_FN, 2), (GOLDEN["fn5"], 3), (GOLDEN["fn1"], 1), (GOLDEN["fn3"], 2)])
def test_complexity_examples(source, expected):
    r = cyclomatic_complexity(source)
    assert r.M == expected
    assert r.M == r.E - r.N + 2 * r.P


def test_module_level_components_are_counted():
    r = cyclomatic_complexity("x = 1\ndef f():\n    if x:\n        pass\n")
    assert r.P == 2 and r.M == r.E - r.N + 2 * r.P


@pytest.mark.parametrize("seed", range(100))
def test_complexity_counts_decisions(seed):
    source, decisions = structured_program(seed)
    assert cyclomatic_complexity(source).M == decisions + 1


def test_complexity_ignores_order_within_a_block():
    a = "def f(x, y):\n    x = 1\n    y = 2\n    if x:\n        y = 3\n"
    b = "def f(x, y):\n    y = 2\n    x = 1\n    if x:\n        y = 3\n"
    assert cyclomatic_complexity(a) == cyclomatic_complexity(b)


def test_single_node_graph():
    m = metrics_of(1, [])
    assert (m.node_count, m.edge_count, m.max_degree, m.ast_height, m.diameter) == (1, 0, 0, 0, 0)


def test_three_path():
    m = metrics_of(3, [(0, 1), (1, 2)])
    assert m.diameter == 2 and m.max_betweenness == 1.0


def test_multigraph_degree_counts_parallel_edges():
    m = metrics_of(2, [(0, 1), (0, 1), (1, 1)])
    assert m.edge_count == 3 and m.max_degree == 4 and m.diameter == 1
    assert m.mean_degree == pytest.approx(3.0)


def test_cap_skips_expensive_metrics():
    pg = get_program_graph(LOOP_FN)
    m = graph_metrics(pg, cap=10)
    assert m.skipped_expensive and m.diameter is None and m.max_betweenness is None
    assert graph_metrics(pg).diameter is not None


def test_empty_module_minimums():
    m = graph_metrics(get_program_graph(""))
    assert (m.node_count, m.edge_count, m.max_degree, m.ast_height, m.diameter) == (3, 2, 2, 1, 2)
    assert round(m.mean_degree, 1) == 1.3


def test_metrics_invariant_to_relabeling():
    pg = get_program_graph(GOLDEN["fn5"])
    n = len(pg.nodes)
    perm = list(range(n))
    random.Random(1).shuffle(perm)
    edges = [(e.src, e.dst) for e in pg.edges]
    field = [(e.src, e.dst) for e in pg.edges if e.type.value == "FIELD"]
    a = metrics_of(n, edges, field, pg.root)
    b = metrics_of(n, [(perm[u], perm[v]) for u, v in edges], [(perm[u], perm[v]) for u, v in field],
                   perm[pg.root])
    assert a.diameter == b.diameter and a.ast_height == b.ast_height
    assert a.max_betweenness == pytest.approx(b.max_betweenness, rel=1e-12)


@pytest.mark.parametrize("seed", range(12))
def test_random_graphs_against_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 40)
    g = nx.gnp_random_graph(n, rng.uniform(0.05, 0.4), seed=seed)
    edges = list(g.edges())
    m = metrics_of(n, edges)
    assert m.diameter == brute_diameter(n, edges)
    assert math.isclose(m.max_betweenness, brute_max_betweenness(n, edges), rel_tol=1e-9, abs_tol=1e-12)
    if n >= 3:
        assert math.isclose(m.max_betweenness, max(nx.betweenness_centrality(g).values()),
                            rel_tol=1e-9, abs_tol=1e-12)


BACKENDS = ["python"] + (["cython"] if kernels.compiled_brandes is not None else [])


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("edges", [
    [(0, 1)],                                   # two leaves facing each other
    [(0, 1), (1, 2)],
    [(0, 1), (0, 2), (0, 3), (0, 4)],           # star
    [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)],   # triangle with a tail
    [(0, 1), (2, 3), (3, 4), (4, 2), (4, 5)],   # two components
])
def test_pendant_vertices_exact(backend, edges):
    # degree-1 sources are not searched; their share is credited to the neighbour
    n = 1 + max(max(e) for e in edges)
    g = nx.Graph(edges)
    diameter, raw = kernels.brandes(*kernels.csr(n, edges), backend=backend)
    expected = nx.betweenness_centrality(g, normalized=False)
    assert raw == pytest.approx([expected[v] for v in range(n)], abs=1e-12)
    assert diameter == max(max(d.values()) for _, d in nx.all_pairs_shortest_path_length(g))


@pytest.mark.skipif(kernels.compiled_brandes is None, reason="extension not built")
@pytest.mark.parametrize("seed", range(5))
def test_backends_agree(seed):
    pg = get_program_graph(rich_program(seed))
    indptr, indices = kernels.csr(len(pg.nodes), [(e.src, e.dst) for e in pg.edges])
    d1, b1 = kernels.brandes(indptr, indices, "python")
    d2, b2 = kernels.brandes(indptr, indices, "cython")
    assert d1 == d2
    assert b1 == pytest.approx(b2, rel=1e-12, abs=1e-12)


def test_regression_exact_line():
    r = complexity_regression([(x, 2 * x) for x in range(1, 20)])
    assert r.r_squared == 1.0 and r.slope == pytest.approx(2.0)


def test_regression_excludes_outliers():
    rows = [(x, x + 1) for x in range(1, 10)] + [(1000, 3), (5, 500)]
    r = complexity_regression(rows)
    assert r.outliers_excluded == 2 and r.n == 9


def test_regression_matches_independent_ols():
    rng = random.Random(7)
    rows = [(x, round(0.3 * x + 2 + rng.gauss(0, 3))) for x in (rng.randint(1, 600) for _ in range(100))]
    r = complexity_regression(rows)
    slope, intercept, r2 = ols(*zip(*rows))
    assert r.slope == pytest.approx(slope, abs=1e-9)
    assert r.intercept == pytest.approx(intercept, abs=1e-9)
    assert r.r_squared == pytest.approx(r2, abs=1e-9)


@pytest.mark.parametrize("rows", [[], [(1, 1)], [(3, 1), (3, 2)], [(900, 1), (901, 2), (4, 4)]])
def test_regression_insufficient(rows):
    with pytest.raises(InsufficientData):
        complexity_regression(rows)


def test_loc_counts_non_empty_lines():
    assert count_loc("a = 1\n\n   \nb = 2\n") == 2
