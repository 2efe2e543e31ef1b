import pytest

from codegraphs.control_flow import NodeKind, NotFound, get_control_flow_graph
from codegraphs.frontend import ControlContextError, ParseStatus
from programs import LOOP_FN, GOLDEN, GOLDEN_STATEMENTS


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_statements(name):
    cfg = get_control_flow_graph(GOLDEN[name])
    assert cfg.labels(name) == GOLDEN_STATEMENTS[name]


def test_loop_fn_figure_labels():
    cfg = get_control_flow_graph(LOOP_FN)
    assert cfg.labels("fn1", style="figure") == [
        "x = 0", ".0 = range(5)", "i = next(.0)", "x += i", "return x"]


def test_loop_fn_blocks():
    cfg = get_control_flow_graph(LOOP_FN)
    fn = cfg.function("fn1")
    assert [b.sources("figure") for b in fn.blocks] == [
        ["x = 0", ".0 = range(5)"], ["i = next(.0)"], ["x += i"], ["return x"]]
    first = fn.blocks[0].id
    edges = {(a - first + 1, b - first + 1) for a, b in cfg.normal_edges
             if cfg.blocks[a].function == fn.index}
    assert edges == {(1, 2), (2, 3), (3, 2), (2, 4)}


def test_get_block_by_source():
    cfg = get_control_flow_graph(LOOP_FN)
    assert cfg.get_block_by_source("x+=i").sources() == ["x += i"]
    with pytest.raises(NotFound):
        cfg.get_block_by_source("y = 2")


def test_exit_blocks():
    cfg = get_control_flow_graph(LOOP_FN)
    exits = cfg.get_exit_blocks()
    assert any("return x" in b.sources() for b in exits)


@pytest.mark.parametrize("source, status", [
    ("return 1\n", ParseStatus.RETURN_OUTSIDE_FUNCTION),
    ("break\n", ParseStatus.BREAK_OUTSIDE_LOOP),
    ("if x:\n    continue\n", ParseStatus.CONTINUE_OUTSIDE_LOOP),
    ("for i in x:\n    def g():\n        break\n", ParseStatus.BREAK_OUTSIDE_LOOP),
    ("class C:\n    return 1\n", ParseStatus.RETURN_OUTSIDE_FUNCTION),
])
def test_control_context_errors(source, status):
    with pytest.raises(ControlContextError) as info:
        get_control_flow_graph(source)
    assert info.value.status is status


def test_first_context_error_in_source_order():
    with pytest.raises(ControlContextError) as info:
        get_control_flow_graph("break\nreturn 1\n")
    assert info.value.status is ParseStatus.BREAK_OUTSIDE_LOOP


def test_interrupting_edges_do_not_change_blocks():
    for source in GOLDEN.values():
        plain = get_control_flow_graph(source)
        full = get_control_flow_graph(source, include_interrupting=True)
        assert [b.sources() for b in plain.blocks] == [b.sources() for b in full.blocks]
        assert plain.interrupting_edges == []


def test_raise_has_interrupting_edge_to_handler():
    cfg = get_control_flow_graph(GOLDEN["fn7"], include_interrupting=True)
    raise_block = cfg.get_block_by_source("raise ValueError('N/A')")
    handler = cfg.block_of(cfg.get_node_by_source("ValueError"))
    assert handler.id in cfg.block_interrupting_successors(raise_block)


def test_finally_runs_on_return():
    source = "def f():\n    try:\n        return 1\n    finally:\n        cleanup()\n"
    cfg = get_control_flow_graph(source)
    ret = cfg.get_node_by_source("return 1")
    cleanup = cfg.get_node_by_source("cleanup()")
    assert cleanup.id in cfg.successors(ret.id)


def test_break_and_continue_targets():
    source = ("def f(xs):\n    for x in xs:\n        if x:\n            break\n"
              "        if not x:\n            continue\n        y = x\n    return 0\n")
    cfg = get_control_flow_graph(source)
    nxt = cfg.get_node_by_source("x ← iter")
    assert cfg.get_node_by_source("return 0").id in cfg.successors(cfg.get_node_by_source("x").id)
    assert nxt.id in cfg.successors(cfg.get_node_by_source("not x").id)


def test_while_else_and_match():
    source = ("def f(v):\n    while v:\n        v -= 1\n    else:\n        done()\n"
              "    match v:\n        case 0:\n            a = 1\n        case _:\n            a = 2\n"
              "    return a\n")
    cfg = get_control_flow_graph(source)
    labels = cfg.labels("f")
    assert "case 0" in labels and "case _" in labels and "done()" in labels


def test_nested_scopes_get_their_own_graphs():
    source = "def outer():\n    g = lambda a: a + 1\n    return [v for v in range(3)]\n"
    cfg = get_control_flow_graph(source)
    kinds = sorted(f.kind for f in cfg.functions)
    assert "lambda" in " ".join(kinds).lower()
    assert len(cfg.functions) >= 4


def test_every_node_has_exactly_one_block():
    cfg = get_control_flow_graph(GOLDEN["fn3"])
    seen = [n.id for b in cfg.blocks for n in b.nodes]
    assert sorted(seen) == [n.id for n in cfg.nodes]


def test_exit_nodes_are_pseudo():
    cfg = get_control_flow_graph(GOLDEN["fn8"])
    assert cfg.function("fn8").exit.kind is NodeKind.EXIT
    assert cfg.function("fn8").exit.is_pseudo
