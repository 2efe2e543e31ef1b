"""DOT and JSON serialization of control-flow and program graphs.

JSON documents (schema version ``"1"``) look like::

    {"version": "1", "kind": "program_graph" | "cfg", "root": 0,
     "source_sha256": "...",
     "nodes": [{"id", "class", "kind", "text", "span"}],
     "edges": [{"src", "dst", "type"}]}

Spans are ``[start_line, start_col, end_line, end_col, char_start, char_end]``
or null.  CFG documents carry ``function`` and ``block`` on each node, plus
``functions`` and ``blocks`` tables; their edge types are ``NORMAL`` and
``INTERRUPTING``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable

from .control_flow import ControlFlowGraph, NotFound
from .frontend import SourceSpan
from .program_graph import EdgeType, NodeClass, ProgramGraph, ProgramGraphNode, Edge

SCHEMA_VERSION = "1"


class SchemaVersionMismatch(ValueError):
    pass


class MalformedJson(ValueError):
    pass


def _sha(source: str | None) -> str | None:
    return None if source is None else hashlib.sha256(source.encode("utf-8")).hexdigest()


def _span(span: SourceSpan | None):
    return None if span is None else span.as_list()


# -- JSON -------------------------------------------------------------------------


def cfg_document(cfg: ControlFlowGraph) -> dict:
    nodes = [{"id": n.id, "class": "ControlFlowNode", "kind": n.kind.value,
              "text": n.label("table"),
              "span": _span(cfg.program.span(n.ast_node)) if n.ast_node is not None else None,
              "function": n.function, "block": n.block} for n in cfg.nodes]
    edges = [{"src": a, "dst": b, "type": "NORMAL"} for a, b in cfg.statement_edges]
    edges += [{"src": a, "dst": b, "type": "INTERRUPTING"} for a, b in cfg.interrupting_statement_edges]
    edges.sort(key=lambda e: (e["src"], e["dst"], e["type"]))
    return {
        "version": SCHEMA_VERSION,
        "kind": "cfg",
        "root": cfg.functions[0].entry.id,
        "source_sha256": _sha(cfg.program.source),
        "functions": [{"index": f.index, "name": f.name, "kind": f.kind, "parent": f.parent}
                      for f in cfg.functions],
        "blocks": [{"id": b.id, "function": b.function, "nodes": [n.id for n in b.nodes]}
                   for b in cfg.blocks],
        "nodes": nodes,
        "edges": edges,
    }


def program_graph_document(pg: ProgramGraph) -> dict:
    source = pg.program.source if pg.program is not None else None
    return {
        "version": SCHEMA_VERSION,
        "kind": "program_graph",
        "root": pg.root,
        "source_sha256": _sha(source) if source is not None else pg.source_sha256,
        "nodes": [{"id": n.id, "class": n.node_class.value, "kind": n.kind, "text": n.text,
                   "span": _span(n.span)} for n in pg.nodes],
        "edges": [{"src": e.src, "dst": e.dst, "type": e.type.value} for e in pg.edges],
    }


def to_json(graph: ControlFlowGraph | ProgramGraph, indent: int | None = None) -> str:
    if isinstance(graph, ControlFlowGraph):
        doc = cfg_document(graph)
    elif isinstance(graph, ProgramGraph):
        doc = program_graph_document(graph)
    elif isinstance(graph, CfgDocument):
        doc = graph.document
    else:
        raise TypeError(f"cannot serialize {type(graph).__name__}")
    return json.dumps(doc, indent=indent, ensure_ascii=False)


@dataclass
class CfgDocument:
    """A deserialized CFG: plain data, no syntax tree behind it."""

    document: dict = field(repr=False)

    def structure(self) -> tuple:
        return _cfg_structure(self.document)

    def __eq__(self, other) -> bool:
        if isinstance(other, ControlFlowGraph):
            return self.structure() == _cfg_structure(cfg_document(other))
        return isinstance(other, CfgDocument) and self.structure() == other.structure()


def _cfg_structure(doc: dict) -> tuple:
    return (doc["root"],
            tuple((n["id"], n["kind"], n["text"], n["function"], n["block"]) for n in doc["nodes"]),
            tuple((e["src"], e["dst"], e["type"]) for e in doc["edges"]),
            tuple((b["id"], b["function"], tuple(b["nodes"])) for b in doc["blocks"]))


def cfg_structure(cfg: ControlFlowGraph) -> tuple:
    return _cfg_structure(cfg_document(cfg))


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise MalformedJson(message)


def _read_span(raw) -> SourceSpan | None:
    if raw is None:
        return None
    _require(isinstance(raw, list) and len(raw) == 6 and all(type(x) is int for x in raw),
             f"bad span {raw!r}")
    return SourceSpan(*raw)


def from_json(text: str | bytes) -> ProgramGraph | CfgDocument:
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedJson(f"not JSON: {exc}") from None
    _require(isinstance(doc, dict), "top level must be an object")
    _require("version" in doc, "missing version")
    if doc["version"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"unsupported schema version {doc['version']!r}")
    for key in ("kind", "nodes", "edges", "root"):
        _require(key in doc, f"missing {key}")
    _require(isinstance(doc["nodes"], list) and isinstance(doc["edges"], list),
             "nodes and edges must be lists")
    ids = []
    for n in doc["nodes"]:
        _require(isinstance(n, dict) and type(n.get("id")) is int, f"bad node {n!r}")
        ids.append(n["id"])
    _require(ids == list(range(len(ids))), "node ids must be 0..n-1 in order")
    known = set(ids)
    for e in doc["edges"]:
        _require(isinstance(e, dict) and {"src", "dst", "type"} <= e.keys(), f"bad edge {e!r}")
        _require(e["src"] in known and e["dst"] in known, f"dangling edge {e!r}")
    _require(not ids or doc["root"] in known, "root is not a node")
    if doc["kind"] == "cfg":
        for key in ("blocks", "functions"):
            _require(isinstance(doc.get(key), list), f"missing {key}")
        for n in doc["nodes"]:
            _require({"kind", "text", "function", "block"} <= n.keys(), f"bad node {n!r}")
        for e in doc["edges"]:
            _require(e["type"] in ("NORMAL", "INTERRUPTING"), f"bad edge type {e['type']!r}")
        return CfgDocument(doc)
    _require(doc["kind"] == "program_graph", f"unknown kind {doc['kind']!r}")
    pg = ProgramGraph()
    pg.root = doc["root"]
    pg.source_sha256 = doc.get("source_sha256")
    for n in doc["nodes"]:
        try:
            cls = NodeClass(n["class"])
        except (KeyError, ValueError):
            raise MalformedJson(f"bad node class in {n!r}") from None
        _require(isinstance(n.get("kind"), str), f"bad node kind in {n!r}")
        text = n.get("text")
        _require(text is None or isinstance(text, str), f"bad node text in {n!r}")
        pg.nodes.append(ProgramGraphNode(n["id"], cls, n["kind"], text, _read_span(n.get("span"))))
    for e in doc["edges"]:
        try:
            kind = EdgeType(e["type"])
        except ValueError:
            raise MalformedJson(f"bad edge type {e['type']!r}") from None
        pg.edges.append(Edge(e["src"], e["dst"], kind))
    return pg


# -- DOT --------------------------------------------------------------------------


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(graph: ControlFlowGraph | ProgramGraph, include_interrupting: bool | None = None,
           edge_types: Iterable[EdgeType | str] | None = None, function: str | None = None,
           label_style: str = "table") -> str:
    """Render as a DOT digraph.

    CFGs draw one box per basic block, numbered from 1 in program order;
    interrupting edges are dashed.  ``function`` restricts a CFG to one
    function's blocks.  Program graph edges carry their type as label and
    can be filtered with ``edge_types``.
    """
    if isinstance(graph, ControlFlowGraph):
        return _cfg_dot(graph, include_interrupting, function, label_style)
    if isinstance(graph, ProgramGraph):
        return _pg_dot(graph, edge_types)
    raise TypeError(f"cannot render {type(graph).__name__}")


def _cfg_dot(cfg: ControlFlowGraph, include_interrupting: bool | None, function: str | None,
             style: str) -> str:
    if include_interrupting is None:
        include_interrupting = cfg.include_interrupting
    if function is None:
        blocks = list(cfg.blocks)
    else:
        fn = cfg.function(function)
        blocks = list(fn.blocks)
    number = {b.id: i + 1 for i, b in enumerate(blocks)}
    lines = ["digraph cfg {", "  node [shape=box, fontname=monospace];"]
    for b in blocks:
        text = "\n".join(b.sources(style)) or (b.label or "")
        lines.append(f"  b{number[b.id]} [label={_quote(text)}];")
    for a, c in cfg.normal_edges:
        if a in number and c in number:
            lines.append(f"  b{number[a]} -> b{number[c]};")
    if include_interrupting:
        for a, c in cfg.interrupting_edges:
            if a in number and c in number:
                lines.append(f"  b{number[a]} -> b{number[c]} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _pg_dot(pg: ProgramGraph, edge_types) -> str:
    wanted = None if edge_types is None else {EdgeType(t) for t in edge_types}
    lines = ["digraph program_graph {"]
    for n in pg.nodes:
        text = n.text if n.node_class is NodeClass.SYNTAX else (
            n.kind if n.text is None else f"{n.kind}: {n.text}")
        shape = "plaintext" if n.node_class is NodeClass.SYNTAX else "ellipse"
        lines.append(f"  n{n.id} [label={_quote(text)}, shape={shape}];")
    for e in pg.edges:
        if wanted is None or e.type in wanted:
            lines.append(f"  n{e.src} -> n{e.dst} [label={e.type.value}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = ["SCHEMA_VERSION", "SchemaVersionMismatch", "MalformedJson", "NotFound", "CfgDocument",
           "to_json", "from_json", "to_dot", "cfg_structure"]
