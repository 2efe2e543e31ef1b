"""Control-flow graphs, data-flow analyses and program graphs for Python source."""

from .control_flow import (BasicBlock, ControlFlowGraph, ControlFlowNode, NodeKind, NotFound,
                           get_control_flow_graph)
from .data_flow import AnalysisSpec, Direction, last_access, liveness, loop_variables, solve
from .export import MalformedJson, SchemaVersionMismatch, from_json, to_dot, to_json
from .frontend import (AnalysisError, ControlContextError, ParseFailure, ParseStatus, Program,
                       SourceSpan, load, parse, unparse)
from .metrics import (ComplexityResult, GraphMetrics, InsufficientData, complexity_regression,
                      cyclomatic_complexity, graph_metrics)
from .program_graph import EdgeType, NodeClass, ProgramGraph, edge_type_census, get_program_graph

__version__ = "0.1.0"

__all__ = [
    "AnalysisError", "AnalysisSpec", "BasicBlock", "ComplexityResult", "ControlContextError",
    "ControlFlowGraph", "ControlFlowNode", "Direction", "EdgeType", "GraphMetrics",
    "InsufficientData", "MalformedJson", "NodeClass", "NodeKind", "NotFound", "ParseFailure",
    "ParseStatus", "Program", "ProgramGraph", "SchemaVersionMismatch", "SourceSpan",
    "complexity_regression", "cyclomatic_complexity", "edge_type_census", "from_json",
    "get_control_flow_graph", "get_program_graph", "graph_metrics", "last_access", "liveness",
    "load", "loop_variables", "parse", "solve", "to_dot", "to_json", "unparse",
]
