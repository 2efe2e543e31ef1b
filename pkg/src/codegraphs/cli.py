"""Command-line interface: ``codegraphs {cfg,pg,liveness,complexity,corpus}``.

Exit status is 0 on success, 1 when the input cannot be analyzed (the
failure category is printed to stderr) and 2 for usage errors.  Settings
resolve as command line, then ``--config`` file, then the
``CODEGRAPHS_WORKERS`` environment variable, then built-in defaults.
"""

from __future__ import annotations

import argparse
import ast
import json
import os
import sys
from pathlib import Path

from . import corpus, data_flow, export, metrics
from .control_flow import LABEL_STYLES, NotFound, get_control_flow_graph
from .frontend import AnalysisError, Program, SourceDecodeError, load, parse_source
from .program_graph import ALL_EDGE_TYPES, EdgeType, get_program_graph

EXIT_OK, EXIT_ANALYSIS, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "format": None,
    "interrupting": False,
    "edge_types": None,
    "cap": metrics.DEFAULT_CAP,
    "workers": 1,
    "label_style": "table",
    "output": None,
    "function": None,
    "glob": "*.py",
    "timeout": corpus.DEFAULT_TIMEOUT,
    "show_synthetic": False,
}
FORMATS = {
    "cfg": ("dot", "json"),
    "pg": ("dot", "json"),
    "liveness": ("text", "json"),
    "complexity": ("text", "json"),
    "corpus": corpus.FORMATS,
}
_BOOLEAN = {"interrupting", "show_synthetic"}
_INTEGER = {"cap", "workers"}


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codegraphs",
                                     description="Control-flow, data-flow and program graphs for Python.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def common(p: argparse.ArgumentParser, formats) -> None:
        p.add_argument("--format", choices=formats, default=None,
                       help=f"output format (default {formats[0]})")
        p.add_argument("-o", "--output", default=None, help="write to this path instead of stdout")
        p.add_argument("--config", default=None, metavar="PATH",
                       help="key=value file supplying defaults for these flags")

    p = sub.add_parser("cfg", help="control-flow graph of a file")
    p.add_argument("file", help="source file, or - for stdin")
    common(p, FORMATS["cfg"])
    p.add_argument("--interrupting", action="store_true", default=None,
                   help="include exception (interrupting) edges")
    p.add_argument("--function", default=None, help="only this function's blocks (dot)")
    p.add_argument("--label-style", choices=LABEL_STYLES, default=None,
                   help="instruction label convention (default table)")

    p = sub.add_parser("pg", help="program graph of a file")
    p.add_argument("file", help="source file, or - for stdin")
    common(p, FORMATS["pg"])
    p.add_argument("--edge-types", default=None, metavar="T1,T2",
                   help="comma-separated subset of: " + ", ".join(t.value for t in ALL_EDGE_TYPES))

    p = sub.add_parser("liveness", help="per-block live variables")
    p.add_argument("file", help="source file, or - for stdin")
    common(p, FORMATS["liveness"])
    p.add_argument("--function", default=None, help="function to report (default: the only one)")
    p.add_argument("--interrupting", action="store_true", default=None,
                   help="propagate along exception edges too")
    p.add_argument("--show-synthetic", action="store_true", default=None,
                   help="report synthetic iterator variables such as .0")

    p = sub.add_parser("complexity", help="cyclomatic complexity M = E - N + 2P")
    p.add_argument("file", help="source file, or - for stdin")
    common(p, FORMATS["complexity"])

    p = sub.add_parser("corpus", help="analyze a directory tree and emit report tables")
    p.add_argument("root", help="directory to scan")
    common(p, FORMATS["corpus"])
    p.add_argument("--cap", type=int, default=None,
                   help=f"skip diameter/betweenness above this node count (default {metrics.DEFAULT_CAP})")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default $CODEGRAPHS_WORKERS or 1)")
    p.add_argument("--glob", default=None, help="file name pattern (default *.py)")
    p.add_argument("--timeout", type=float, default=None,
                   help=f"seconds per file (default {corpus.DEFAULT_TIMEOUT:g})")
    return parser


def read_config(path: str) -> dict:
    settings = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{number}: unknown setting {key!r}")
        settings[key] = value
    return settings


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    if key in _BOOLEAN:
        lowered = value.lower()
        if lowered not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
            raise UsageError(f"{key} expects a boolean, got {value!r}")
        return lowered in ("1", "true", "yes", "on")
    if key in _INTEGER:
        try:
            return int(value)
        except ValueError:
            raise UsageError(f"{key} expects an integer, got {value!r}") from None
    if key == "timeout":
        try:
            return float(value)
        except ValueError:
            raise UsageError(f"timeout expects a number, got {value!r}") from None
    return value


def resolve(args: argparse.Namespace) -> dict:
    """Merge command line, config file, environment and defaults; validate."""
    config = read_config(args.config) if args.config else {}
    settings = {}
    for key, default in DEFAULTS.items():
        value = getattr(args, key, None)
        if value is None and key in config:
            value = config[key]
        if value is None and key == "workers" and os.environ.get("CODEGRAPHS_WORKERS"):
            value = os.environ["CODEGRAPHS_WORKERS"]
        settings[key] = _coerce(key, default if value is None else value)
    formats = FORMATS[args.command]
    if settings["format"] is None:
        settings["format"] = formats[0]
    if settings["format"] not in formats:
        raise UsageError(f"{args.command} does not support --format {settings['format']}")
    if settings["label_style"] not in LABEL_STYLES:
        raise UsageError(f"unknown label style {settings['label_style']!r}")
    if settings["workers"] < 1:
        raise UsageError("--workers must be at least 1")
    if settings["cap"] < 0:
        raise UsageError("--cap must be non-negative")
    if args.command == "corpus" and settings["format"] == "csv" and not settings["output"]:
        raise UsageError("--format csv writes a directory; give it with -o")
    if args.command == "cfg" and settings["format"] == "json" and settings["function"]:
        raise UsageError("--function applies to dot output only")
    if settings["edge_types"]:
        names = [t.strip() for t in str(settings["edge_types"]).split(",") if t.strip()]
        try:
            settings["edge_types"] = [EdgeType(t.upper()) for t in names]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return settings


def read_input(name: str) -> Program:
    if name == "-":
        source = sys.stdin.read()
        return Program(source, parse_source(source))
    path = Path(name)
    if not path.exists():
        raise FileNotFoundError(name)
    if path.is_dir():
        raise IsADirectoryError(name)
    return load(path)


def _write(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _default_function(program: Program) -> str | None:
    body = program.tree.body
    if len(body) == 1 and isinstance(body[0], (ast.FunctionDef, ast.AsyncFunctionDef)):
        return body[0].name
    return None


def _names(names) -> str:
    return "{" + ", ".join(sorted(names)) + "}" if names else "∅"


def cmd_cfg(args, s) -> int:
    cfg = get_control_flow_graph(read_input(args.file), include_interrupting=s["interrupting"])
    if s["format"] == "json":
        _write(export.to_json(cfg, indent=2) + "\n", s["output"])
    else:
        _write(export.to_dot(cfg, function=s["function"], label_style=s["label_style"]), s["output"])
    return EXIT_OK


def cmd_pg(args, s) -> int:
    pg = get_program_graph(read_input(args.file), s["edge_types"])
    text = export.to_json(pg, indent=2) + "\n" if s["format"] == "json" else export.to_dot(pg)
    _write(text, s["output"])
    return EXIT_OK


def cmd_liveness(args, s) -> int:
    program = read_input(args.file)
    cfg = get_control_flow_graph(program, include_interrupting=s["interrupting"])
    result = data_flow.liveness(cfg, include_interrupting=s["interrupting"],
                                show_synthetic=s["show_synthetic"])
    rows = result.table(s["function"] or _default_function(program))
    if s["format"] == "json":
        payload = [{"block": n, "sources": src, "live_in": sorted(i), "live_out": sorted(o)}
                   for n, src, i, o in rows]
        _write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", s["output"])
        return EXIT_OK
    lines = ["block\tin\tout\tsource"]
    for n, src, live_in, live_out in rows:
        lines.append(f"{n}\t{_names(live_in)}\t{_names(live_out)}\t{'; '.join(src)}")
    _write("\n".join(lines) + "\n", s["output"])
    return EXIT_OK


def cmd_complexity(args, s) -> int:
    r = metrics.cyclomatic_complexity(read_input(args.file))
    if s["format"] == "json":
        _write(json.dumps(r.__dict__) + "\n", s["output"])
    else:
        _write(f"M={r.M} E={r.E} N={r.N} P={r.P}\n", s["output"])
    return EXIT_OK


def cmd_corpus(args, s) -> int:
    if not os.path.isdir(args.root):
        raise FileNotFoundError(args.root)
    report = corpus.analyze_corpus(args.root, cap=s["cap"], workers=s["workers"], glob=s["glob"],
                                   timeout=s["timeout"])
    text = corpus.emit_report(report, s["format"], s["output"])
    if text is not None:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"cfg": cmd_cfg, "pg": cmd_pg, "liveness": cmd_liveness,
            "complexity": cmd_complexity, "corpus": cmd_corpus}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        settings = resolve(args)
        return COMMANDS[args.command](args, settings)
    except UsageError as exc:
        print(f"codegraphs: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"codegraphs: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except IsADirectoryError as exc:
        print(f"codegraphs: is a directory: {exc.filename or exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except AnalysisError as exc:
        print(f"codegraphs: {exc.status.value}: {exc.message}"
              + (f" (line {exc.lineno})" if exc.lineno else ""), file=sys.stderr)
        return EXIT_ANALYSIS
    except SourceDecodeError as exc:
        print(f"codegraphs: DecodeError: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except NotFound as exc:
        print(f"codegraphs: not found: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except OSError as exc:
        print(f"codegraphs: {exc.strerror or exc}: {exc.filename or ''}", file=sys.stderr)
        return EXIT_ANALYSIS


run = main

if __name__ == "__main__":
    sys.exit(main())
