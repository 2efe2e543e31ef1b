"""Batch analysis of a source tree into status, edge-frequency and metric tables."""

from __future__ import annotations

import csv
import fnmatch
import io
import json
import math
import os
import signal
import statistics
import threading
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .control_flow import get_control_flow_graph
from .frontend import AnalysisError, ParseStatus, Program, SourceDecodeError, parse_source, \
    read_source
from .metrics import DEFAULT_CAP, InsufficientData, complexity_of_graph, complexity_regression, \
    count_loc, graph_metrics
from .program_graph import ALL_EDGE_TYPES, get_program_graph

INTERNAL_ERROR = "InternalError"
DECODE_ERROR = "DecodeError"
STATUSES = [s.value for s in ParseStatus] + [DECODE_ERROR, INTERNAL_ERROR]

# Row labels in table order; None marks a group header.
_STATUS_ROWS = [
    ("Success", ParseStatus.SUCCESS.value),
    ("ast.parse failures", None),
    ("  SyntaxError", ParseStatus.SYNTAX_ERROR.value),
    ("  IndentationError", ParseStatus.INDENTATION_ERROR.value),
    ("  TabError", ParseStatus.TAB_ERROR.value),
    ("  RecursionError", ParseStatus.RECURSION_ERROR.value),
    ("  ValueError", ParseStatus.VALUE_ERROR.value),
    ("RuntimeError", None),
    ("  return outside function", ParseStatus.RETURN_OUTSIDE_FUNCTION.value),
    ("  break outside loop", ParseStatus.BREAK_OUTSIDE_LOOP.value),
    ("  continue outside loop", ParseStatus.CONTINUE_OUTSIDE_LOOP.value),
    ("DecodeError", DECODE_ERROR),
    ("InternalError", INTERNAL_ERROR),
]
_GROUPS = {
    "ast.parse failures": [s.value for s in (ParseStatus.SYNTAX_ERROR, ParseStatus.INDENTATION_ERROR,
                                             ParseStatus.TAB_ERROR, ParseStatus.RECURSION_ERROR,
                                             ParseStatus.VALUE_ERROR)],
    "RuntimeError": [s.value for s in (ParseStatus.RETURN_OUTSIDE_FUNCTION,
                                       ParseStatus.BREAK_OUTSIDE_LOOP,
                                       ParseStatus.CONTINUE_OUTSIDE_LOOP)],
}

METRICS = [
    ("node_count", "Node Count"),
    ("edge_count", "Edge Count"),
    ("max_degree", "Maximum Degree"),
    ("mean_degree", "Mean Degree"),
    ("ast_height", "AST Height"),
    ("diameter", "Diameter"),
    ("max_betweenness", "Maximum Betweenness Centrality"),
    ("complexity", "Cyclomatic Complexity"),
    ("loc", "Lines of Code"),
]
HISTOGRAM_BINS = 50
DEFAULT_TIMEOUT = 30.0


class _Timeout(Exception):
    pass


def _on_alarm(signum, frame):
    raise _Timeout()


def analyze_file(path: str, root: str = "", cap: int = DEFAULT_CAP,
                 timeout: float | None = DEFAULT_TIMEOUT) -> dict:
    """Analyze one file; never raises.

    The record always has ``path``, ``status`` and ``message``; successful
    records add ``loc``, ``complexity``, ``metrics`` and ``edge_counts``.
    """
    rel = Path(os.path.relpath(path, root)).as_posix() if root else Path(path).as_posix()
    record = {"path": rel, "status": ParseStatus.SUCCESS.value, "message": ""}
    armed = (timeout is not None and timeout > 0 and hasattr(signal, "setitimer")
             and threading.current_thread() is threading.main_thread())
    if armed:
        previous = signal.signal(signal.SIGALRM, _on_alarm)
        signal.setitimer(signal.ITIMER_REAL, timeout)
    try:
        source = read_source(path)
        program = Program(source, parse_source(source))
        cfg = get_control_flow_graph(program)
        complexity = complexity_of_graph(cfg)
        pg = get_program_graph(program)
        record["loc"] = count_loc(source)
        record["complexity"] = complexity.__dict__.copy()
        record["metrics"] = graph_metrics(pg, cap).as_dict()
        record["edge_counts"] = {t.value: c for t, c in pg.census().items()}
    except AnalysisError as exc:
        record.update(status=exc.status.value, message=exc.message)
    except SourceDecodeError as exc:
        record.update(status=DECODE_ERROR, message=str(exc))
    except _Timeout:
        record.update(status=INTERNAL_ERROR, message=f"timed out after {timeout} s")
    except Exception as exc:  # a bad file must not end the run
        record.update(status=INTERNAL_ERROR, message=f"{type(exc).__name__}: {exc}")
    finally:
        if armed:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, previous)
    if record["status"] != ParseStatus.SUCCESS.value:
        for key in ("loc", "complexity", "metrics", "edge_counts"):
            record.pop(key, None)
    return record


def discover(root: str | os.PathLike, pattern: str = "*.py") -> list[str]:
    """Matching regular files under ``root``, symlinks neither followed nor listed."""
    root = os.fspath(root)
    if not os.path.isdir(root):
        raise NotADirectoryError(root)
    found = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames.sort()
        for name in filenames:
            full = os.path.join(dirpath, name)
            if fnmatch.fnmatch(name, pattern) and not os.path.islink(full):
                found.append(full)
    return sorted(found, key=lambda p: Path(os.path.relpath(p, root)).as_posix())


@dataclass
class CorpusReport:
    status_counts: dict
    edge_frequencies: dict
    metric_summaries: dict
    regression: dict | None
    histograms: dict
    failures_log: list
    records: list = field(repr=False)
    created: float = field(default_factory=time.time)

    @property
    def total(self) -> int:
        return len(self.records)


def _percentile(sorted_values: list, q: float):
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


def histogram(values: list, bins: int = HISTOGRAM_BINS) -> dict:
    """Uniform bins over [min, 99th percentile]; anything above lands in ``overflow``."""
    if not values:
        return {"lo": None, "hi": None, "counts": [0] * bins, "overflow": 0}
    ordered = sorted(values)
    lo, hi = ordered[0], _percentile(ordered, 0.99)
    counts = [0] * bins
    overflow = 0
    width = (hi - lo) / bins
    for v in ordered:
        if v > hi:
            overflow += 1
        elif width == 0:
            counts[0] += 1
        else:
            counts[min(bins - 1, int((v - lo) / width))] += 1
    return {"lo": lo, "hi": hi, "counts": counts, "overflow": overflow}


def _metric_values(records: list, key: str) -> list:
    out = []
    for r in records:
        if key == "complexity":
            out.append(r["complexity"]["M"])
        elif key == "loc":
            out.append(r["loc"])
        elif r["metrics"][key] is not None:
            out.append(r["metrics"][key])
    return out


def summarize(records: list) -> CorpusReport:
    records = sorted(records, key=lambda r: r["path"])
    total = len(records)
    counts = {s: 0 for s in STATUSES}
    for r in records:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    status_counts = {s: {"count": c, "percent": 100.0 * c / total if total else 0.0}
                     for s, c in counts.items()}
    ok = [r for r in records if r["status"] == ParseStatus.SUCCESS.value]
    edge_frequencies = {}
    for t in ALL_EDGE_TYPES:
        per = [r["edge_counts"][t.value] for r in ok]
        edge_frequencies[t.value] = {
            "total": sum(per),
            "mean_per_program": sum(per) / len(ok) if ok else 0.0,
            "percent": 100.0 * sum(1 for c in per if c) / len(ok) if ok else 0.0,
        }
    summaries, histograms = {}, {}
    for key, _ in METRICS:
        values = _metric_values(ok, key)
        if values:
            summaries[key] = {"min": min(values), "median": statistics.median(values),
                              "mean": statistics.fmean(values), "max": max(values), "n": len(values)}
        else:
            summaries[key] = {"min": None, "median": None, "mean": None, "max": None, "n": 0}
        histograms[key] = histogram(values)
    try:
        fit = complexity_regression([(r["loc"], r["complexity"]["M"]) for r in ok])
        regression = dict(fit.__dict__)
    except InsufficientData:
        regression = None
    failures = [{"path": r["path"], "status": r["status"], "message": r["message"]} for r in records]
    return CorpusReport(status_counts, edge_frequencies, summaries, regression, histograms,
                        failures, records)


def analyze_corpus(root: str | os.PathLike, cap: int = DEFAULT_CAP, workers: int = 1,
                   glob: str = "*.py", timeout: float | None = DEFAULT_TIMEOUT) -> CorpusReport:
    """Analyze every matching file under ``root``.

    With ``workers > 1`` files are spread over a process pool; the result is
    identical to a serial run.
    """
    root = os.fspath(root)
    paths = discover(root, glob)
    if workers <= 1 or len(paths) < 2:
        records = [analyze_file(p, root, cap, timeout) for p in paths]
    else:
        chunk = max(1, len(paths) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(analyze_file, paths, [root] * len(paths), [cap] * len(paths),
                                    [timeout] * len(paths), chunksize=chunk))
    return summarize(records)


# -- emission ---------------------------------------------------------------------

FORMATS = ("markdown", "csv", "jsonl")


def _fmt(value, digits: int = 2) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def status_table(report: CorpusReport) -> list[list[str]]:
    rows = [["Status", "# Programs", "Freq. (%)"]]
    total = report.total
    for label, key in _STATUS_ROWS:
        keys = _GROUPS[label] if key is None else [key]
        count = sum(report.status_counts[k]["count"] for k in keys)
        rows.append([label, str(count), _fmt(100.0 * count / total if total else 0.0)])
    rows.append(["Total", str(total), "100" if total else "0"])
    return rows


def edge_table(report: CorpusReport) -> list[list[str]]:
    rows = [["Edge Type", "# / Program", "Freq. (%)"]]
    for t, entry in report.edge_frequencies.items():
        rows.append([t, _fmt(entry["mean_per_program"], 1), _fmt(entry["percent"])])
    return rows


def metric_table(report: CorpusReport) -> list[list[str]]:
    rows = [["Metric", "Min", "Median", "Mean", "Max"]]
    for key, label in METRICS:
        s = report.metric_summaries[key]
        rows.append([label] + [_fmt(s[k], 1) if isinstance(s[k], float) else _fmt(s[k])
                               for k in ("min", "median", "mean", "max")])
    return rows


def _markdown(rows: list[list[str]]) -> str:
    head, *body = rows
    lines = ["| " + " | ".join(head) + " |", "|" + "|".join(["---"] + ["---:"] * (len(head) - 1)) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in body]
    return "\n".join(lines)


def _regression_line(report: CorpusReport) -> str:
    r = report.regression
    if r is None:
        return "Regression: insufficient data"
    return (f"Regression of complexity on LOC: slope {r['slope']:.6g}, intercept {r['intercept']:.6g}, "
            f"R^2 {r['r_squared']:.6f}, n {r['n']}, outliers excluded {r['outliers_excluded']}")


def render_markdown(report: CorpusReport) -> str:
    parts = ["## Graph construction status", _markdown(status_table(report)),
             "## Edge type frequencies", _markdown(edge_table(report)),
             "## Graph metrics", _markdown(metric_table(report)),
             "## Complexity vs. length", _regression_line(report)]
    return "\n\n".join(parts) + "\n"


def render_jsonl(report: CorpusReport, timestamp: bool = True) -> str:
    out = io.StringIO()

    def put(obj):
        out.write(json.dumps(obj, sort_keys=True, ensure_ascii=False))
        out.write("\n")

    header = {"record": "header", "files": report.total}
    if timestamp:
        header["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(report.created))
    put(header)
    for r in report.records:
        put({"record": "file", **r})
    put({"record": "status_counts", "data": report.status_counts})
    put({"record": "edge_frequencies", "data": report.edge_frequencies})
    put({"record": "metric_summaries", "data": report.metric_summaries})
    put({"record": "regression", "data": report.regression})
    put({"record": "histograms", "data": report.histograms})
    return out.getvalue()


def _csv_text(rows: list[list]) -> str:
    out = io.StringIO()
    csv.writer(out, lineterminator="\n").writerows(rows)
    return out.getvalue()


def render_csv(report: CorpusReport) -> dict[str, str]:
    files = {
        "status.csv": _csv_text(status_table(report)),
        "edge_types.csv": _csv_text(edge_table(report)),
        "metrics.csv": _csv_text(metric_table(report)),
        "files.csv": _csv_text([["path", "status", "message"]]
                               + [[f["path"], f["status"], f["message"]] for f in report.failures_log]),
    }
    r = report.regression or {}
    files["regression.csv"] = _csv_text([["slope", "intercept", "r_squared", "n", "outliers_excluded"],
                                         [r.get(k, "") for k in ("slope", "intercept", "r_squared", "n",
                                                                 "outliers_excluded")]])
    hist = [["metric", "lo", "hi", "overflow"] + [f"bin{i}" for i in range(HISTOGRAM_BINS)]]
    for key, h in report.histograms.items():
        hist.append([key, h["lo"], h["hi"], h["overflow"]] + h["counts"])
    files["histograms.csv"] = _csv_text(hist)
    return files


def emit_report(report: CorpusReport, format: str, out: str | os.PathLike | None) -> str | None:
    """Write the report.

    ``markdown`` and ``jsonl`` go to the file ``out`` (or are returned when
    ``out`` is None); ``csv`` writes one file per table into the directory
    ``out``.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")
    if format == "csv":
        if out is None:
            raise ValueError("csv output needs a directory")
        directory = Path(out)
        directory.mkdir(parents=True, exist_ok=True)
        for name, text in render_csv(report).items():
            (directory / name).write_text(text, encoding="utf-8")
        return None
    text = render_markdown(report) if format == "markdown" else render_jsonl(report)
    if out is None:
        return text
    Path(out).write_text(text, encoding="utf-8")
    return None
