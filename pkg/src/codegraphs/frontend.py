"""Parsing Python source into positioned syntax trees.

The trees are the standard library's ``ast`` nodes.  What this module adds is
input normalization (text, files honoring coding cookies, or ready-made
trees), a closed taxonomy of parse failures, and character-accurate source
spans for every node.
"""

from __future__ import annotations

import ast
import enum
import io
import os
import re
import sys
import tokenize
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

#: The grammar accepted is that of the interpreter this package targets.
GRAMMAR_VERSION = (3, 10)

#: Deepest syntax tree accepted before reporting a RecursionError status.
DEFAULT_MAX_DEPTH = 500

SourceInput = Union[str, os.PathLike, ast.AST]


class ParseStatus(str, enum.Enum):
    SUCCESS = "Success"
    SYNTAX_ERROR = "SyntaxError"
    INDENTATION_ERROR = "IndentationError"
    TAB_ERROR = "TabError"
    RECURSION_ERROR = "RecursionError"
    VALUE_ERROR = "ValueError"
    RETURN_OUTSIDE_FUNCTION = "ReturnOutsideFunction"
    BREAK_OUTSIDE_LOOP = "BreakOutsideLoop"
    CONTINUE_OUTSIDE_LOOP = "ContinueOutsideLoop"

    def __str__(self) -> str:
        return self.value


PARSER_STATUSES = (
    ParseStatus.SYNTAX_ERROR,
    ParseStatus.INDENTATION_ERROR,
    ParseStatus.TAB_ERROR,
    ParseStatus.RECURSION_ERROR,
    ParseStatus.VALUE_ERROR,
)
CONTEXT_STATUSES = (
    ParseStatus.RETURN_OUTSIDE_FUNCTION,
    ParseStatus.BREAK_OUTSIDE_LOOP,
    ParseStatus.CONTINUE_OUTSIDE_LOOP,
)


class AnalysisError(Exception):
    """Base class for errors that carry a ParseStatus category."""

    status: ParseStatus

    def __init__(self, status: ParseStatus, message: str,
                 lineno: int | None = None, offset: int | None = None):
        super().__init__(message)
        self.status = status
        self.message = message
        self.lineno = lineno
        self.offset = offset

    def __str__(self) -> str:
        where = f" (line {self.lineno})" if self.lineno else ""
        return f"{self.status.value}: {self.message}{where}"


class ParseFailure(AnalysisError):
    """The source was rejected by the parser."""


class ControlContextError(AnalysisError):
    """A return, break or continue appears where the language forbids it."""


class SourceDecodeError(Exception):
    """File bytes could not be decoded to text."""


@dataclass(frozen=True)
class SourceSpan:
    """A region of source text.

    Lines are 1-based, columns 0-based, and both columns and the character
    offsets count decoded characters rather than bytes.
    """

    start_line: int
    start_col: int
    end_line: int
    end_col: int
    char_start: int
    char_end: int

    def as_list(self) -> list[int]:
        return [self.start_line, self.start_col, self.end_line, self.end_col,
                self.char_start, self.char_end]

    def contains(self, other: SourceSpan) -> bool:
        return self.char_start <= other.char_start and other.char_end <= self.char_end


_LINE_BREAK = re.compile(r"\r\n|\r|\n")


class LineIndex:
    """Maps (line, byte column) positions to character offsets."""

    def __init__(self, text: str):
        self.text = text
        self.starts = [0]
        self.lines = []
        pos = 0
        for m in _LINE_BREAK.finditer(text):
            self.lines.append(text[pos:m.start()])
            pos = m.end()
            self.starts.append(pos)
        self.lines.append(text[pos:])

    def char_col(self, line: int, byte_col: int) -> int:
        if line - 1 >= len(self.lines):
            return 0
        text = self.lines[line - 1]
        if text.isascii():
            return byte_col
        return len(text.encode("utf-8")[:byte_col].decode("utf-8", errors="ignore"))

    def offset(self, line: int, col: int) -> int:
        if line - 1 >= len(self.starts):
            return len(self.text)
        return min(self.starts[line - 1] + col, len(self.text))

    def position(self, offset: int) -> tuple[int, int]:
        """Inverse of :meth:`offset`."""
        lo, hi = 0, len(self.starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - self.starts[lo]

    def span(self, char_start: int, char_end: int) -> SourceSpan:
        sl, sc = self.position(char_start)
        el, ec = self.position(char_end)
        return SourceSpan(sl, sc, el, ec, char_start, char_end)


def iter_child_nodes(node: ast.AST) -> Iterator[ast.AST]:
    """Children in field order, skipping expression contexts."""
    for name, value in ast.iter_fields(node):
        if name == "ctx":
            continue
        if isinstance(value, ast.AST):
            yield value
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, ast.AST):
                    yield item


def tree_depth(root: ast.AST) -> int:
    """Height of the tree in edges, computed without recursion."""
    best = 0
    stack = [(root, 0)]
    while stack:
        node, depth = stack.pop()
        best = max(best, depth)
        for child in iter_child_nodes(node):
            stack.append((child, depth + 1))
    return best


class Program:
    """A parsed module together with its source text and node spans."""

    def __init__(self, source: str, tree: ast.Module, path: Path | None = None):
        self.source = source
        self.tree = tree
        self.path = path
        self.lines = LineIndex(source)
        self._spans: dict[int, SourceSpan | None] | None = None

    def _own_span(self, node: ast.AST) -> tuple[int, int] | None:
        if getattr(node, "lineno", None) is None or getattr(node, "end_lineno", None) is None:
            return None
        start = self.lines.offset(node.lineno, self.lines.char_col(node.lineno, node.col_offset))
        end = self.lines.offset(node.end_lineno,
                                self.lines.char_col(node.end_lineno, node.end_col_offset))
        return start, max(start, end)

    def _compute_spans(self) -> dict[int, SourceSpan | None]:
        # Spans are widened to cover their children so that containment holds
        # even where the parser's own positions do not (decorators, for one).
        ranges: dict[int, tuple[int, int] | None] = {}
        order = []
        stack = [self.tree]
        while stack:
            node = stack.pop()
            order.append(node)
            stack.extend(iter_child_nodes(node))
        for node in reversed(order):
            rng = self._own_span(node)
            for child in iter_child_nodes(node):
                crng = ranges[id(child)]
                if crng is None:
                    continue
                rng = crng if rng is None else (min(rng[0], crng[0]), max(rng[1], crng[1]))
            ranges[id(node)] = rng
        ranges[id(self.tree)] = (0, len(self.source))
        return {k: None if v is None else self.lines.span(*v) for k, v in ranges.items()}

    def span(self, node: ast.AST) -> SourceSpan | None:
        """Span of ``node``; None for synthetic nodes that cover no text."""
        if self._spans is None:
            self._spans = self._compute_spans()
        return self._spans.get(id(node))

    def nodes(self) -> Iterator[ast.AST]:
        """All nodes in pre-order."""
        stack = [self.tree]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(list(iter_child_nodes(node))))


def read_source(path: str | os.PathLike) -> str:
    """Read a source file, honoring a coding cookie or BOM.

    Raises OSError when the file cannot be read and SourceDecodeError when
    its bytes do not decode.
    """
    data = Path(path).read_bytes()
    return decode_source(data)


def decode_source(data: bytes) -> str:
    try:
        encoding, _ = tokenize.detect_encoding(io.BytesIO(data).readline)
    except SyntaxError as exc:
        raise SourceDecodeError(str(exc)) from exc
    try:
        text = data.decode(encoding)
    except (UnicodeDecodeError, LookupError) as exc:
        raise SourceDecodeError(str(exc)) from exc
    if text.startswith("\ufeff"):
        text = text[1:]
    return text


def classify_failure(failure: BaseException) -> ParseStatus:
    """Map a parse failure or raw parser exception onto a ParseStatus."""
    if isinstance(failure, AnalysisError):
        return failure.status
    if isinstance(failure, TabError):
        return ParseStatus.TAB_ERROR
    if isinstance(failure, IndentationError):
        return ParseStatus.INDENTATION_ERROR
    if isinstance(failure, SyntaxError):
        return ParseStatus.SYNTAX_ERROR
    if isinstance(failure, (RecursionError, MemoryError)):
        return ParseStatus.RECURSION_ERROR
    if isinstance(failure, ValueError):
        return ParseStatus.VALUE_ERROR
    raise TypeError(f"not a parse failure: {failure!r}")


def parse_source(source: str, max_depth: int = DEFAULT_MAX_DEPTH) -> ast.Module:
    try:
        tree = ast.parse(source, type_comments=False)
    except (SyntaxError, ValueError, RecursionError, MemoryError) as exc:
        lineno = getattr(exc, "lineno", None)
        offset = getattr(exc, "offset", None)
        msg = getattr(exc, "msg", None) or str(exc) or type(exc).__name__
        raise ParseFailure(classify_failure(exc), msg, lineno, offset) from None
    if tree_depth(tree) > max_depth:
        raise ParseFailure(ParseStatus.RECURSION_ERROR,
                           f"syntax tree deeper than {max_depth}")
    return tree


def load(program: SourceInput | Program, max_depth: int = DEFAULT_MAX_DEPTH) -> Program:
    """Normalize any accepted input into a Program.

    ``str`` is source text, a path object names a file, and an ``ast.AST`` is
    used as-is with its unparsed rendering standing in as source text.
    """
    if isinstance(program, Program):
        return program
    if isinstance(program, ast.AST):
        tree = program if isinstance(program, ast.Module) else ast.Module(body=[program], type_ignores=[])
        return Program(unparse(tree), tree)
    if isinstance(program, os.PathLike):
        path = Path(program)
        source = read_source(path)
        return Program(source, parse_source(source, max_depth), path)
    if isinstance(program, str):
        return Program(program, parse_source(program, max_depth))
    raise TypeError(f"unsupported program input: {type(program).__name__}")


def parse(program: SourceInput, max_depth: int = DEFAULT_MAX_DEPTH) -> ast.Module:
    """Parse source text or a file into a module tree.

    Raises ParseFailure for rejected source, OSError for unreadable files and
    SourceDecodeError for undecodable bytes.
    """
    return load(program, max_depth).tree


def unparse(node: ast.AST) -> str:
    """Canonical source rendering: one statement per line, minimal parens."""
    limit = sys.getrecursionlimit()
    try:
        sys.setrecursionlimit(max(limit, 10_000))
        return ast.unparse(node)
    finally:
        sys.setrecursionlimit(limit)


def normalize_fragment(fragment: str) -> str:
    """Canonical form of a code fragment used for source lookups."""
    try:
        tree = ast.parse(fragment.strip())
    except (SyntaxError, ValueError):
        return " ".join(fragment.split())
    if len(tree.body) == 1 and isinstance(tree.body[0], ast.Expr):
        return unparse(tree.body[0].value)
    return unparse(tree)
