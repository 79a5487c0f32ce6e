"""Structural parsing of student source into a syntax tree or diagnostics."""

from __future__ import annotations

import ast
from dataclasses import dataclass

from .source import SourceUnit

# Parser-reported kinds, normalized so downstream code never string-matches
# interpreter messages itself.
KIND_MISSING_COLON = "missing-colon"
KIND_BAD_INDENTATION = "bad-indentation"
KIND_UNCLOSED_BRACKET = "unclosed-bracket"
KIND_INVALID_SYNTAX = "invalid-syntax"


@dataclass(frozen=True)
class SyntaxDiagnostic:
    line: int  # 1-based, clamped into the source
    column: int  # 1-based
    message: str
    raw_kind: str


@dataclass(frozen=True)
class ParseOutcome:
    """Either a tree or diagnostics, never both."""

    tree: ast.Module | None
    diagnostics: tuple[SyntaxDiagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return self.tree is not None


def _kind_of(exc: SyntaxError) -> str:
    if isinstance(exc, (IndentationError, TabError)):
        return KIND_BAD_INDENTATION
    msg = exc.msg or ""
    if "expected ':'" in msg:
        return KIND_MISSING_COLON
    if "never closed" in msg or "unmatched" in msg or "unexpected EOF" in msg:
        return KIND_UNCLOSED_BRACKET
    return KIND_INVALID_SYNTAX


def parse_source(source: SourceUnit) -> ParseOutcome:
    """Parse the full module; on failure report the first failing position.

    Total over arbitrary text: every input yields a tree or at least one
    diagnostic.  The reported line is clamped into [1, line_count] so a
    diagnostic never points past the end of what the student submitted
    (the interpreter reports end-of-file errors one line beyond it).
    """
    try:
        tree = ast.parse(source.text)
        # the compiler also rejects semantically-invalid structure the bare
        # parser accepts ('return' outside a function, duplicate parameters)
        compile(source.text, "<student>", "exec")
    except SyntaxError as exc:
        bound = max(1, source.line_count)
        line = min(max(exc.lineno or 1, 1), bound)
        column = max(exc.offset or 1, 1)
        message = exc.msg or "invalid syntax"
        return ParseOutcome(
            tree=None,
            diagnostics=(
                SyntaxDiagnostic(
                    line=line, column=column, message=message, raw_kind=_kind_of(exc)
                ),
            ),
        )
    except (ValueError, MemoryError) as exc:
        # e.g. null bytes or pathological nesting; still a structured refusal
        return ParseOutcome(
            tree=None,
            diagnostics=(
                SyntaxDiagnostic(
                    line=1,
                    column=1,
                    message=f"source could not be parsed: {exc}",
                    raw_kind=KIND_INVALID_SYNTAX,
                ),
            ),
        )
    return ParseOutcome(tree=tree)
