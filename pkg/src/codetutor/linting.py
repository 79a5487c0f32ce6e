"""Novice-oriented static findings over a parsed syntax tree.

The rule set is deliberately small and phrased for beginners.  Style-only
rules (naming, line length, final newline) are suppressed at beginner
level so early feedback stays focused on behavior.
"""

from __future__ import annotations

import ast
import builtins
import re
from dataclasses import dataclass, replace

from . import levels
from .errors import UnknownRule
from .lexicons import filter_jargon
from .source import SourceUnit

SEV_INFO = "info"
SEV_WARN = "warn"
SEV_ERROR = "error"

# rule id -> (severity, style-only?, template)
RULES: dict[str, tuple[str, bool, str]] = {
    "UNUSED_VARIABLE": (
        SEV_WARN,
        False,
        "The variable '{symbol}' on line {line} is assigned but never used. "
        "If you meant to use it later, check for a typo; otherwise you can "
        "remove it.",
    ),
    "UNDEFINED_NAME": (
        SEV_ERROR,
        False,
        "The name '{symbol}' on line {line} is used but never given a value."
        "{detail}",
    ),
    "MISSING_DOCSTRING": (
        SEV_INFO,
        False,
        "Your {detail} '{symbol}' has no description. Adding a comment "
        "explaining your function's purpose (e.g. '# Calculates the average "
        "of a list') helps others understand your code.",
    ),
    "NAMING_CONVENTION": (
        SEV_INFO,
        True,
        "The name '{symbol}' on line {line} does not follow the usual style "
        "({detail}). Consistent names make code easier to read.",
    ),
    "LINE_LENGTH": (
        SEV_INFO,
        True,
        "Line {line} is very long ({detail} characters). Splitting it up "
        "makes it easier to read.",
    ),
    "MISSING_FINAL_NEWLINE": (
        SEV_INFO,
        True,
        "The file does not end with a newline. Most tools expect one final "
        "empty line.",
    ),
}

MAX_LINE_LENGTH = 99

_IMPLICIT_NAMES = {
    "__name__",
    "__file__",
    "__doc__",
    "__builtins__",
    "__debug__",
    "__spec__",
    "__loader__",
    "__package__",
    "__annotations__",
}

_SNAKE = re.compile(r"^_*[a-z][a-z0-9_]*_*$")
_PASCAL = re.compile(r"^_*[A-Z][A-Za-z0-9]*$")
_CONST = re.compile(r"^_*[A-Z][A-Z0-9_]*$")


@dataclass(frozen=True)
class StaticFinding:
    rule_id: str
    line: int
    symbol: str | None
    severity: str
    friendly_text: str
    detail: str = ""


def humanize_finding(finding: StaticFinding, level: str) -> str:
    """Instantiate the registry template for a finding at the given level."""
    if finding.rule_id not in RULES:
        raise UnknownRule(finding.rule_id)
    _, _, template = RULES[finding.rule_id]
    text = template.format(
        symbol=finding.symbol or "", line=finding.line, detail=finding.detail
    )
    if level == levels.BEGINNER:
        text = filter_jargon(text, level)
    return text


def edit_distance(a: str, b: str) -> int:
    """Plain Levenshtein distance (insert/delete/substitute, unit cost)."""
    if a == b:
        return 0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(
                min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
            )
        prev = cur
    return prev[-1]


class _NameCollector(ast.NodeVisitor):
    """Bindings, loads, and per-scope assignment targets for the whole tree."""

    def __init__(self):
        self.defined: dict[str, int] = {}  # name -> earliest binding line
        self.loads: dict[str, int] = {}  # name -> earliest load line
        # (scope id, name) -> earliest simple-assignment line; candidates for
        # the unused-variable rule
        self.assigned: dict[tuple[int, str], int] = {}
        self.used_anywhere: set[str] = set()
        self._scope = 0
        self._next_scope = 1

    def _define(self, name: str, line: int) -> None:
        self.defined.setdefault(name, line)

    def _assign_target(self, node: ast.expr) -> None:
        for leaf in ast.walk(node):
            if isinstance(leaf, ast.Name):
                key = (self._scope, leaf.id)
                self.assigned.setdefault(key, leaf.lineno)

    def visit_Name(self, node: ast.Name) -> None:
        if isinstance(node.ctx, ast.Load):
            self.loads.setdefault(node.id, node.lineno)
            self.used_anywhere.add(node.id)
        else:
            self._define(node.id, node.lineno)
        self.generic_visit(node)

    def _visit_scope(self, node) -> None:
        self._define(node.name, node.lineno)
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            args = node.args
            for arg in [
                *args.posonlyargs,
                *args.args,
                *args.kwonlyargs,
                *filter(None, [args.vararg, args.kwarg]),
            ]:
                self._define(arg.arg, arg.lineno)
        outer, self._scope = self._scope, self._next_scope
        self._next_scope += 1
        self.generic_visit(node)
        self._scope = outer

    visit_FunctionDef = _visit_scope
    visit_AsyncFunctionDef = _visit_scope
    visit_ClassDef = _visit_scope

    def visit_Assign(self, node: ast.Assign) -> None:
        for target in node.targets:
            self._assign_target(target)
        self.generic_visit(node)

    def visit_AnnAssign(self, node: ast.AnnAssign) -> None:
        if node.value is not None:
            self._assign_target(node.target)
        self.generic_visit(node)

    def visit_AugAssign(self, node: ast.AugAssign) -> None:
        # augmented assignment reads its target, so it is not "unused"
        if isinstance(node.target, ast.Name):
            self._define(node.target.id, node.lineno)
            self.used_anywhere.add(node.target.id)
        self.generic_visit(node)

    def visit_For(self, node: ast.For) -> None:
        self._assign_target(node.target)
        self.generic_visit(node)

    def visit_withitem(self, node: ast.withitem) -> None:
        if node.optional_vars is not None:
            self._assign_target(node.optional_vars)
        self.generic_visit(node)

    def visit_Import(self, node: ast.Import) -> None:
        for alias in node.names:
            self._define(alias.asname or alias.name.split(".")[0], node.lineno)
        self.generic_visit(node)

    def visit_ImportFrom(self, node: ast.ImportFrom) -> None:
        for alias in node.names:
            if alias.name != "*":
                self._define(alias.asname or alias.name, node.lineno)
        self.generic_visit(node)

    def visit_Global(self, node: ast.Global) -> None:
        for name in node.names:
            self.used_anywhere.add(name)

    visit_Nonlocal = visit_Global

    def visit_MatchAs(self, node) -> None:
        if node.name:
            self._define(node.name, getattr(node, "lineno", 1))
        self.generic_visit(node)


def _docstring_findings(tree: ast.Module) -> list[StaticFinding]:
    found = []
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            if ast.get_docstring(node) is None:
                kind = "class" if isinstance(node, ast.ClassDef) else "function"
                found.append(
                    StaticFinding(
                        rule_id="MISSING_DOCSTRING",
                        line=node.lineno,
                        symbol=node.name,
                        severity=SEV_INFO,
                        friendly_text="",
                        detail=kind,
                    )
                )
    return found


def _naming_findings(tree: ast.Module) -> list[StaticFinding]:
    found = []
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            if not _SNAKE.match(node.name):
                found.append(("function names use snake_case", node.name, node.lineno))
        elif isinstance(node, ast.ClassDef):
            if not _PASCAL.match(node.name):
                found.append(("class names use CapWords", node.name, node.lineno))
        elif isinstance(node, ast.Name) and isinstance(node.ctx, ast.Store):
            if not (_SNAKE.match(node.id) or _CONST.match(node.id)):
                found.append(("variable names use snake_case", node.id, node.lineno))
    seen = set()
    findings = []
    for detail, symbol, line in found:
        if symbol in seen:
            continue
        seen.add(symbol)
        findings.append(
            StaticFinding(
                rule_id="NAMING_CONVENTION",
                line=line,
                symbol=symbol,
                severity=SEV_INFO,
                friendly_text="",
                detail=detail,
            )
        )
    return findings


def lint_source(
    tree: ast.Module, source: SourceUnit, level: str = levels.BEGINNER
) -> list[StaticFinding]:
    """Deterministic findings for a tree produced by parse_source.

    Pure: identical inputs give identical output, ordered by line then rule.
    """
    collector = _NameCollector()
    collector.visit(tree)

    findings: list[StaticFinding] = []

    builtin_names = set(dir(builtins)) | _IMPLICIT_NAMES
    for name, line in sorted(collector.loads.items(), key=lambda kv: (kv[1], kv[0])):
        if name in collector.defined or name in builtin_names:
            continue
        distances = [
            (edit_distance(name, other), def_line, other)
            for other, def_line in collector.defined.items()
        ]
        candidates = [entry for entry in distances if entry[0] <= 2]
        detail = ""
        if candidates:
            _, _, best = min(candidates)
            detail = f" Did you mean '{best}'?"
        findings.append(
            StaticFinding(
                rule_id="UNDEFINED_NAME",
                line=line,
                symbol=name,
                severity=SEV_ERROR,
                friendly_text="",
                detail=detail,
            )
        )

    for (_, name), line in sorted(collector.assigned.items(), key=lambda kv: kv[1]):
        if name.startswith("_") or name in collector.used_anywhere:
            continue
        findings.append(
            StaticFinding(
                rule_id="UNUSED_VARIABLE",
                line=line,
                symbol=name,
                severity=SEV_WARN,
                friendly_text="",
            )
        )

    findings.extend(_docstring_findings(tree))

    if level != levels.BEGINNER:
        findings.extend(_naming_findings(tree))
        for line_no, text in enumerate(source.text.splitlines(), start=1):
            if len(text) > MAX_LINE_LENGTH:
                findings.append(
                    StaticFinding(
                        rule_id="LINE_LENGTH",
                        line=line_no,
                        symbol=None,
                        severity=SEV_INFO,
                        friendly_text="",
                        detail=str(len(text)),
                    )
                )
        if source.text and not source.text.endswith("\n"):
            findings.append(
                StaticFinding(
                    rule_id="MISSING_FINAL_NEWLINE",
                    line=max(1, source.line_count),
                    symbol=None,
                    severity=SEV_INFO,
                    friendly_text="",
                )
            )

    findings.sort(key=lambda f: (f.line, f.rule_id, f.symbol or ""))
    return [replace(f, friendly_text=humanize_finding(f, level)) for f in findings]
