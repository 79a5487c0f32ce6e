"""Fuse syntax, static, dynamic, and heuristic evidence into ranked errors.

Ranking is category-major (syntax, runtime, logic, static) with ascending
lines inside a category.  When dynamic evidence exists for a line, static
and heuristic findings on that same line are dropped: a real run beats a
guess about one.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from functools import lru_cache

from .linting import StaticFinding
from .parsing import KIND_BAD_INDENTATION, SyntaxDiagnostic
from .registry import load_bundled
from .reports import (
    STATUS_EXCEPTION,
    STATUS_MEMORY,
    STATUS_TIMEOUT,
    ExceptionRecord,
    RunReport,
)

TAG_SYNTAX = "SYNTAX"
TAG_INDENTATION = "INDENTATION"
TAG_NAME = "NAME"
TAG_TYPE = "TYPE"
TAG_VALUE = "VALUE"
TAG_KEY = "KEY"
TAG_INDEX = "INDEX"
TAG_ZERO_DIVISION = "ZERO_DIVISION"
TAG_RECURSION_LIMIT = "RECURSION_LIMIT"
TAG_ATTRIBUTE = "ATTRIBUTE"
TAG_IMPORT = "IMPORT"
TAG_ASSERTION = "ASSERTION"
TAG_TIMEOUT_LOOP = "TIMEOUT_LOOP"
TAG_MEMORY = "MEMORY"
TAG_LOGIC_SUSPECT = "LOGIC_SUSPECT"
TAG_OTHER = "OTHER"

TAGS = (
    TAG_SYNTAX,
    TAG_INDENTATION,
    TAG_NAME,
    TAG_TYPE,
    TAG_VALUE,
    TAG_KEY,
    TAG_INDEX,
    TAG_ZERO_DIVISION,
    TAG_RECURSION_LIMIT,
    TAG_ATTRIBUTE,
    TAG_IMPORT,
    TAG_ASSERTION,
    TAG_TIMEOUT_LOOP,
    TAG_MEMORY,
    TAG_LOGIC_SUSPECT,
    TAG_OTHER,
)

CAT_SYNTAX = "syntax"
CAT_STATIC = "static"
CAT_RUNTIME = "runtime"
CAT_LOGIC = "logic"

CONF_CERTAIN = "certain"
CONF_LIKELY = "likely"
CONF_SPECULATIVE = "speculative"

ORIGIN_STATIC = "static"
ORIGIN_DYNAMIC = "dynamic"
ORIGIN_HEURISTIC = "heuristic"
ORIGIN_PROVIDER = "provider"

_CATEGORY_RANK = {CAT_SYNTAX: 0, CAT_RUNTIME: 1, CAT_LOGIC: 2, CAT_STATIC: 3}

_STATIC_TAGS = {"UNDEFINED_NAME": TAG_NAME}


@dataclass(frozen=True)
class ClassifiedError:
    tag: str
    category: str
    line: int | None
    evidence: str
    origin: str
    confidence: str

    def to_payload(self) -> dict:
        return {
            "tag": self.tag,
            "category": self.category,
            "line": self.line,
            "evidence": self.evidence,
            "origin": self.origin,
            "confidence": self.confidence,
        }


@lru_cache(maxsize=1)
def _exception_tags() -> dict[str, str]:
    table = {}
    for rec in load_bundled("exception_tags"):
        table[rec["exception"]] = rec["tag"]
    return table


def known_exception_names() -> tuple[str, ...]:
    return tuple(_exception_tags())


def tag_for_exception(type_name: str) -> str:
    """Taxonomy tag for an exception class name; unknown names map to OTHER."""
    return _exception_tags().get(type_name, TAG_OTHER)


# ── traceback parsing ──────────────────────────────────────────────────

_TB_HEADER = re.compile(r"^Traceback \(most recent call last\):\s*$")
_TB_FILE = re.compile(r'^\s+File "(?P<path>.+?)", line (?P<line>\d+)(?:, in (?P<func>.+))?\s*$')
_EXC_LINE = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z0-9_.]*)(?::\s?(?P<msg>.*))?$")
_NAME_SUFFIX = re.compile(
    r"(?:Error|Exception|Warning|Interrupt|Exit|StopIteration|StopAsyncIteration|GeneratorExit)$"
)


def _looks_like_exception_name(name: str) -> bool:
    short = name.rsplit(".", 1)[-1]
    return short in _exception_tags() or bool(_NAME_SUFFIX.search(short))


def parse_traceback(stderr_text: str) -> ExceptionRecord | None:
    """Extract the last exception block from interpreter stderr.

    Fallback path for when the structured harness report is missing; on
    chained tracebacks the final (outermost) exception wins.  Returns None
    for text that does not contain a traceback.
    """
    lines = stderr_text.splitlines()
    header_rows = [i for i, l in enumerate(lines) if _TB_HEADER.match(l)]
    block = lines[header_rows[-1] :] if header_rows else lines

    frames: list[tuple[str, int, str]] = []
    for line in block:
        m = _TB_FILE.match(line)
        if m:
            frames.append(
                (m.group("func") or "<module>", int(m.group("line")), m.group("path"))
            )
    if not header_rows and not frames:
        return None  # not a traceback at all

    for raw in reversed(block):
        text = raw.strip()
        if not text or raw[:1].isspace():
            continue
        m = _EXC_LINE.match(text)
        if m and _looks_like_exception_name(m.group("name")):
            name = m.group("name").rsplit(".", 1)[-1]
            return ExceptionRecord(
                type_name=name,
                message=m.group("msg") or "",
                line=frames[-1][1] if frames else None,
                frames=tuple((f, n) for f, n, _ in frames),
            )
    return None


# ── classification ─────────────────────────────────────────────────────


def _from_syntax(diag: SyntaxDiagnostic) -> ClassifiedError:
    tag = TAG_INDENTATION if diag.raw_kind == KIND_BAD_INDENTATION else TAG_SYNTAX
    return ClassifiedError(
        tag=tag,
        category=CAT_SYNTAX,
        line=diag.line,
        evidence=diag.message,
        origin=ORIGIN_STATIC,
        confidence=CONF_CERTAIN,
    )


def _from_report(report: RunReport) -> list[ClassifiedError]:
    if report.status == STATUS_TIMEOUT:
        return [
            ClassifiedError(
                tag=TAG_TIMEOUT_LOOP,
                category=CAT_RUNTIME,
                line=None,
                evidence=f"execution was stopped after {report.wall_ms} ms",
                origin=ORIGIN_DYNAMIC,
                confidence=CONF_LIKELY,
            )
        ]
    if report.status == STATUS_MEMORY:
        detail = (
            f"{report.exception.type_name}: {report.exception.message}".rstrip(": ")
            if report.exception
            else "the memory limit was exceeded"
        )
        return [
            ClassifiedError(
                tag=TAG_MEMORY,
                category=CAT_RUNTIME,
                line=report.exception.line if report.exception else None,
                evidence=detail,
                origin=ORIGIN_DYNAMIC,
                confidence=CONF_LIKELY,
            )
        ]
    if report.status == STATUS_EXCEPTION and report.exception:
        exc = report.exception
        evidence = f"{exc.type_name}: {exc.message}" if exc.message else exc.type_name
        return [
            ClassifiedError(
                tag=tag_for_exception(exc.type_name),
                category=CAT_RUNTIME,
                line=exc.line,
                evidence=evidence,
                origin=ORIGIN_DYNAMIC,
                confidence=CONF_CERTAIN,
            )
        ]
    return []


def _from_finding(finding: StaticFinding) -> ClassifiedError:
    return ClassifiedError(
        tag=_STATIC_TAGS.get(finding.rule_id, TAG_OTHER),
        category=CAT_STATIC,
        line=finding.line,
        evidence=finding.friendly_text,
        origin=ORIGIN_STATIC,
        confidence=CONF_CERTAIN,
    )


def _sort_key(err: ClassifiedError):
    return (
        _CATEGORY_RANK[err.category],
        err.line if err.line is not None else 10**9,
        err.tag,
        err.evidence,
    )


def classify(
    syntax: list[SyntaxDiagnostic],
    findings: list[StaticFinding],
    report: RunReport | None,
    tree: ast.Module | None,
) -> list[ClassifiedError]:
    """Rank all evidence for one submission; deterministic and
    permutation-invariant in the findings argument."""
    errors: list[ClassifiedError] = [_from_syntax(d) for d in syntax]
    if report is not None:
        errors.extend(_from_report(report))
    if tree is not None:
        errors.extend(detect_logic_suspects(tree, report))

    taken_lines = {e.line for e in errors if e.line is not None}
    errors = [
        e
        for e in errors
        if not (e.category == CAT_LOGIC and _line_conflicts(e, errors))
    ]
    for finding in findings:
        classified = _from_finding(finding)
        if classified.line not in taken_lines:
            errors.append(classified)

    return sorted(set(errors), key=_sort_key)


def _line_conflicts(err: ClassifiedError, errors: list[ClassifiedError]) -> bool:
    if err.line is None:
        return False
    return any(
        other.line == err.line and other.origin == ORIGIN_DYNAMIC
        for other in errors
        if other is not err
    )


# ── logic-suspect heuristics ───────────────────────────────────────────


def _functions(tree: ast.Module):
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            yield node


def _param_names(fn) -> set[str]:
    args = fn.args
    return {
        a.arg
        for a in [
            *args.posonlyargs,
            *args.args,
            *args.kwonlyargs,
            *filter(None, [args.vararg, args.kwarg]),
        ]
    }


def _names_in(node: ast.AST) -> set[str]:
    return {
        n.id
        for n in ast.walk(node)
        if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load)
    }


def _guard_tests(fn):
    for node in ast.walk(fn):
        if isinstance(node, (ast.If, ast.IfExp, ast.While)):
            yield node.test
        elif isinstance(node, ast.Assert):
            yield node.test


def _division_by_len_suspects(tree) -> list[ClassifiedError]:
    suspects = []
    for fn in _functions(tree):
        params = _param_names(fn)
        guarded = {name for test in _guard_tests(fn) for name in _names_in(test)}
        for node in ast.walk(fn):
            if not isinstance(node, ast.BinOp):
                continue
            if not isinstance(node.op, (ast.Div, ast.FloorDiv, ast.Mod)):
                continue
            right = node.right
            if (
                isinstance(right, ast.Call)
                and isinstance(right.func, ast.Name)
                and right.func.id == "len"
                and len(right.args) == 1
                and isinstance(right.args[0], ast.Name)
            ):
                param = right.args[0].id
                if param in params and param not in guarded:
                    suspects.append(
                        ClassifiedError(
                            tag=TAG_LOGIC_SUSPECT,
                            category=CAT_LOGIC,
                            line=node.lineno,
                            evidence=(
                                f"unguarded division by collection length: "
                                f"len({param}) is 0 when {param} is empty"
                            ),
                            origin=ORIGIN_HEURISTIC,
                            confidence=CONF_SPECULATIVE,
                        )
                    )
    return suspects


def _int_base_recursion_suspects(tree) -> list[ClassifiedError]:
    suspects = []
    for fn in _functions(tree):
        params = _param_names(fn)
        recursive_param = None
        for node in ast.walk(fn):
            if (
                isinstance(node, ast.Call)
                and isinstance(node.func, ast.Name)
                and node.func.id == fn.name
            ):
                for arg in node.args:
                    if (
                        isinstance(arg, ast.BinOp)
                        and isinstance(arg.op, (ast.Sub, ast.Add))
                        and isinstance(arg.left, ast.Name)
                        and arg.left.id in params
                        and isinstance(arg.right, ast.Constant)
                        and isinstance(arg.right.value, int)
                    ):
                        recursive_param = arg.left.id
        if recursive_param is None:
            continue
        has_eq_base = any(
            isinstance(test, ast.Compare)
            and isinstance(test.left, ast.Name)
            and test.left.id == recursive_param
            and len(test.ops) == 1
            and isinstance(test.ops[0], ast.Eq)
            and isinstance(test.comparators[0], ast.Constant)
            and isinstance(test.comparators[0].value, int)
            for test in _guard_tests(fn)
        )
        if not has_eq_base:
            continue
        for node in ast.walk(tree):
            if (
                isinstance(node, ast.Call)
                and isinstance(node.func, ast.Name)
                and node.func.id == fn.name
                and any(
                    isinstance(a, ast.Constant)
                    and isinstance(a.value, float)
                    for a in node.args
                )
            ):
                suspects.append(
                    ClassifiedError(
                        tag=TAG_LOGIC_SUSPECT,
                        category=CAT_LOGIC,
                        line=node.lineno,
                        evidence=(
                            f"base case unreachable for non-integer input: "
                            f"'{fn.name}' counts down to an exact integer, but "
                            f"this call passes a float"
                        ),
                        origin=ORIGIN_HEURISTIC,
                        confidence=CONF_SPECULATIVE,
                    )
                )
    return suspects


def _block_always_returns(stmts: list[ast.stmt]) -> bool:
    for stmt in stmts:
        if isinstance(stmt, (ast.Return, ast.Raise)):
            return True
        if isinstance(stmt, ast.If) and stmt.orelse:
            if _block_always_returns(stmt.body) and _block_always_returns(stmt.orelse):
                return True
    return False


def _missing_return_suspects(tree) -> list[ClassifiedError]:
    suspects = []
    fall_through = {}
    for fn in _functions(tree):
        returns_value = any(
            isinstance(n, ast.Return) and n.value is not None for n in ast.walk(fn)
        )
        assigns_something = any(
            isinstance(n, (ast.Assign, ast.AugAssign)) for n in ast.walk(fn)
        )
        if not _block_always_returns(fn.body) and (returns_value or assigns_something):
            fall_through[fn.name] = fn
    if not fall_through:
        return suspects
    bare_calls = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Expr) and isinstance(node.value, ast.Call):
            bare_calls.add(id(node.value))
    for node in ast.walk(tree):
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in fall_through
            and id(node) not in bare_calls
        ):
            suspects.append(
                ClassifiedError(
                    tag=TAG_LOGIC_SUSPECT,
                    category=CAT_LOGIC,
                    line=node.lineno,
                    evidence=(
                        f"this uses the result of '{node.func.id}', but that "
                        f"function can finish without returning a value, which "
                        f"gives None"
                    ),
                    origin=ORIGIN_HEURISTIC,
                    confidence=CONF_SPECULATIVE,
                )
            )
    return suspects


def _stuck_loop_suspects(tree) -> list[ClassifiedError]:
    suspects = []
    for node in ast.walk(tree):
        if not isinstance(node, ast.While):
            continue
        body_escapes = any(
            isinstance(n, (ast.Break, ast.Return, ast.Raise))
            for stmt in node.body
            for n in ast.walk(stmt)
        )
        if body_escapes:
            continue
        test_names = _names_in(node.test)
        if not test_names:
            if isinstance(node.test, ast.Constant) and node.test.value:
                suspects.append(_stuck_loop(node, "its condition is always true"))
            continue
        mutated: set[str] = set()
        for stmt in node.body:
            for n in ast.walk(stmt):
                if isinstance(n, ast.Name) and isinstance(n.ctx, (ast.Store, ast.Del)):
                    mutated.add(n.id)
                elif isinstance(n, ast.AugAssign) and isinstance(n.target, ast.Name):
                    mutated.add(n.target.id)
                elif (
                    isinstance(n, ast.Call)
                    and isinstance(n.func, ast.Attribute)
                    and isinstance(n.func.value, ast.Name)
                ):
                    mutated.add(n.func.value.id)  # e.g. items.pop()
        if not (test_names & mutated):
            suspects.append(
                _stuck_loop(node, "its body never changes the values it checks")
            )
    return suspects


def _stuck_loop(node: ast.While, why: str) -> ClassifiedError:
    return ClassifiedError(
        tag=TAG_LOGIC_SUSPECT,
        category=CAT_LOGIC,
        line=node.lineno,
        evidence=f"this loop can never finish: {why}",
        origin=ORIGIN_HEURISTIC,
        confidence=CONF_SPECULATIVE,
    )


def detect_logic_suspects(
    tree: ast.Module, report: RunReport | None = None
) -> list[ClassifiedError]:
    """Seeded heuristics for likely semantic defects.

    Results are always speculative and never outrank run-evidenced errors;
    a suspect on the same line as dynamic evidence is dropped as redundant.
    """
    suspects = (
        _division_by_len_suspects(tree)
        + _int_base_recursion_suspects(tree)
        + _missing_return_suspects(tree)
        + _stuck_loop_suspects(tree)
    )
    if report is not None and report.exception and report.exception.line is not None:
        suspects = [s for s in suspects if s.line != report.exception.line]
    return sorted(set(suspects), key=_sort_key)
