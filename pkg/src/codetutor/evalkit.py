"""Gold-corpus preprocessing, accuracy metrics, and the benchmark runner.

Corpus format: UTF-8 JSON lines, one case per line, '#' comment lines
ignored.  Keys: id, source, stdin (optional), expected (list of
{category, tag}), origin.  Labels in the shipped corpus are derived by
running the reference interpreter (the auto-tagger below), not asserted
by hand.
"""

from __future__ import annotations

import ast
import builtins
import io
import json
import keyword
import tokenize
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .classifier import (
    TAG_INDENTATION,
    TAG_MEMORY,
    TAG_SYNTAX,
    TAG_TIMEOUT_LOOP,
    tag_for_exception,
)
from .errors import CorpusFormatError, EmptyGold, ZeroPreScore
from .parsing import KIND_BAD_INDENTATION, parse_source
from .pipeline import analyze
from .reports import STATUS_EXCEPTION, STATUS_MEMORY, STATUS_TIMEOUT
from .sandbox import SandboxConfig, SandboxExecutor
from .source import SourceUnit

CAT_SYNTAX = "syntax"
CAT_RUNTIME = "runtime"
CAT_LOGIC = "logic"
CLEAN_MARK = "CLEAN"  # pseudo-tag for clean-run controls in reports

# thresholds the benchmark must clear (exit status contract)
SYNTAX_ACCURACY_FLOOR = 1.0
RUNTIME_ACCURACY_FLOOR = 0.95
CLEAN_FALSE_POSITIVE_CAP = 1


@dataclass(frozen=True)
class GoldCase:
    id: str
    source: str
    stdin: str | None = None
    expected: tuple[tuple[str, str], ...] = ()  # (category, tag)
    origin: str = "fixture"

    @property
    def group(self) -> str:
        return self.expected[0][1] if self.expected else CLEAN_MARK

    @property
    def category(self) -> str:
        return self.expected[0][0] if self.expected else CLEAN_MARK.lower()


@dataclass
class EvalReport:
    accuracy: dict[str, float]
    confusion: dict[tuple[str, str], int]
    n: int
    correct: dict[str, int] = field(default_factory=dict)
    totals: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class GainScore:
    pre: float
    post: float
    delta: float


def compute_gain_score(pre: float, post: float) -> GainScore:
    """Relative improvement (post - pre) / pre x 100, one decimal."""
    if pre <= 0:
        raise ZeroPreScore(f"pre-test score must be positive, got {pre}")
    return GainScore(pre=pre, post=post, delta=round((post - pre) / pre * 100, 1))


def compute_accuracy(
    predictions: dict[str, list[str]], gold: list[GoldCase]
) -> EvalReport:
    """Per-category fraction of cases whose top prediction hits an expected tag.

    A clean-run control is correct when nothing is predicted for it.
    """
    if not gold:
        raise EmptyGold("no gold cases supplied")
    unknown = set(predictions) - {case.id for case in gold}
    if unknown:
        raise ValueError(f"predictions for unknown case ids: {sorted(unknown)}")

    correct: dict[str, int] = {}
    totals: dict[str, int] = {}
    confusion: dict[tuple[str, str], int] = {}
    for case in gold:
        ranked = predictions.get(case.id, [])
        top = ranked[0] if ranked else CLEAN_MARK
        category = case.category
        totals[category] = totals.get(category, 0) + 1
        expected_tags = {tag for _, tag in case.expected}
        hit = top in expected_tags if expected_tags else top == CLEAN_MARK
        if hit:
            correct[category] = correct.get(category, 0) + 1
        gold_tag = case.expected[0][1] if case.expected else CLEAN_MARK
        confusion[(gold_tag, top)] = confusion.get((gold_tag, top), 0) + 1

    accuracy = {
        category: correct.get(category, 0) / totals[category] for category in totals
    }
    return EvalReport(
        accuracy=accuracy,
        confusion=confusion,
        n=len(gold),
        correct=correct,
        totals=totals,
    )


# ── corpus io ──────────────────────────────────────────────────────────


def load_corpus(path: str | Path) -> list[GoldCase]:
    cases: list[GoldCase] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(line_no, f"invalid JSON: {exc.msg}")
        if not isinstance(data, dict):
            raise CorpusFormatError(line_no, "record is not an object")
        for key in ("id", "source"):
            if key not in data:
                raise CorpusFormatError(line_no, f"missing key {key!r}")
        if data["id"] in seen_ids:
            raise CorpusFormatError(line_no, f"duplicate id {data['id']!r}")
        seen_ids.add(data["id"])
        try:
            expected = tuple(
                (entry["category"], entry["tag"]) for entry in data.get("expected", [])
            )
        except (TypeError, KeyError):
            raise CorpusFormatError(line_no, "expected entries need category and tag")
        cases.append(
            GoldCase(
                id=data["id"],
                source=data["source"],
                stdin=data.get("stdin"),
                expected=expected,
                origin=data.get("origin", "fixture"),
            )
        )
    return cases


def save_corpus(path: str | Path, cases: list[GoldCase], header: str = "") -> None:
    lines = [f"# {line}" for line in header.splitlines() if line]
    for case in cases:
        record = {
            "id": case.id,
            "source": case.source,
            "expected": [{"category": c, "tag": t} for c, t in case.expected],
            "origin": case.origin,
        }
        if case.stdin is not None:
            record["stdin"] = case.stdin
        lines.append(json.dumps(record, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ── preprocessing: normalize, auto-tag, balance ────────────────────────


def _bound_names(tree: ast.Module) -> set[str]:
    bound: set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
            bound.add(node.id)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            bound.add(node.name)
            if not isinstance(node, ast.ClassDef):
                args = node.args
                for arg in [
                    *args.posonlyargs,
                    *args.args,
                    *args.kwonlyargs,
                    *filter(None, [args.vararg, args.kwarg]),
                ]:
                    bound.add(arg.arg)
        elif isinstance(node, ast.Import):
            for alias in node.names:
                bound.add(alias.asname or alias.name.split(".")[0])
        elif isinstance(node, ast.ImportFrom):
            for alias in node.names:
                if alias.name != "*":
                    bound.add(alias.asname or alias.name)
    return bound


def normalize_source(text: str) -> str:
    """Canonical form: identifiers v1, v2, ... in first-occurrence order,
    comments stripped, tabs as 4 spaces; keywords and builtins untouched.

    Syntax-broken sources pass through unchanged (they are tagged SYNTAX
    later).  Sources with f-strings keep their identifiers: the tokenizer
    cannot see inside them, so renaming would split a name.
    """
    try:
        tree = ast.parse(text)
        tokens = list(tokenize.generate_tokens(io.StringIO(text).readline))
    except (SyntaxError, tokenize.TokenError, ValueError):
        return text

    has_fstring = any(isinstance(n, ast.JoinedStr) for n in ast.walk(tree))
    bound = set() if has_fstring else _bound_names(tree)
    bound -= set(dir(builtins))

    rename: dict[str, str] = {}
    edits: dict[int, list[tuple[int, int, str]]] = {}
    for tok in tokens:
        row, col = tok.start
        if tok.type == tokenize.COMMENT:
            edits.setdefault(row, []).append((col, tok.end[1], ""))
        elif tok.type == tokenize.NAME and not keyword.iskeyword(tok.string):
            if tok.string in bound:
                if tok.string not in rename:
                    rename[tok.string] = f"v{len(rename) + 1}"
                edits.setdefault(row, []).append((col, tok.end[1], rename[tok.string]))

    lines = text.splitlines()
    for row, row_edits in edits.items():
        line = lines[row - 1]
        for col, end, replacement in sorted(row_edits, reverse=True):
            line = line[:col] + replacement + line[end:]
        lines[row - 1] = line
    normalized = [line.expandtabs(4).rstrip() for line in lines]
    out = "\n".join(normalized)
    if text.endswith("\n") and out and not out.endswith("\n"):
        out += "\n"
    return out


def auto_tag(case: GoldCase, executor: SandboxExecutor) -> GoldCase:
    """Label a case from its parse outcome or a sandbox run (the oracle)."""
    if case.expected:
        return case
    outcome = parse_source(SourceUnit(case.source))
    if not outcome.ok:
        kind = outcome.diagnostics[0].raw_kind
        tag = TAG_INDENTATION if kind == KIND_BAD_INDENTATION else TAG_SYNTAX
        return replace(case, expected=((CAT_SYNTAX, tag),), origin="generated")
    report = executor.execute(SourceUnit(case.source), stdin_text=case.stdin or "")
    if report.status == STATUS_TIMEOUT:
        return replace(case, expected=((CAT_RUNTIME, TAG_TIMEOUT_LOOP),), origin="generated")
    if report.status == STATUS_MEMORY:
        return replace(case, expected=((CAT_RUNTIME, TAG_MEMORY),), origin="generated")
    if report.status == STATUS_EXCEPTION and report.exception:
        tag = tag_for_exception(report.exception.type_name)
        return replace(case, expected=((CAT_RUNTIME, tag),), origin="generated")
    return replace(case, origin="generated")  # clean-run control


def balance_corpus(cases: list[GoldCase]) -> list[GoldCase]:
    """Duplicate under-represented tag groups round-robin until counts equalize.

    Only duplication, never mutation: every new case shares its source with
    an original and carries a derived id.
    """
    groups: dict[str, list[GoldCase]] = {}
    for case in cases:
        groups.setdefault(case.group, []).append(case)
    target = max(len(group) for group in groups.values())
    out = list(cases)
    for group in groups.values():
        need = target - len(group)
        for i in range(need):
            original = group[i % len(group)]
            out.append(replace(original, id=f"{original.id}#dup{i + 1}"))
    return out


def preprocess_corpus(
    cases: list[GoldCase],
    executor: SandboxExecutor | None = None,
    normalize: bool = True,
    balance: bool = True,
) -> list[GoldCase]:
    """The full preparation pass: normalization, auto-tagging, balancing."""
    executor = executor or SandboxExecutor(SandboxConfig(wall_timeout_ms=1_500))
    prepared = []
    for case in cases:
        if normalize:
            case = replace(case, source=normalize_source(case.source))
        prepared.append(auto_tag(case, executor))
    return balance_corpus(prepared) if balance else prepared


# ── benchmark ──────────────────────────────────────────────────────────

BENCHMARK_SANDBOX = SandboxConfig(wall_timeout_ms=1_500, pool_size=4)


def predict_corpus(
    cases: list[GoldCase], executor: SandboxExecutor
) -> dict[str, list[str]]:
    def one(case: GoldCase) -> tuple[str, list[str]]:
        result = analyze(
            SourceUnit(case.source), executor, stdin_text=case.stdin or ""
        )
        return case.id, result.ranked_tags()

    with ThreadPoolExecutor(max_workers=executor.config.pool_size) as pool:
        return dict(pool.map(one, cases))


def render_table(report: EvalReport) -> str:
    rows = [f"{'category':<10}{'accuracy':>10}{'correct':>10}{'n':>6}"]
    for category in (CAT_SYNTAX, CAT_RUNTIME, CAT_LOGIC, CLEAN_MARK.lower()):
        if category not in report.totals:
            continue
        pct = report.accuracy[category] * 100
        rows.append(
            f"{category:<10}{pct:>9.1f}%"
            f"{report.correct.get(category, 0):>10}{report.totals[category]:>6}"
        )
    rows.append(f"{'overall':<10}{'':>10}{sum(report.correct.values()):>10}{report.n:>6}")
    return "\n".join(rows)


def thresholds_pass(report: EvalReport) -> bool:
    syntax_ok = report.accuracy.get(CAT_SYNTAX, 1.0) >= SYNTAX_ACCURACY_FLOOR
    runtime_ok = report.accuracy.get(CAT_RUNTIME, 1.0) >= RUNTIME_ACCURACY_FLOOR
    clean_total = report.totals.get(CLEAN_MARK.lower(), 0)
    clean_misses = clean_total - report.correct.get(CLEAN_MARK.lower(), 0)
    return syntax_ok and runtime_ok and clean_misses <= CLEAN_FALSE_POSITIVE_CAP


def run_benchmark(
    corpus_path: str | Path, sandbox: SandboxConfig | None = None
) -> tuple[EvalReport, str]:
    """Score the full pipeline against a corpus file; returns report + table."""
    cases = load_corpus(corpus_path)
    executor = SandboxExecutor(sandbox or BENCHMARK_SANDBOX)
    predictions = predict_corpus(cases, executor)
    report = compute_accuracy(predictions, cases)
    return report, render_table(report)
