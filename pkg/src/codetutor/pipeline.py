"""End-to-end orchestration: parse, lint, sanitize, execute, classify, teach.

`analyze` is the shared analysis core (also used by the benchmark);
`run_pipeline` wraps it into the event protocol, choosing the feedback
mode from the session's retry history and persisting the submission.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from . import levels
from .classifier import ClassifiedError, classify
from .config import AppConfig
from .errors import SourceTooLarge
from .events import (
    EV_CONCEPT,
    EV_DIAGNOSIS,
    EV_DONE,
    EV_ERROR,
    EV_EXAMPLE,
    EV_NOTICE,
    EV_QUESTION,
    EV_RUN_REPORT,
    EV_SESSION,
    EV_STATIC_FINDINGS,
    EventBuilder,
    FeedbackEvent,
)
from .feedback import (
    MODE_DIRECT,
    MODE_SOCRATIC,
    FeedbackBundle,
    classify_intent,
    generate_feedback,
)
from .linting import StaticFinding, lint_source
from .parsing import ParseOutcome, parse_source
from .reports import STATUS_SANDBOX_ERROR, RunReport
from .sandbox import SandboxExecutor
from .sanitizer import DenyRegistry, SanitizerVerdict, rule_by_id, sanitize
from .source import SourceUnit
from .store import TutorStore

SANDBOX_UNAVAILABLE_NOTICE = (
    "The execution sandbox was unavailable, so this feedback is based on "
    "reading your code only."
)


@lru_cache(maxsize=8)
def _registry_from(path: str) -> DenyRegistry:
    return DenyRegistry.from_file(path)


def registry_for(config: AppConfig) -> DenyRegistry | None:
    """Deployment-supplied denylist, or None for the bundled one."""
    return _registry_from(config.denylist_path) if config.denylist_path else None


@dataclass
class AnalysisResult:
    source: SourceUnit
    outcome: ParseOutcome
    findings: list[StaticFinding]
    verdict: SanitizerVerdict | None
    report: RunReport | None
    errors: list[ClassifiedError]

    @property
    def blocked(self) -> bool:
        return self.verdict is not None and not self.verdict.allowed

    def ranked_tags(self) -> list[str]:
        """Non-static predictions, strongest first (what the benchmark scores)."""
        return [e.tag for e in self.errors if e.category != "static"]


def analyze(
    source: SourceUnit,
    executor: SandboxExecutor,
    level: str = levels.BEGINNER,
    stdin_text: str | None = None,
    registry: DenyRegistry | None = None,
) -> AnalysisResult:
    """Run the analysis pipeline; unparseable code is never executed."""
    outcome = parse_source(source)
    if not outcome.ok:
        errors = classify(list(outcome.diagnostics), [], None, None)
        return AnalysisResult(source, outcome, [], None, None, errors)

    findings = lint_source(outcome.tree, source, level)
    verdict = sanitize(outcome.tree, source, registry)
    if not verdict.allowed:
        return AnalysisResult(source, outcome, findings, verdict, None, [])

    report = executor.execute(source, stdin_text=stdin_text)
    errors = classify([], findings, report, outcome.tree)
    return AnalysisResult(source, outcome, findings, verdict, report, errors)


def _resolve_mode(
    requested: str | None,
    errors: list[ClassifiedError],
    store: TutorStore | None,
    pseudonym: str | None,
) -> str:
    """Socratic for the first encounter of a tag, direct after a retry."""
    if requested in (MODE_DIRECT, MODE_SOCRATIC):
        return requested
    if not errors:
        return MODE_DIRECT
    if store is None or pseudonym is None:
        return MODE_SOCRATIC
    seen = store.retry_count(pseudonym, errors[0].tag)
    return MODE_SOCRATIC if seen == 0 else MODE_DIRECT


def run_pipeline(
    text: str,
    config: AppConfig,
    executor: SandboxExecutor,
    *,
    pseudonym: str | None = None,
    store: TutorStore | None = None,
    query: str | None = None,
    mode: str | None = None,
    level: str | None = None,
    stdin_text: str | None = None,
) -> Iterator[FeedbackEvent]:
    """Yield protocol events for one submission as each stage completes."""
    build = EventBuilder()
    level = level or config.level
    if pseudonym is not None:
        yield build.emit(EV_SESSION, {"pseudonym": pseudonym})

    try:
        source = SourceUnit.from_text(text)
    except SourceTooLarge as exc:
        yield build.emit(EV_ERROR, {"code": "source_too_large", "message": str(exc)})
        return

    registry = registry_for(config)
    result = analyze(source, executor, level, stdin_text, registry)

    if result.findings:
        yield build.emit(
            EV_STATIC_FINDINGS,
            {
                "findings": [
                    {
                        "rule_id": f.rule_id,
                        "line": f.line,
                        "symbol": f.symbol,
                        "severity": f.severity,
                        "text": f.friendly_text,
                    }
                    for f in result.findings
                ]
            },
        )

    if result.blocked:
        # a block is pedagogy, not a bare refusal: name each rule and why
        yield build.emit(
            EV_NOTICE,
            {
                "kind": "sanitizer_block",
                "text": "This code was not run because it uses operations the "
                "sandbox does not allow.",
                "rules": [
                    {
                        "rule_id": v.rule_id,
                        "line": v.line,
                        "matched": v.matched,
                        "rationale": rule_by_id(v.rule_id, registry).rationale,
                    }
                    for v in result.verdict.violations
                ],
            },
        )
        yield build.emit(EV_DONE, {"errors": 0, "blocked": True})
        return

    sandbox_failed = (
        result.report is not None and result.report.status == STATUS_SANDBOX_ERROR
    )
    if sandbox_failed:
        yield build.emit(
            EV_NOTICE, {"kind": "sandbox_error", "text": SANDBOX_UNAVAILABLE_NOTICE}
        )
        errors = classify([], result.findings, None, result.outcome.tree)
    else:
        if result.report is not None:
            yield build.emit(EV_RUN_REPORT, result.report.to_payload())
        errors = result.errors

    intent = classify_intent(query)
    chosen_mode = _resolve_mode(mode, errors, store, pseudonym)
    bundle = generate_feedback(
        errors, source, intent, chosen_mode, level, config.provider
    )

    top = errors[0] if errors else None
    yield build.emit(
        EV_DIAGNOSIS,
        {
            "text": bundle.diagnosis,
            "line": top.line if top else None,
            "tag": top.tag if top else None,
            "mode": chosen_mode,
        },
    )
    if bundle.concept:
        yield build.emit(EV_CONCEPT, {"text": bundle.concept})
    if bundle.example is not None:
        yield build.emit(EV_EXAMPLE, {"code": bundle.example})
    elif bundle.socratic_question is not None:
        yield build.emit(EV_QUESTION, {"text": bundle.socratic_question})
    for notice in bundle.notices:
        yield build.emit(EV_NOTICE, {"kind": "info", "text": notice})

    if store is not None and pseudonym is not None:
        tags = tuple(dict.fromkeys(e.tag for e in errors))
        store.store_submission(pseudonym, source, bundle, tags)
        if top is not None:
            store.bump_retry(pseudonym, top.tag)

    yield build.emit(EV_DONE, {"errors": len(errors), "blocked": False})


def collect_events(*args, **kwargs) -> list[FeedbackEvent]:
    return list(run_pipeline(*args, **kwargs))


def bundle_from_events(events: list[FeedbackEvent]) -> FeedbackBundle | None:
    """Reassemble the bundle a stream delivered (CLI rendering helper)."""
    fields = {e.type: e.payload for e in events}
    if EV_DIAGNOSIS not in fields:
        return None
    return FeedbackBundle(
        diagnosis=fields[EV_DIAGNOSIS]["text"],
        concept=fields.get(EV_CONCEPT, {}).get("text", ""),
        example=fields.get(EV_EXAMPLE, {}).get("code"),
        socratic_question=fields.get(EV_QUESTION, {}).get("text"),
        notices=tuple(
            e.payload.get("text", "") for e in events if e.type == EV_NOTICE
        ),
        level="",
        provenance="",
    )
