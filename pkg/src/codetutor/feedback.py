"""Pedagogical feedback: one error per bundle, three parts, two modes.

Direct mode fills diagnosis, concept, and a short example; Socratic mode
withholds the example and asks a guiding question instead.  Everything a
student reads goes through the jargon filter and the inclusive-language
rewrite, including provider-supplied text and example code.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from functools import lru_cache
from string import Template

from .classifier import (
    TAG_LOGIC_SUSPECT,
    TAG_RECURSION_LIMIT,
    TAG_TYPE,
    TAG_ZERO_DIVISION,
    TAGS,
    ClassifiedError,
)
from .lexicons import filter_jargon, inclusive_rewrite
from .parsing import parse_source
from .provider import ProviderRequest, ProviderSettings, provider_complete
from .registry import load_bundled
from .source import SourceUnit

MODE_DIRECT = "direct"
MODE_SOCRATIC = "socratic"

INTENT_SYNTAX_HELP = "syntax_help"
INTENT_CONCEPT_EXPLAIN = "concept_explain"
INTENT_DEBUG_REQUEST = "debug_request"
INTENT_GENERAL = "general"

PROVENANCE_TEMPLATE = "template"
PROVENANCE_PROVIDER = "provider"

PROVIDER_FALLBACK_NOTICE = (
    "The live assistant was not available, so this guidance comes from the "
    "built-in explanations."
)

# cue cascade, first match wins; an empty query is a debug request
_CUES = (
    (INTENT_SYNTAX_HELP, ("syntax", "colon", "indent")),
    (INTENT_CONCEPT_EXPLAIN, ("explain", "what is", "difference between")),
    (INTENT_DEBUG_REQUEST, ("error", "why", "doesn't work", "doesnt work", "crash")),
)

_TOPIC_CUES = {"comprehension": "TOPIC_COMPREHENSION"}


@dataclass(frozen=True)
class QueryIntent:
    intent: str
    matched_cues: tuple[str, ...] = ()
    topic: str | None = None  # template-library topic, when one was recognized


@dataclass(frozen=True)
class FeedbackBundle:
    diagnosis: str
    concept: str
    example: str | None
    socratic_question: str | None
    notices: tuple[str, ...]
    level: str
    provenance: str

    def to_payload(self) -> dict:
        return {
            "diagnosis": self.diagnosis,
            "concept": self.concept,
            "example": self.example,
            "socratic_question": self.socratic_question,
            "notices": list(self.notices),
            "level": self.level,
            "provenance": self.provenance,
        }


def classify_intent(query: str | None) -> QueryIntent:
    """Keyword cascade over the student's question; deterministic."""
    if not query or not query.strip():
        return QueryIntent(intent=INTENT_DEBUG_REQUEST)
    normalized = query.lower().replace("’", "'")
    topic = next(
        (name for cue, name in _TOPIC_CUES.items() if cue in normalized), None
    )
    for intent, cues in _CUES:
        matched = tuple(cue for cue in cues if cue in normalized)
        if matched:
            return QueryIntent(intent=intent, matched_cues=matched, topic=topic)
    return QueryIntent(intent=INTENT_GENERAL, topic=topic)


# ── template registry ──────────────────────────────────────────────────


@lru_cache(maxsize=1)
def _templates() -> dict[tuple[str, str, str], str]:
    table = {}
    for rec in load_bundled("feedback_templates"):
        key = (rec["tag"], rec["field"], rec.get("variant", "default"))
        table[key] = rec["text"].replace("\\n", "\n")
    return table


def template_coverage() -> list[str]:
    """Missing (tag, field) template pairs; empty when the registry is complete."""
    missing = []
    for tag in TAGS:
        for field_name in ("diagnosis", "concept", "question"):
            if (tag, field_name, "default") not in _templates():
                missing.append(f"{tag}/{field_name}")
    for special in (("CLEAN", "concept"), ("CLEAN", "question"), ("GENERIC", "question")):
        if (*special, "default") not in _templates():
            missing.append("/".join(special))
    return missing


def _render(tag: str, field_name: str, variant: str, slots: dict) -> str | None:
    text = _templates().get((tag, field_name, variant))
    if text is None:
        text = _templates().get((tag, field_name, "default"))
    if text is None:
        return None
    return Template(text).safe_substitute(slots)


# ── per-error enrichment ───────────────────────────────────────────────


def _enclosing_function(tree: ast.Module | None, line: int | None):
    if tree is None or line is None:
        return None
    best = None
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            end = getattr(node, "end_lineno", node.lineno)
            if node.lineno <= line <= end:
                if best is None or node.lineno > best.lineno:
                    best = node
    return best


def _has_input_call(tree: ast.Module | None) -> bool:
    if tree is None:
        return False
    return any(
        isinstance(n, ast.Call)
        and isinstance(n.func, ast.Name)
        and n.func.id == "input"
        for n in ast.walk(tree)
    )


def _float_recursion_target(tree: ast.Module | None) -> str | None:
    if tree is None:
        return None
    recursive = {
        fn.name
        for fn in ast.walk(tree)
        if isinstance(fn, (ast.FunctionDef, ast.AsyncFunctionDef))
        and any(
            isinstance(c, ast.Call)
            and isinstance(c.func, ast.Name)
            and c.func.id == fn.name
            for c in ast.walk(fn)
        )
    }
    for node in ast.walk(tree):
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in recursive
            and any(
                isinstance(a, ast.Constant) and isinstance(a.value, float)
                for a in node.args
            )
        ):
            return node.func.id
    return None


def _enrich(
    error: ClassifiedError, tree: ast.Module | None, source: SourceUnit | None
) -> tuple[str, dict]:
    slots = {
        "line": error.line if error.line is not None else "?",
        "message": error.evidence,
        "param": "values",
        "fn": "your_function",
    }
    variant = "default"

    if error.tag in (TAG_ZERO_DIVISION, TAG_LOGIC_SUSPECT):
        param = None
        if source is not None and error.line is not None:
            lines = source.text.splitlines()
            if 0 < error.line <= len(lines):
                m = re.search(r"len\((\w+)\)", lines[error.line - 1])
                if m:
                    param = m.group(1)
        if param is None and "len(" in error.evidence:
            m = re.search(r"len\((\w+)\)", error.evidence)
            if m:
                param = m.group(1)
        if param:
            variant = "len_division"
            slots["param"] = param
            fn = _enclosing_function(tree, error.line)
            if fn is not None:
                slots["fn"] = fn.name
    elif error.tag == TAG_TYPE:
        if _has_input_call(tree):
            variant = "input_arith"
        elif "unsupported operand" in error.evidence:
            variant = "mixed_list"
    elif error.tag == TAG_RECURSION_LIMIT:
        target = _float_recursion_target(tree)
        if target:
            variant = "float_call"
            slots["fn"] = target
    return variant, slots


# ── bundle assembly ────────────────────────────────────────────────────


def make_socratic_question(error: ClassifiedError, tree: ast.Module | None) -> str:
    """Guiding question for one error; unknown tags get the generic fallback."""
    variant, slots = _enrich(error, tree, None)
    question = _render(error.tag, "question", variant, slots)
    if question is None:
        question = _render("GENERIC", "question", "default", slots)
    return question


def _polish(text: str | None, level: str) -> str | None:
    if text is None:
        return None
    rewritten, _ = inclusive_rewrite(filter_jargon(text, level))
    return rewritten


def build_provider_request(
    source: SourceUnit,
    error: ClassifiedError | None,
    intent: QueryIntent,
    mode: str,
    level: str,
    deadline_ms: int,
) -> ProviderRequest:
    system = (
        f"You are a patient Python tutor. Respond at {level} level in {mode} mode "
        f"with one short paragraph of conceptual guidance."
    )
    evidence = error.evidence if error else "no error; the program ran cleanly"
    user = (
        f"Student code:\n{source.text}\n\n"
        f"Primary finding: {evidence}\n"
        f"Student intent: {intent.intent}"
    )
    return ProviderRequest(
        system_prompt=system, user_payload=user, deadline_ms=deadline_ms
    )


def generate_feedback(
    errors: list[ClassifiedError],
    source: SourceUnit,
    intent: QueryIntent,
    mode: str,
    level: str,
    provider_settings: ProviderSettings | None = None,
    notices: tuple[str, ...] = (),
) -> FeedbackBundle:
    """Bundle for the top-ranked error (one error per response).

    With no provider configured this is a pure function of its arguments;
    provider text, when it arrives in time, replaces only the concept
    paragraph and still passes both output filters.
    """
    outcome = parse_source(source)
    tree = outcome.tree
    top = errors[0] if errors else None
    provenance = PROVENANCE_TEMPLATE
    all_notices = list(notices)

    if top is None:
        slots = {"line": "?", "message": ""}
        topic = intent.topic if intent.intent == INTENT_CONCEPT_EXPLAIN else None
        if topic:
            concept = _render(topic, "concept", "default", slots)
            example = _render(topic, "example", "default", slots)
        else:
            concept = _render("CLEAN", "concept", "default", slots)
            example = None
        diagnosis = ""
        question = _render("CLEAN", "question", "default", slots)
    else:
        variant, slots = _enrich(top, tree, source)
        diagnosis = _render(top.tag, "diagnosis", variant, slots) or ""
        concept = _render(top.tag, "concept", variant, slots) or ""
        example = _render(top.tag, "example", variant, slots)
        question = make_socratic_question(top, tree)

    if provider_settings is not None:
        request = build_provider_request(
            source, top, intent, mode, level, provider_settings.deadline_ms
        )
        provided = provider_complete(request, provider_settings)
        if provided is not None:
            concept = provided
            provenance = PROVENANCE_PROVIDER
        else:
            all_notices.append(PROVIDER_FALLBACK_NOTICE)

    if mode == MODE_SOCRATIC:
        example = None
    else:
        question = None

    return FeedbackBundle(
        diagnosis=_polish(diagnosis, level) or "",
        concept=_polish(concept, level) or "",
        example=_polish(example, level),
        socratic_question=_polish(question, level),
        notices=tuple(_polish(n, level) for n in all_notices),
        level=level,
        provenance=provenance,
    )
