"""Text filters applied to every student-facing sentence.

Two lexicons ship as editable registry files:

* ``jargon_lexicon`` — technical terms with plain-language substitutes,
  applied below the level at which the term is considered teachable.
* ``inclusive_lexicon`` — biased terms with neutral replacements, always
  applied.

Both operate on word boundaries only, so identifiers that merely contain
a term are never touched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

from . import levels
from .registry import load_bundled


@dataclass(frozen=True)
class LexiconReport:
    # (matched text, replacement, character offset in the original input)
    replacements: tuple[tuple[str, str, int], ...] = ()


@dataclass(frozen=True)
class _Lexicon:
    # term (lowercased) -> (replacement, allowed_from level)
    entries: dict[str, tuple[str, str]]
    pattern: re.Pattern = field(compare=False)


def _compile(entries: dict[str, tuple[str, str]]) -> _Lexicon:
    # longest-first so multiword terms win over their own words
    alternation = "|".join(
        re.escape(term) for term in sorted(entries, key=len, reverse=True)
    )
    pattern = re.compile(rf"\b(?:{alternation})\b", re.IGNORECASE)
    return _Lexicon(entries=entries, pattern=pattern)


@lru_cache(maxsize=1)
def _jargon() -> _Lexicon:
    entries = {}
    for rec in load_bundled("jargon_lexicon"):
        entries[rec["term"].lower()] = (
            rec["plain"],
            rec.get("allowed_from", levels.INTERMEDIATE),
        )
    return _compile(entries)


@lru_cache(maxsize=1)
def _inclusive() -> _Lexicon:
    entries = {}
    for rec in load_bundled("inclusive_lexicon"):
        entries[rec["term"].lower()] = (rec["replacement"], levels.BEGINNER)
    return _compile(entries)


def _match_case(replacement: str, original: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def _rewrite(text: str, lexicon: _Lexicon, active) -> tuple[str, LexiconReport]:
    out: list[str] = []
    changes: list[tuple[str, str, int]] = []
    last = 0
    for m in lexicon.pattern.finditer(text):
        matched = m.group(0)
        replacement, allowed_from = lexicon.entries[matched.lower()]
        if not active(allowed_from):
            continue
        out.append(text[last : m.start()])
        out.append(_match_case(replacement, matched))
        changes.append((matched, replacement, m.start()))
        last = m.end()
    out.append(text[last:])
    return "".join(out), LexiconReport(replacements=tuple(changes))


def filter_jargon(text: str, level: str) -> str:
    """Substitute lexicon terms the given level is not expected to know.

    Beginner output loses every lexicon term; advanced text is returned
    unchanged.
    """
    if level == levels.ADVANCED:
        return text
    if level == levels.BEGINNER:
        rewritten, _ = _rewrite(text, _jargon(), lambda allowed: True)
    else:
        rewritten, _ = _rewrite(
            text, _jargon(), lambda allowed: allowed == levels.ADVANCED
        )
    return rewritten


def inclusive_rewrite(text: str) -> tuple[str, LexiconReport]:
    """Replace biased terms with neutral alternatives, reporting each change."""
    return _rewrite(text, _inclusive(), lambda allowed: True)


def jargon_terms() -> tuple[str, ...]:
    """Terms the beginner filter removes (used by tests and the linter)."""
    return tuple(_jargon().entries)
