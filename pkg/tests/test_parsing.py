"""Parser front end: tree-or-diagnostics, never both, never a crash."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codetutor.errors import SourceTooLarge
from codetutor.parsing import (
    KIND_BAD_INDENTATION,
    KIND_MISSING_COLON,
    parse_source,
)
from codetutor.source import SourceUnit


def _accepts(text: str) -> bool:
    """Reference interpreter's accept/reject decision for the same text."""
    try:
        compile(text, "<student>", "exec")
        return True
    except (SyntaxError, ValueError):
        return False


def test_minimal_valid_program():
    outcome = parse_source(SourceUnit("x = 1\n"))
    assert outcome.ok
    assert outcome.diagnostics == ()


def test_bad_def_reports_first_failing_line():
    # reference interpreter rejects this text at line 1
    assert not _accepts("def f(:\n    pass\n")
    outcome = parse_source(SourceUnit("def f(:\n    pass\n"))
    assert not outcome.ok
    assert outcome.tree is None
    assert outcome.diagnostics[0].line == 1
    assert outcome.diagnostics[0].message


def test_missing_colon_kind():
    outcome = parse_source(SourceUnit("if True\n    x=1\n"))
    assert not outcome.ok
    assert outcome.diagnostics[0].raw_kind == KIND_MISSING_COLON


def test_indentation_kind():
    outcome = parse_source(SourceUnit("x = 1\n  y = 2\n"))
    assert not outcome.ok
    assert outcome.diagnostics[0].raw_kind == KIND_BAD_INDENTATION


def test_diagnostic_line_clamped_to_source():
    # the interpreter reports EOF errors one line past the end
    src = SourceUnit("def f():\n")
    outcome = parse_source(src)
    assert not outcome.ok
    assert 1 <= outcome.diagnostics[0].line <= src.line_count


def test_source_too_large():
    with pytest.raises(SourceTooLarge):
        SourceUnit.from_text("x" * (64 * 1024 + 1))


def test_source_unit_identity():
    unit = SourceUnit("a = 1\nb = 2\n")
    assert unit.line_count == 2
    again = SourceUnit(unit.text)
    assert again.sha256 == unit.sha256


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=200))
def test_parse_total_and_agrees_with_interpreter(text):
    outcome = parse_source(SourceUnit(text))
    # total: always a tree or at least one diagnostic, never both
    if outcome.ok:
        assert outcome.diagnostics == ()
    else:
        assert outcome.tree is None
        assert len(outcome.diagnostics) >= 1
        for diag in outcome.diagnostics:
            assert diag.message
    assert outcome.ok == _accepts(text)
