import builtins
import random
import subprocess
import sys

from fixtures_corpus import CLEAN_PROGRAMS
from hypothesis import given, settings
from hypothesis import strategies as st

from codetutor.classifier import (
    CAT_LOGIC,
    CAT_RUNTIME,
    CAT_STATIC,
    CAT_SYNTAX,
    CONF_CERTAIN,
    CONF_LIKELY,
    CONF_SPECULATIVE,
    TAG_INDENTATION,
    TAG_OTHER,
    TAG_SYNTAX,
    TAG_TIMEOUT_LOOP,
    TAG_ZERO_DIVISION,
    classify,
    detect_logic_suspects,
    known_exception_names,
    parse_traceback,
    tag_for_exception,
)
from codetutor.linting import StaticFinding
from codetutor.parsing import SyntaxDiagnostic, parse_source
from codetutor.reports import (
    STATUS_EXCEPTION,
    STATUS_TIMEOUT,
    ExceptionRecord,
    RunReport,
)
from codetutor.source import SourceUnit

FIGURE_TRACEBACK = (
    "Traceback (most recent call last):\n"
    '  File "m.py", line 3, in <module>\n'
    "TypeError: unsupported operand type(s) for +: 'int' and 'str'\n"
)


def _tree(text):
    outcome = parse_source(SourceUnit(text))
    assert outcome.ok
    return outcome.tree


def _exception_report(type_name, message="boom", line=2):
    return RunReport(
        status=STATUS_EXCEPTION,
        exception=ExceptionRecord(type_name=type_name, message=message, line=line),
        exit_code=1,
    )


def test_parse_traceback_figure_text():
    record = parse_traceback(FIGURE_TRACEBACK)
    assert record is not None
    assert record.type_name == "TypeError"
    assert record.line == 3
    assert "unsupported operand" in record.message


def test_parse_traceback_empty_is_absent():
    assert parse_traceback("") is None
    assert parse_traceback("just some program output\n") is None


def test_parse_traceback_chained_last_block_wins():
    # oracle: run a chained raise under the reference interpreter
    fixture = (
        "try:\n"
        "    {}['k']\n"
        "except KeyError:\n"
        "    raise ValueError('outer failure')\n"
    )
    proc = subprocess.run(
        [sys.executable, "-c", fixture], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert "During handling of the above exception" in proc.stderr
    record = parse_traceback(proc.stderr)
    assert record.type_name == "ValueError"
    assert record.message == "outer failure"
    assert record.line == 4


def test_parse_traceback_syntax_error_block():
    proc = subprocess.run(
        [sys.executable, "-c", "def f(:\n    pass\n"], capture_output=True, text=True
    )
    record = parse_traceback(proc.stderr)
    assert record.type_name == "SyntaxError"


def test_every_builtin_exception_is_mapped():
    names = {
        n
        for n in dir(builtins)
        if isinstance(getattr(builtins, n), type)
        and issubclass(getattr(builtins, n), BaseException)
    }
    known = set(known_exception_names())
    assert names <= known


def test_total_mapping_yields_exactly_one_error():
    for name in known_exception_names():
        errors = classify([], [], _exception_report(name), _tree("x = 1\nprint(x)\n"))
        assert len(errors) == 1
        assert errors[0].tag == tag_for_exception(name)
        assert errors[0].category == CAT_RUNTIME


def test_unknown_exception_falls_back_to_other():
    assert tag_for_exception("SomeCurriculumError") == TAG_OTHER


def test_syntax_diagnostic_passthrough():
    diag = SyntaxDiagnostic(line=1, column=8, message="expected ':'", raw_kind="missing-colon")
    errors = classify([diag], [], None, None)
    assert len(errors) == 1
    assert errors[0].tag == TAG_SYNTAX
    assert errors[0].category == CAT_SYNTAX
    assert errors[0].confidence == CONF_CERTAIN


def test_indentation_diagnostic_gets_indentation_tag():
    diag = SyntaxDiagnostic(line=2, column=1, message="unexpected indent", raw_kind="bad-indentation")
    assert classify([diag], [], None, None)[0].tag == TAG_INDENTATION


def test_runtime_outranks_static():
    finding = StaticFinding("UNUSED_VARIABLE", 1, "x", "warn", "unused")
    report = _exception_report("ZeroDivisionError", "division by zero", line=2)
    errors = classify([], [finding], report, _tree("x = 1\ny = 1 / 0\n"))
    assert errors[0].tag == TAG_ZERO_DIVISION
    assert errors[0].category == CAT_RUNTIME
    assert errors[0].evidence == "ZeroDivisionError: division by zero"
    assert any(e.category == CAT_STATIC for e in errors[1:])


def test_dynamic_evidence_drops_static_on_same_line():
    finding = StaticFinding("UNUSED_VARIABLE", 2, "y", "warn", "unused")
    report = _exception_report("ZeroDivisionError", "division by zero", line=2)
    errors = classify([], [finding], report, _tree("x = 1\ny = 1 / 0\n"))
    assert all(e.category != CAT_STATIC for e in errors)


def test_timeout_report_classifies_as_timeout_loop():
    report = RunReport(status=STATUS_TIMEOUT, wall_ms=10_500)
    errors = classify([], [], report, _tree("pass\n"))
    assert errors[0].tag == TAG_TIMEOUT_LOOP
    assert errors[0].category == CAT_RUNTIME
    assert errors[0].confidence == CONF_LIKELY


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_classify_permutation_invariant(rng: random.Random):
    findings = [
        StaticFinding("UNUSED_VARIABLE", 1, "a", "warn", "unused a"),
        StaticFinding("MISSING_DOCSTRING", 3, "f", "info", "no docstring"),
        StaticFinding("UNDEFINED_NAME", 4, "zz", "error", "undefined zz"),
    ]
    report = _exception_report("KeyError", "'k'", line=5)
    tree = _tree("x = 1\nprint(x)\n")
    baseline = classify([], list(findings), report, tree)
    shuffled = list(findings)
    rng.shuffle(shuffled)
    assert classify([], shuffled, report, tree) == baseline


# ── logic-suspect heuristics ───────────────────────────────────────────

CASE_STUDY_AVERAGE = (
    "def average(nums):\n"
    "    return sum(nums) / len(nums)\n"
    "print(average([10, 20, 30]))\n"
)

FACTORIAL_FLOAT = (
    "def factorial(n):\n"
    "    if n == 0:\n"
    "        return 1\n"
    "    else:\n"
    "        return n * factorial(n-1)\n"
    "print(factorial(5.5))\n"
)


def test_unguarded_division_by_len_fires():
    suspects = detect_logic_suspects(_tree(CASE_STUDY_AVERAGE), None)
    assert len(suspects) == 1
    assert "unguarded division by collection length" in suspects[0].evidence
    assert suspects[0].confidence == CONF_SPECULATIVE
    assert suspects[0].category == CAT_LOGIC
    assert suspects[0].line == 2


def test_guarded_division_is_silent():
    guarded = (
        "def average(nums):\n"
        "    if not nums:\n"
        "        return 0\n"
        "    return sum(nums) / len(nums)\n"
        "print(average([1]))\n"
    )
    assert detect_logic_suspects(_tree(guarded), None) == []
    conditional = (
        "def average(nums):\n"
        "    return sum(nums) / len(nums) if nums else 0.0\n"
        "print(average([1]))\n"
    )
    assert detect_logic_suspects(_tree(conditional), None) == []


def test_float_argument_to_integer_base_recursion_fires():
    suspects = detect_logic_suspects(_tree(FACTORIAL_FLOAT), None)
    assert len(suspects) == 1
    assert "base case unreachable for non-integer input" in suspects[0].evidence
    assert suspects[0].line == 6


def test_integer_call_site_is_silent():
    clean = FACTORIAL_FLOAT.replace("5.5", "5")
    assert detect_logic_suspects(_tree(clean), None) == []


def test_straight_line_program_has_no_suspects():
    assert detect_logic_suspects(_tree("x = 1\n"), None) == []


def test_missing_return_fires_when_result_used():
    text = "def add(a, b):\n    result = a + b\nprint(add(2, 3))\n"
    suspects = detect_logic_suspects(_tree(text), None)
    assert len(suspects) == 1
    assert "without returning a value" in suspects[0].evidence


def test_missing_return_silent_when_called_as_statement():
    text = "def greet(name):\n    message = 'Hi ' + name\ngreet('Sam')\n"
    assert detect_logic_suspects(_tree(text), None) == []


def test_stuck_loop_fires_without_mutation():
    text = "n = 0\nwhile n > 5:\n    print('never')\nprint('done')\n"
    suspects = detect_logic_suspects(_tree(text), None)
    assert len(suspects) == 1
    assert "never changes" in suspects[0].evidence


def test_loop_with_mutation_is_silent():
    text = "n = 0\nwhile n < 5:\n    n += 1\nprint(n)\n"
    assert detect_logic_suspects(_tree(text), None) == []


def test_suspects_never_outrank_runtime():
    report = _exception_report("ZeroDivisionError", "division by zero", line=99)
    errors = classify([], [], report, _tree(CASE_STUDY_AVERAGE))
    assert errors[0].category == CAT_RUNTIME
    assert all(
        errors[i].category != CAT_RUNTIME or i == 0 for i in range(len(errors))
    )




def test_heuristics_conservative_on_clean_corpus():
    assert len(CLEAN_PROGRAMS) >= 30
    total = 0
    for text in CLEAN_PROGRAMS:
        suspects = detect_logic_suspects(_tree(text), None)
        total += len(suspects)
    assert total <= 1, f"{total} suspects on clean corpus"
