import ast
import keyword
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codetutor.errors import CorpusFormatError, EmptyGold, ZeroPreScore
from codetutor.evalkit import (
    GoldCase,
    auto_tag,
    balance_corpus,
    compute_accuracy,
    compute_gain_score,
    load_corpus,
    normalize_source,
    preprocess_corpus,
    run_benchmark,
    save_corpus,
    thresholds_pass,
)
from codetutor.sandbox import SandboxConfig, SandboxExecutor

_executor = SandboxExecutor(SandboxConfig(wall_timeout_ms=1_500))


# ── gain score ─────────────────────────────────────────────────────────


def test_gain_score_reported_values():
    assert compute_gain_score(52.3, 67.1).delta == pytest.approx(28.3, abs=0.05)
    assert compute_gain_score(50.8, 55.4).delta == pytest.approx(9.1, abs=0.05)


def test_gain_score_no_change():
    assert compute_gain_score(50, 50).delta == 0.0


def test_gain_score_zero_pre_rejected():
    with pytest.raises(ZeroPreScore):
        compute_gain_score(0, 10)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=0.1, max_value=100),
    st.floats(min_value=0, max_value=100),
)
def test_gain_score_matches_spreadsheet_recomputation(pre, post):
    # independent recomputation of the stated formula
    expected = (post - pre) / pre * 100
    assert abs(compute_gain_score(pre, post).delta - expected) <= 0.05 + 1e-9


# ── accuracy ───────────────────────────────────────────────────────────


def _gold(n_correct, n_total, category="runtime", tag="TYPE"):
    cases = [
        GoldCase(id=f"c{i}", source="x=1", expected=((category, tag),))
        for i in range(n_total)
    ]
    predictions = {
        f"c{i}": [tag] if i < n_correct else ["OTHER"] for i in range(n_total)
    }
    return predictions, cases


def test_accuracy_fraction():
    predictions, cases = _gold(89, 100)
    report = compute_accuracy(predictions, cases)
    assert report.accuracy["runtime"] == pytest.approx(0.89, abs=1e-9)


def test_accuracy_zero():
    predictions, cases = _gold(0, 7)
    assert compute_accuracy(predictions, cases).accuracy["runtime"] == 0.0


def test_accuracy_all_correct_diagonal_confusion():
    predictions, cases = _gold(12, 12)
    report = compute_accuracy(predictions, cases)
    assert report.accuracy["runtime"] == 1.0
    assert report.confusion == {("TYPE", "TYPE"): 12}


def test_accuracy_counts_membership_in_expected_set():
    case = GoldCase(
        id="multi",
        source="x=1",
        expected=(("runtime", "TYPE"), ("runtime", "VALUE")),
    )
    report = compute_accuracy({"multi": ["VALUE"]}, [case])
    assert report.accuracy["runtime"] == 1.0


def test_accuracy_empty_gold_rejected():
    with pytest.raises(EmptyGold):
        compute_accuracy({}, [])


def test_accuracy_unknown_prediction_id_rejected():
    _, cases = _gold(1, 1)
    with pytest.raises(ValueError):
        compute_accuracy({"nope": ["TYPE"]}, cases)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=60))
def test_accuracy_matches_hand_count(outcomes):
    cases = [
        GoldCase(id=f"g{i}", source="x=1", expected=(("runtime", "KEY"),))
        for i in range(len(outcomes))
    ]
    predictions = {
        f"g{i}": ["KEY"] if ok else ["NAME"] for i, ok in enumerate(outcomes)
    }
    report = compute_accuracy(predictions, cases)
    expected = sum(outcomes) / len(outcomes)
    assert abs(report.accuracy["runtime"] - expected) <= 1e-9


# ── normalization ──────────────────────────────────────────────────────


def test_normalize_stated_example():
    assert normalize_source("total = 0\t# sum\nprint(total)") == "v1 = 0\nprint(v1)"


def test_normalize_keeps_keywords_and_builtins():
    out = normalize_source("for item in range(3):\n    print(item)\n")
    assert out == "for v1 in range(3):\n    print(v1)\n"


def test_normalize_expands_tabs():
    out = normalize_source("def f(x):\n\treturn x\nprint(f(1))\n")
    assert "\t" not in out
    assert "    return" in out


def test_normalize_leaves_broken_sources_alone():
    broken = "def f(:\n    pass\n"
    assert normalize_source(broken) == broken


_IDENT = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: not keyword.iskeyword(s)
)


@st.composite
def _small_programs(draw):
    names = draw(st.lists(_IDENT, min_size=1, max_size=4, unique=True))
    stmts = []
    for i, name in enumerate(names):
        kind = draw(st.integers(0, 3))
        if kind == 0:
            stmts.append(f"{name} = {draw(st.integers(0, 99))}  # note {i}")
        elif kind == 1:
            stmts.append(f"{name} = {draw(st.integers(0, 9))}\nprint({name})")
        elif kind == 2:
            stmts.append(f"def {name}(x):\n\treturn x + {draw(st.integers(0, 9))}")
        else:
            stmts.append(f"for {name} in range(3):\n    print({name})")
    return "\n".join(stmts) + "\n"


def _shape(tree):
    return [type(node).__name__ for node in ast.walk(tree)]


@settings(max_examples=300, deadline=None)
@given(_small_programs())
def test_normalization_idempotent_and_parse_preserving(text):
    once = normalize_source(text)
    assert normalize_source(once) == once
    assert "#" not in once and "\t" not in once
    # parseable stays parseable with an identical tree shape up to renaming
    assert _shape(ast.parse(once)) == _shape(ast.parse(text))


# ── auto-tagging and balancing ─────────────────────────────────────────


def test_auto_tag_keyerror_case():
    case = GoldCase(id="k", source="d = {}\nprint(d['x'])\n")
    tagged = auto_tag(case, _executor)
    assert tagged.expected == (("runtime", "KEY"),)
    assert tagged.origin == "generated"


def test_auto_tag_syntax_case():
    tagged = auto_tag(GoldCase(id="s", source="if True\n    pass\n"), _executor)
    assert tagged.expected == (("syntax", "SYNTAX"),)


def test_auto_tag_keeps_existing_labels():
    case = GoldCase(id="x", source="print(1)\n", expected=(("logic", "LOGIC_SUSPECT"),))
    assert auto_tag(case, _executor) is case


def test_balancing_equalizes_counts():
    cases = [
        GoldCase(id=f"t{i}", source=f"x{i} + 1\n", expected=(("runtime", "TYPE"),))
        for i in range(4)
    ] + [GoldCase(id="i0", source="  x=1\n", expected=(("syntax", "INDENTATION"),))]
    balanced = balance_corpus(cases)
    counts = Counter(case.group for case in balanced)
    assert counts == {"TYPE": 4, "INDENTATION": 4}
    dup_ids = [c.id for c in balanced if "#dup" in c.id]
    assert len(dup_ids) == 3
    # duplication, never mutation: no new sources appear
    assert {c.source for c in balanced} == {c.source for c in cases}


def test_preprocess_corpus_end_to_end():
    cases = [
        GoldCase(id="a", source="total = 0\t# c\nprint(total)\n"),
        GoldCase(id="b", source="d = {}\nprint(d['x'])\n"),
    ]
    prepared = preprocess_corpus(cases, executor=_executor)
    by_id = {c.id: c for c in prepared if "#" not in c.id}
    assert by_id["a"].source == "v1 = 0\nprint(v1)\n"
    assert by_id["a"].expected == ()
    assert by_id["b"].expected == (("runtime", "KEY"),)
    groups = Counter(c.group for c in prepared)
    assert len(set(groups.values())) == 1  # balanced


# ── corpus io and benchmark ────────────────────────────────────────────


def test_corpus_roundtrip(tmp_path):
    cases = [
        GoldCase(id="a", source="x = 1\n", stdin="in\n", expected=(("runtime", "KEY"),)),
        GoldCase(id="b", source="y = 2\n"),
    ]
    path = tmp_path / "corpus.jsonl"
    save_corpus(path, cases, header="test corpus")
    loaded = load_corpus(path)
    assert loaded == cases


def test_malformed_corpus_names_the_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a", "source": "x=1"}\nnot json at all\n')
    with pytest.raises(CorpusFormatError) as excinfo:
        load_corpus(path)
    assert excinfo.value.line_no == 2


def test_duplicate_ids_rejected(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text('{"id": "a", "source": "x=1"}\n{"id": "a", "source": "y=2"}\n')
    with pytest.raises(CorpusFormatError) as excinfo:
        load_corpus(path)
    assert excinfo.value.line_no == 2


def test_missing_key_rejected(tmp_path):
    path = tmp_path / "nokey.jsonl"
    path.write_text('{"id": "a"}\n')
    with pytest.raises(CorpusFormatError):
        load_corpus(path)


def test_benchmark_clean_controls_false_positive_rate(tmp_path):
    from fixtures_corpus import CLEAN_PROGRAMS

    cases = [
        GoldCase(id=f"clean-{i}", source=source)
        for i, source in enumerate(CLEAN_PROGRAMS)
    ]
    assert len(cases) >= 30
    path = tmp_path / "clean.jsonl"
    save_corpus(path, cases)
    report, _ = run_benchmark(path)
    misses = report.totals["clean"] - report.correct.get("clean", 0)
    assert misses <= 1  # at most one false positive across the clean corpus


def test_benchmark_small_corpus(tmp_path):
    cases = [
        GoldCase(id="syn", source="if True\n    pass\n", expected=(("syntax", "SYNTAX"),)),
        GoldCase(id="run", source="print(1/0)\n", expected=(("runtime", "ZERO_DIVISION"),)),
        GoldCase(id="cln", source="print('ok')\n"),
    ]
    path = tmp_path / "mini.jsonl"
    save_corpus(path, cases)
    report, table = run_benchmark(path)
    assert report.n == 3
    assert report.accuracy["syntax"] == 1.0
    assert report.accuracy["runtime"] == 1.0
    assert thresholds_pass(report)
    assert "syntax" in table and "runtime" in table
