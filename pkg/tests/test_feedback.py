import http.server
import json
import threading
import time

from codetutor import levels
from codetutor.classifier import classify
from codetutor.feedback import (
    INTENT_CONCEPT_EXPLAIN,
    INTENT_DEBUG_REQUEST,
    INTENT_GENERAL,
    INTENT_SYNTAX_HELP,
    MODE_DIRECT,
    MODE_SOCRATIC,
    PROVENANCE_PROVIDER,
    PROVENANCE_TEMPLATE,
    QueryIntent,
    classify_intent,
    generate_feedback,
    make_socratic_question,
    template_coverage,
)
from codetutor.lexicons import jargon_terms
from codetutor.parsing import parse_source
from codetutor.provider import (
    VERIFIABILITY_CLAUSE,
    ProviderRequest,
    ProviderSettings,
    provider_complete,
)
from codetutor.sandbox import SandboxConfig, SandboxExecutor
from codetutor.source import SourceUnit

AVERAGE_EMPTY = (
    "def average(nums):\n"
    "    return sum(nums)/len(nums)\n"
    "print(average([]))"
)
SUM_MIXED = 'print("Sum:", sum([1, "2"]))\n'
INPUT_ARITH = (
    "age = input(\"Enter your age: \")\n"
    "print(\"Next year, you'll be\", age + 1)\n"
)

_executor = SandboxExecutor(SandboxConfig(wall_timeout_ms=5_000))


def _errors_for(text, stdin_text=""):
    src = SourceUnit(text)
    outcome = parse_source(src)
    report = _executor.execute(src, stdin_text=stdin_text)
    return classify(list(outcome.diagnostics), [], report, outcome.tree), src


def _bundle(text, mode=MODE_DIRECT, level=levels.BEGINNER, stdin_text="", query=None):
    errors, src = _errors_for(text, stdin_text)
    return generate_feedback(errors, src, classify_intent(query), mode, level)


# ── intent ─────────────────────────────────────────────────────────────


def test_paper_example_query_is_debug_request():
    intent = classify_intent("Why does my loop output None?")
    assert intent.intent == INTENT_DEBUG_REQUEST
    assert "why" in intent.matched_cues


def test_absent_query_defaults_to_debug_request():
    assert classify_intent(None).intent == INTENT_DEBUG_REQUEST
    assert classify_intent("   ").intent == INTENT_DEBUG_REQUEST


def test_explain_cue_is_concept_explain():
    intent = classify_intent("explain list comprehensions")
    assert intent.intent == INTENT_CONCEPT_EXPLAIN
    assert intent.topic == "TOPIC_COMPREHENSION"


def test_syntax_cue_wins_over_later_rules():
    assert classify_intent("why is this colon wrong").intent == INTENT_SYNTAX_HELP


def test_unmatched_query_is_general():
    assert classify_intent("hello there").intent == INTENT_GENERAL


# ── bundles ────────────────────────────────────────────────────────────


def test_case_study_average_bundle():
    bundle = _bundle(AVERAGE_EMPTY)
    assert "empty" in bundle.diagnosis
    assert "dividing by zero is undefined" in bundle.diagnosis
    assert "Add a condition to handle this case" in bundle.concept
    assert bundle.example is not None
    assert "if len(nums) == 0" in bundle.example
    assert "def average(nums):" in bundle.example
    assert bundle.provenance == PROVENANCE_TEMPLATE


def test_mixed_sum_concept_advises_conversion():
    bundle = _bundle(SUM_MIXED)
    assert "Convert all elements to numbers" in bundle.concept


def test_socratic_input_question():
    bundle = _bundle(INPUT_ARITH, mode=MODE_SOCRATIC, stdin_text="12\n")
    assert bundle.example is None
    assert bundle.socratic_question is not None
    assert "What data type does input() return?" in bundle.socratic_question


def test_direct_mode_has_example_not_question():
    bundle = _bundle(AVERAGE_EMPTY, mode=MODE_DIRECT)
    assert bundle.example is not None
    assert bundle.socratic_question is None


def test_clean_run_bundle_is_vacuous():
    bundle = _bundle("print('hi')\n")
    assert bundle.diagnosis == ""
    assert "ran without any errors" in bundle.concept
    assert bundle.notices == ()


def test_concept_topic_for_clean_run():
    bundle = _bundle(
        "numbers = [1, 2, 3]\nsquared = []\nfor n in numbers:\n    squared.append(n ** 2)\nprint(squared)\n",
        query="explain list comprehensions",
    )
    assert "List comprehensions simplify loops into a single line" in bundle.concept
    assert "[n ** 2 for n in numbers]" in bundle.example


def test_examples_carry_inline_comments():
    for fixture in (AVERAGE_EMPTY, SUM_MIXED):
        bundle = _bundle(fixture)
        assert bundle.example is not None and "#" in bundle.example


def test_recursion_float_call_variant():
    text = (
        "def factorial(n):\n"
        "    if n == 0:\n"
        "        return 1\n"
        "    else:\n"
        "        return n * factorial(n-1)\n"
        "print(factorial(5.5))\n"
    )
    bundle = _bundle(text)
    assert "factorial" in bundle.example
    assert "isinstance(n, int)" in bundle.example


def test_socratic_question_references_student_code():
    errors, src = _errors_for(AVERAGE_EMPTY)
    tree = parse_source(src).tree
    question = make_socratic_question(errors[0], tree)
    assert "What other edge cases should you test?" in question


def test_unknown_tag_question_falls_back_to_generic():
    from codetutor.classifier import ClassifiedError

    weird = ClassifiedError("NOT_A_TAG", "runtime", 1, "odd", "dynamic", "likely")
    question = make_socratic_question(weird, None)
    assert "What do you expect each line of your code to do" in question


def test_template_registry_is_complete():
    assert template_coverage() == []


def test_offline_bundle_is_deterministic():
    first = _bundle(AVERAGE_EMPTY)
    second = _bundle(AVERAGE_EMPTY)
    assert first == second


def test_beginner_output_passes_jargon_filter():
    bundle = _bundle(SUM_MIXED, level=levels.BEGINNER)
    joined = " ".join(
        filter(None, [bundle.diagnosis, bundle.concept, bundle.example or ""])
    ).lower()
    for term in jargon_terms():
        assert term.lower() not in joined


# ── provider path ──────────────────────────────────────────────────────


class _FakeProvider(http.server.BaseHTTPRequestHandler):
    delay_s = 0.0
    reply = "Think about what type input() gives you back."

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        self.rfile.read(length)
        time.sleep(type(self).delay_s)
        body = json.dumps({"text": type(self).reply}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


def _serve(handler):
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://127.0.0.1:{server.server_address[1]}/"


def test_provider_happy_path_replaces_concept():
    class Handler(_FakeProvider):
        delay_s = 0.0
        reply = "A salesman explanation with master wording."

    server, url = _serve(Handler)
    try:
        errors, src = _errors_for(SUM_MIXED)
        bundle = generate_feedback(
            errors,
            src,
            QueryIntent(INTENT_DEBUG_REQUEST),
            MODE_DIRECT,
            levels.ADVANCED,
            provider_settings=ProviderSettings(url=url, deadline_ms=3_000),
        )
        assert bundle.provenance == PROVENANCE_PROVIDER
        # provider text still passes both filters before delivery
        assert "salesperson" in bundle.concept
        assert "primary wording" in bundle.concept
    finally:
        server.shutdown()


def test_provider_late_response_is_discarded():
    class Handler(_FakeProvider):
        delay_s = 1.2

    server, url = _serve(Handler)
    try:
        request = ProviderRequest(system_prompt="tutor", user_payload="x", deadline_ms=300)
        started = time.perf_counter()
        text = provider_complete(request, ProviderSettings(url=url, deadline_ms=300))
        elapsed = time.perf_counter() - started
        assert text is None
        assert elapsed < 1.0
    finally:
        server.shutdown()


def test_provider_unreachable_degrades_to_template_with_notice():
    errors, src = _errors_for(SUM_MIXED)
    bundle = generate_feedback(
        errors,
        src,
        QueryIntent(INTENT_DEBUG_REQUEST),
        MODE_DIRECT,
        levels.BEGINNER,
        provider_settings=ProviderSettings(url="http://127.0.0.1:1/", deadline_ms=300),
    )
    assert bundle.provenance == PROVENANCE_TEMPLATE
    assert "Convert all elements to numbers" in bundle.concept
    assert any("built-in explanations" in n for n in bundle.notices)


def test_provider_request_always_carries_verifiability_clause():
    request = ProviderRequest(system_prompt="You are a tutor.", user_payload="x")
    assert VERIFIABILITY_CLAUSE in request.system_prompt
    kept = ProviderRequest(system_prompt=f"Tutor. {VERIFIABILITY_CLAUSE}", user_payload="x")
    assert kept.system_prompt.count(VERIFIABILITY_CLAUSE) == 1
