import json
import re

import pytest
from fastapi.testclient import TestClient

from codetutor.config import AppConfig
from codetutor.errors import MissingSalt
from codetutor.events import (
    EV_CONCEPT,
    EV_DIAGNOSIS,
    EV_DONE,
    EV_ERROR,
    EV_EXAMPLE,
    EV_NOTICE,
    EV_QUESTION,
    EV_RUN_REPORT,
    EV_SESSION,
    check_stream,
    event_from_wire,
)
from codetutor.reports import RunReport, STATUS_SANDBOX_ERROR
from codetutor.sandbox import SandboxConfig
from codetutor.service import create_app

AVERAGE_EMPTY = (
    "def average(nums):\n"
    "    return sum(nums)/len(nums)\n"
    "print(average([]))"
)


def _config(**kwargs):
    return AppConfig(
        salt="service-test-salt",
        store_path=":memory:",
        sandbox=SandboxConfig(wall_timeout_ms=5_000),
        **kwargs,
    )


@pytest.fixture()
def client():
    app = create_app(_config())
    with TestClient(app) as c:
        yield c


def _session(client):
    resp = client.post("/v1/sessions", json={"client_identifier": "203.0.113.9"})
    assert resp.status_code == 200
    return resp.json()["pseudonym"]


def _submit(client, pseudonym, source, **extra):
    resp = client.post(
        "/v1/submit", json={"pseudonym": pseudonym, "source": source, **extra}
    )
    assert resp.status_code == 200
    events = [event_from_wire(e) for e in resp.json()]
    check_stream(events)  # every recorded stream obeys the grammar
    return events


def _types(events):
    return [e.type for e in events]


def test_health(client):
    resp = client.get("/v1/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_create_session_shape_and_idempotence(client):
    first = _session(client)
    assert re.fullmatch(r"S-[A-Z2-7]{6}", first)
    second = _session(client)
    assert first == second


def test_missing_salt_refuses_startup():
    with pytest.raises(MissingSalt):
        create_app(AppConfig(salt=None, store_path=":memory:"))


def test_case_study_stream(client):
    pseudonym = _session(client)
    events = _submit(client, pseudonym, AVERAGE_EMPTY, mode="direct")
    types = _types(events)
    assert types[0] == EV_SESSION
    report = next(e for e in events if e.type == EV_RUN_REPORT)
    assert report.payload["exception"]["type"] == "ZeroDivisionError"
    assert types.index(EV_DIAGNOSIS) < types.index(EV_CONCEPT) < types.index(EV_EXAMPLE)
    assert events[-1].type == EV_DONE
    diagnosis = next(e for e in events if e.type == EV_DIAGNOSIS)
    assert diagnosis.payload["tag"] == "ZERO_DIVISION"
    assert diagnosis.payload["line"] == 2


def test_blocked_submission_yields_notice_without_run(client):
    pseudonym = _session(client)
    events = _submit(client, pseudonym, "import os\nprint(os.getcwd())\n")
    types = _types(events)
    assert EV_RUN_REPORT not in types
    notice = next(e for e in events if e.type == EV_NOTICE)
    assert notice.payload["kind"] == "sanitizer_block"
    rules = {r["rule_id"] for r in notice.payload["rules"]}
    assert "IMPORT_OS" in rules
    assert all(r["rationale"] for r in notice.payload["rules"])
    assert events[-1].payload["blocked"] is True


def test_clean_run_stream(client):
    pseudonym = _session(client)
    events = _submit(client, pseudonym, "print('hi')\n")
    report = next(e for e in events if e.type == EV_RUN_REPORT)
    assert report.payload["status"] == "ok"
    assert report.payload["stdout"] == "hi\n"
    concept = next(e for e in events if e.type == EV_CONCEPT)
    assert "ran without any errors" in concept.payload["text"]
    assert events[-1].payload["errors"] == 0


def test_unknown_session_is_error_event(client):
    events = _submit(client, "S-ZZZZZZ", "print('hi')\n")
    assert _types(events) == [EV_ERROR]
    assert events[0].payload["code"] == "unknown_session"


def test_socratic_first_then_direct_on_retry(client):
    pseudonym = _session(client)
    first = _submit(client, pseudonym, AVERAGE_EMPTY)
    assert EV_QUESTION in _types(first)
    assert EV_EXAMPLE not in _types(first)
    second = _submit(client, pseudonym, AVERAGE_EMPTY)
    assert EV_EXAMPLE in _types(second)


def test_explicit_mode_overrides_retry_policy(client):
    pseudonym = _session(client)
    events = _submit(client, pseudonym, AVERAGE_EMPTY, mode="direct")
    assert EV_EXAMPLE in _types(events)


def test_history_and_export_after_submissions(client):
    pseudonym = _session(client)
    _submit(client, pseudonym, AVERAGE_EMPTY)
    _submit(client, pseudonym, "print('hi')\n")
    history = client.get(f"/v1/sessions/{pseudonym}/history").json()
    assert [s["seq"] for s in history["submissions"]] == [1, 2]
    assert "ZERO_DIVISION" in history["submissions"][0]["error_tags"]
    export = client.get(f"/v1/sessions/{pseudonym}/export").json()
    assert export["schema_version"] == 1
    assert len(export["submissions"]) == 2
    assert "203.0.113.9" not in json.dumps(export)


def test_history_unknown_session_404(client):
    assert client.get("/v1/sessions/S-AAAAAA/history").status_code == 404
    assert client.get("/v1/sessions/S-AAAAAA/export").status_code == 404


def test_websocket_stream_order(client):
    pseudonym = _session(client)
    with client.websocket_connect("/v1/submit") as ws:
        ws.send_text(json.dumps({"pseudonym": pseudonym, "source": "print('ws')\n"}))
        events = []
        while True:
            event = event_from_wire(json.loads(ws.receive_text()))
            events.append(event)
            if event.type in (EV_DONE, EV_ERROR):
                break
        check_stream(events)
        assert [e.seq for e in events] == list(range(1, len(events) + 1))
        report = next(e for e in events if e.type == EV_RUN_REPORT)
        assert report.payload["stdout"] == "ws\n"
        # the channel stays open for the next submission
        ws.send_text(json.dumps({"pseudonym": pseudonym, "source": "print('again')\n"}))
        first = event_from_wire(json.loads(ws.receive_text()))
        assert first.seq == 1


def test_sandbox_crash_isolation(client, monkeypatch):
    service = client.app.state.service
    real_execute = service.executor.execute
    calls = {"n": 0}

    def flaky(source, config=None, stdin_text=None):
        calls["n"] += 1
        if calls["n"] == 1:
            return RunReport(
                status=STATUS_SANDBOX_ERROR, diagnostic="backend exploded"
            )
        return real_execute(source, config, stdin_text)

    monkeypatch.setattr(service.executor, "execute", flaky)
    pseudonym = _session(client)
    events = _submit(client, pseudonym, "print('one')\n")
    notice = next(e for e in events if e.type == EV_NOTICE)
    assert notice.payload["kind"] == "sandbox_error"
    assert events[-1].type == EV_DONE  # stream still terminates cleanly
    # the service survives: a later submission runs normally
    events = _submit(client, pseudonym, "print('two')\n")
    report = next(e for e in events if e.type == EV_RUN_REPORT)
    assert report.payload["stdout"] == "two\n"
