"""Versioned feedback-event protocol shared by the service, CLI, and UI.

A stream is a sequence of events with strictly increasing ``seq`` and
exactly one terminal.  The legal shape is::

    session? static_findings? notice* run_report?
    (diagnosis concept? (example | question)?)? notice* (done | error)

which `check_stream` enforces literally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

PROTOCOL_VERSION = 1

EV_SESSION = "session"
EV_STATIC_FINDINGS = "static_findings"
EV_RUN_REPORT = "run_report"
EV_DIAGNOSIS = "diagnosis"
EV_CONCEPT = "concept"
EV_EXAMPLE = "example"
EV_QUESTION = "question"
EV_NOTICE = "notice"
EV_DONE = "done"
EV_ERROR = "error"

EVENT_TYPES = (
    EV_SESSION,
    EV_STATIC_FINDINGS,
    EV_RUN_REPORT,
    EV_DIAGNOSIS,
    EV_CONCEPT,
    EV_EXAMPLE,
    EV_QUESTION,
    EV_NOTICE,
    EV_DONE,
    EV_ERROR,
)

_SYMBOL = {
    EV_SESSION: "s",
    EV_STATIC_FINDINGS: "f",
    EV_NOTICE: "n",
    EV_RUN_REPORT: "r",
    EV_DIAGNOSIS: "d",
    EV_CONCEPT: "c",
    EV_EXAMPLE: "e",
    EV_QUESTION: "q",
    EV_DONE: "D",
    EV_ERROR: "E",
}

_GRAMMAR = re.compile(r"^s?f?n*r?(dc?(e|q)?)?n*(D|E)$")


@dataclass(frozen=True)
class FeedbackEvent:
    seq: int
    type: str
    payload: dict = field(default_factory=dict)
    v: int = PROTOCOL_VERSION

    def to_wire(self) -> dict:
        return {"v": self.v, "seq": self.seq, "type": self.type, "payload": self.payload}


def event_from_wire(data: dict) -> FeedbackEvent:
    return FeedbackEvent(
        seq=int(data["seq"]),
        type=str(data["type"]),
        payload=dict(data.get("payload", {})),
        v=int(data.get("v", PROTOCOL_VERSION)),
    )


class EventBuilder:
    """Hands out events with a per-stream monotone sequence number."""

    def __init__(self):
        self._seq = 0

    def emit(self, type_: str, payload: dict | None = None) -> FeedbackEvent:
        if type_ not in EVENT_TYPES:
            raise ValueError(f"unknown event type {type_!r}")
        self._seq += 1
        return FeedbackEvent(seq=self._seq, type=type_, payload=payload or {})


def check_stream(events: list[FeedbackEvent]) -> None:
    """Raise ValueError when a stream violates the protocol invariants."""
    if not events:
        raise ValueError("empty stream")
    seqs = [e.seq for e in events]
    if seqs != sorted(set(seqs)) or any(s < 1 for s in seqs):
        raise ValueError(f"seq not strictly increasing from 1: {seqs}")
    terminals = [e for e in events if e.type in (EV_DONE, EV_ERROR)]
    if len(terminals) != 1 or events[-1].type not in (EV_DONE, EV_ERROR):
        raise ValueError("stream must end with exactly one terminal event")
    word = "".join(_SYMBOL.get(e.type, "?") for e in events)
    if "?" in word:
        raise ValueError("stream contains an unknown event type")
    if not _GRAMMAR.match(word):
        raise ValueError(f"stream shape {word!r} violates the event grammar")
