"""Streaming network API around the pipeline.

Endpoints (versioned prefix for protocol evolution):

* ``POST /v1/sessions``               -> {"pseudonym": "S-XXXXXX"}
* ``WS   /v1/submit``                 -> one JSON event per message
* ``POST /v1/submit``                 -> full event array (fallback)
* ``GET  /v1/sessions/{id}/history``
* ``GET  /v1/sessions/{id}/export``
* ``GET  /v1/health``

Per-session submissions are serialized; global execution parallelism is
bounded by the sandbox pool.  A sandbox failure never takes the service
down: it surfaces as a notice inside the stream.
"""

from __future__ import annotations

import json
import threading
from contextlib import asynccontextmanager
from typing import Iterator

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from starlette.concurrency import iterate_in_threadpool

from .config import AppConfig
from .errors import MissingSalt, SessionExpired, UnknownSession
from .events import EV_ERROR, FeedbackEvent
from .pipeline import registry_for, run_pipeline
from .sandbox import SandboxExecutor
from .store import RetentionPolicy, TutorStore, pseudonymize


class TutorService:
    """Owns the store, the sandbox pool, and the scheduled purge."""

    def __init__(self, config: AppConfig):
        if not config.salt:
            # startup refusal: a missing salt must never become a per-request error
            raise MissingSalt("set TUTOR_SALT (or config salt) before serving")
        self.config = config
        self.store = TutorStore(
            config.store_path, RetentionPolicy(config.retention_days)
        )
        self.executor = SandboxExecutor(config.sandbox, registry_for(config))
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._stop = threading.Event()
        self._purger = threading.Thread(target=self._purge_loop, daemon=True)
        self._purger.start()

    def close(self) -> None:
        self._stop.set()
        self.store.close()

    def _purge_loop(self) -> None:
        while not self._stop.wait(self.config.purge_interval_s):
            self.store.purge_expired()

    def _lock_for(self, pseudonym: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(pseudonym, threading.Lock())

    def create_session(self, client_identifier: str) -> str:
        pseudonym = pseudonymize(client_identifier, self.config.salt)
        self.store.create_session(pseudonym)
        return pseudonym

    def submit_events(self, request: dict) -> Iterator[FeedbackEvent]:
        """Pipeline events for one submission; failures end in an error event."""
        last_seq = 0
        try:
            pseudonym = str(request.get("pseudonym", ""))
            self.store.get_session(pseudonym)
            with self._lock_for(pseudonym):
                for event in run_pipeline(
                    str(request.get("source", "")),
                    self.config,
                    self.executor,
                    pseudonym=pseudonym,
                    store=self.store,
                    query=request.get("query"),
                    mode=request.get("mode"),
                    level=request.get("level"),
                    stdin_text=request.get("stdin"),
                ):
                    last_seq = event.seq
                    yield event
        except (UnknownSession, SessionExpired):
            yield FeedbackEvent(
                seq=last_seq + 1,
                type=EV_ERROR,
                payload={"code": "unknown_session", "message": "session not found"},
            )
        except Exception as exc:  # keep the stream well-formed no matter what
            yield FeedbackEvent(
                seq=last_seq + 1,
                type=EV_ERROR,
                payload={"code": "internal", "message": str(exc)},
            )


def create_app(config: AppConfig) -> FastAPI:
    service = TutorService(config)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        service.close()

    app = FastAPI(title="codetutor", version="0.1.0", lifespan=lifespan)
    app.state.service = service

    @app.post("/v1/sessions")
    def create_session(body: dict) -> dict:
        identifier = str(body.get("client_identifier", "")).strip()
        if not identifier:
            raise HTTPException(status_code=422, detail="client_identifier required")
        return {"pseudonym": service.create_session(identifier)}

    @app.post("/v1/submit")
    def submit(body: dict) -> list:
        return [event.to_wire() for event in service.submit_events(body)]

    @app.websocket("/v1/submit")
    async def submit_ws(ws: WebSocket) -> None:
        await ws.accept()
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    request = json.loads(raw)
                except json.JSONDecodeError:
                    request = {}
                async for event in iterate_in_threadpool(
                    service.submit_events(request)
                ):
                    await ws.send_text(json.dumps(event.to_wire()))
        except WebSocketDisconnect:
            return

    @app.get("/v1/sessions/{pseudonym}/history")
    def history(pseudonym: str) -> dict:
        try:
            submissions = service.store.get_history(pseudonym)
        except UnknownSession:
            raise HTTPException(status_code=404, detail="session not found")
        return {
            "pseudonym": pseudonym,
            "submissions": [
                {
                    "seq": sub.seq,
                    "sha256": sub.sha256,
                    "source": sub.source,
                    "error_tags": list(sub.tags),
                    "feedback": sub.bundle.to_payload(),
                }
                for sub in submissions
            ],
        }

    @app.get("/v1/sessions/{pseudonym}/export")
    def export(pseudonym: str) -> dict:
        try:
            return service.store.export_session(pseudonym)
        except UnknownSession:
            raise HTTPException(status_code=404, detail="session not found")

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "backend": config.sandbox.backend}

    return app
