"""Optional external model provider with a hard deadline.

The engine works fully offline; when an endpoint is configured, it may
enrich one field of the feedback bundle.  A slow or failing provider is
never a student-visible error: the caller falls back to templates and the
failure only bumps an internal counter.
"""

from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass

VERIFIABILITY_CLAUSE = (
    "Only suggest solutions verifiable by the student's code and standard libraries."
)

DEFAULT_DEADLINE_MS = 5_000


@dataclass(frozen=True)
class ProviderSettings:
    url: str
    api_key: str | None = None
    deadline_ms: int = DEFAULT_DEADLINE_MS
    max_tokens: int = 400
    max_inflight: int = 8


@dataclass(frozen=True)
class ProviderRequest:
    system_prompt: str
    user_payload: str
    deadline_ms: int = DEFAULT_DEADLINE_MS

    def __post_init__(self):
        # the constraint sentence is non-negotiable; repair rather than reject
        if VERIFIABILITY_CLAUSE not in self.system_prompt:
            object.__setattr__(
                self,
                "system_prompt",
                (self.system_prompt + " " + VERIFIABILITY_CLAUSE).strip(),
            )


class ProviderMetrics:
    def __init__(self):
        self._lock = threading.Lock()
        self.attempts = 0
        self.failures = 0

    def record(self, ok: bool) -> None:
        with self._lock:
            self.attempts += 1
            if not ok:
                self.failures += 1


metrics = ProviderMetrics()


class ProviderClient:
    """HTTP client for the single-POST provider contract."""

    def __init__(self, settings: ProviderSettings):
        self.settings = settings
        self._inflight = threading.Semaphore(settings.max_inflight)

    def complete(self, request: ProviderRequest) -> str | None:
        if not self._inflight.acquire(blocking=False):
            metrics.record(False)
            return None
        try:
            return self._post(request)
        finally:
            self._inflight.release()

    def _post(self, request: ProviderRequest) -> str | None:
        body = json.dumps(
            {
                "system": request.system_prompt,
                "user": request.user_payload,
                "max_tokens": self.settings.max_tokens,
                "deadline_ms": request.deadline_ms,
            }
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.settings.api_key:
            headers["Authorization"] = f"Bearer {self.settings.api_key}"
        req = urllib.request.Request(
            self.settings.url, data=body, headers=headers, method="POST"
        )
        try:
            with urllib.request.urlopen(
                req, timeout=request.deadline_ms / 1000.0
            ) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
            text = payload.get("text")
        except (urllib.error.URLError, OSError, ValueError, TimeoutError):
            metrics.record(False)
            return None
        if not isinstance(text, str) or not text.strip():
            metrics.record(False)
            return None
        metrics.record(True)
        return text


def provider_complete(
    request: ProviderRequest, settings: ProviderSettings | None
) -> str | None:
    """One-shot completion; absent settings means offline mode."""
    if settings is None:
        return None
    return ProviderClient(settings).complete(request)
