"""Structured results of one sandboxed execution."""

from __future__ import annotations

from dataclasses import dataclass

STATUS_OK = "ok"
STATUS_EXCEPTION = "exception"
STATUS_TIMEOUT = "timeout"
STATUS_MEMORY = "memory_exceeded"
STATUS_SANDBOX_ERROR = "sandbox_error"

STATUSES = (
    STATUS_OK,
    STATUS_EXCEPTION,
    STATUS_TIMEOUT,
    STATUS_MEMORY,
    STATUS_SANDBOX_ERROR,
)


@dataclass(frozen=True)
class ExceptionRecord:
    type_name: str
    message: str
    line: int | None = None  # innermost student frame, 1-based
    frames: tuple[tuple[str, int], ...] = ()  # (function name, line)

    def to_payload(self) -> dict:
        return {
            "type": self.type_name,
            "message": self.message,
            "line": self.line,
            "frames": [list(f) for f in self.frames],
        }


@dataclass(frozen=True)
class RunReport:
    status: str
    stdout: str = ""
    stderr: str = ""
    exit_code: int | None = None
    wall_ms: int = 0
    peak_rss_bytes: int | None = None
    exception: ExceptionRecord | None = None
    stdout_truncated: bool = False
    stderr_truncated: bool = False
    # provisioning detail for sandbox_error; phrased about the backend,
    # never about the student's code
    diagnostic: str = ""

    def to_payload(self) -> dict:
        return {
            "status": self.status,
            "stdout": self.stdout,
            "stderr": self.stderr,
            "exit_code": self.exit_code,
            "wall_ms": self.wall_ms,
            "peak_rss_bytes": self.peak_rss_bytes,
            "exception": self.exception.to_payload() if self.exception else None,
            "stdout_truncated": self.stdout_truncated,
            "stderr_truncated": self.stderr_truncated,
            "diagnostic": self.diagnostic,
        }
