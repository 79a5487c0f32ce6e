"""Ephemeral, resource-capped execution of sanitized student code.

Two backends share one interface: ``process`` runs the code as a
rlimit-capped child of this interpreter (used for tests, CI, and desk
deployments), ``container`` shells out to docker for full isolation.
Either way a run owns a throwaway working directory, gets stdin as a
finite buffer, and is destroyed afterwards.

When a harness script is configured, the child emits a structured report
on fd 3 (or a sentinel-prefixed stderr line when fd 3 cannot exist, as
under docker); without one, the executor falls back to parsing the raw
stderr traceback.
"""

from __future__ import annotations

import fcntl
import json
import math
import os
import resource
import signal
import subprocess
import sys
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass

from .classifier import parse_traceback
from .errors import BlockedSource, ExecutorBusy
from .parsing import parse_source
from .reports import (
    STATUS_EXCEPTION,
    STATUS_MEMORY,
    STATUS_OK,
    STATUS_SANDBOX_ERROR,
    STATUS_TIMEOUT,
    ExceptionRecord,
    RunReport,
)
from .sanitizer import DenyRegistry, sanitize
from .source import SourceUnit

BACKEND_PROCESS = "process"
BACKEND_CONTAINER = "container"

STREAM_CAP = 64 * 1024
REPORT_SENTINEL = "#TUTOR-REPORT# "
_CHILD_ENV = {
    "PATH": "/usr/bin:/bin",
    "PYTHONIOENCODING": "utf-8",
    "PYTHONHASHSEED": "0",
    "LC_ALL": "C.UTF-8",
}


@dataclass(frozen=True)
class SandboxConfig:
    cpu_quota: float = 0.10  # fraction of one core (container backend)
    memory_limit_bytes: int = 512 * 2**20
    wall_timeout_ms: int = 10_000
    backend: str = BACKEND_PROCESS
    pool_size: int = 4
    wait_when_busy: bool = True  # False: raise ExecutorBusy instead of queueing
    grace_ms: int = 2_000
    harness_path: str | None = None
    container_image: str = "python:3.11-alpine"
    container_harness_path: str = "/opt/tutor/exec_harness.py"

    def __post_init__(self):
        if not 0 < self.cpu_quota <= 1:
            raise ValueError("cpu_quota must be in (0, 1]")
        if self.memory_limit_bytes < 16 * 2**20:
            raise ValueError("memory_limit_bytes must be at least 16 MiB")
        if self.wall_timeout_ms < 100:
            raise ValueError("wall_timeout_ms must be at least 100")
        if self.backend not in (BACKEND_PROCESS, BACKEND_CONTAINER):
            raise ValueError(f"unknown backend {self.backend!r}")


class _Drain(threading.Thread):
    """Reads a pipe to EOF, keeping only the first ``cap`` bytes."""

    def __init__(self, stream, cap: int = STREAM_CAP):
        super().__init__(daemon=True)
        self.stream = stream
        self.cap = cap
        self.data = bytearray()
        self.truncated = False
        self.start()

    def run(self):
        try:
            while True:
                chunk = self.stream.read(65536)
                if not chunk:
                    return
                room = self.cap - len(self.data)
                if room > 0:
                    self.data += chunk[:room]
                if len(chunk) > room:
                    self.truncated = True
        except (OSError, ValueError):
            return

    def text(self) -> str:
        return self.data.decode("utf-8", errors="replace")


class _FdDrain(threading.Thread):
    """Reads a raw file descriptor to EOF (the report channel)."""

    def __init__(self, fd: int):
        super().__init__(daemon=True)
        self.fd = fd
        self.data = bytearray()
        self.start()

    def run(self):
        try:
            while True:
                chunk = os.read(self.fd, 65536)
                if not chunk:
                    return
                self.data += chunk
        except OSError:
            return
        finally:
            os.close(self.fd)


def _record_from_payload(payload: dict) -> ExceptionRecord | None:
    exc = payload.get("exception")
    if not exc:
        return None
    frames = tuple(
        (str(f[0]), int(f[1])) for f in exc.get("frames", []) if len(f) == 2
    )
    line = exc.get("line")
    return ExceptionRecord(
        type_name=str(exc.get("type", "")),
        message=str(exc.get("message", "")),
        line=int(line) if line is not None else None,
        frames=frames,
    )


def _split_sentinel(stderr_text: str) -> tuple[str, dict | None]:
    """Strip harness sentinel lines from stderr, returning the last report."""
    kept: list[str] = []
    payload = None
    for line in stderr_text.splitlines(keepends=True):
        if line.startswith(REPORT_SENTINEL):
            try:
                payload = json.loads(line[len(REPORT_SENTINEL) :])
            except json.JSONDecodeError:
                kept.append(line)
        else:
            kept.append(line)
    return "".join(kept), payload


class SandboxExecutor:
    """Bounded pool of one-shot sandboxes; safe to share across threads."""

    def __init__(self, config: SandboxConfig | None = None, registry: DenyRegistry | None = None):
        self.config = config or SandboxConfig()
        self._registry = registry
        self._slots = threading.Semaphore(self.config.pool_size)

    def execute(
        self,
        source: SourceUnit,
        config: SandboxConfig | None = None,
        stdin_text: str | None = None,
    ) -> RunReport:
        cfg = config or self.config
        if not self._slots.acquire(blocking=cfg.wait_when_busy):
            raise ExecutorBusy("sandbox pool is full")
        try:
            self._recheck(source)
            if cfg.backend == BACKEND_CONTAINER:
                return self._run_container(source, cfg, stdin_text or "")
            return self._run_process(source, cfg, stdin_text or "")
        except BlockedSource:
            raise
        except Exception as exc:  # provisioning trouble is ours, not the student's
            return RunReport(
                status=STATUS_SANDBOX_ERROR,
                diagnostic=f"sandbox backend failed to provision: {exc}",
            )
        finally:
            self._slots.release()

    def _recheck(self, source: SourceUnit) -> None:
        # defense in depth: the orchestrator sanitizes first, but nothing
        # reaches an interpreter without a second look
        outcome = parse_source(source)
        if outcome.ok:
            verdict = sanitize(outcome.tree, source, self._registry)
            if not verdict.allowed:
                raise BlockedSource(verdict.violations)

    # ── process backend ────────────────────────────────────────────────

    def _run_process(self, source: SourceUnit, cfg: SandboxConfig, stdin_text: str) -> RunReport:
        wall_s = cfg.wall_timeout_ms / 1000.0
        with tempfile.TemporaryDirectory(prefix="tutor-sbx-") as workdir:
            # run by relative name so tracebacks show "main.py", not a host path
            with open(os.path.join(workdir, "main.py"), "w", encoding="utf-8") as f:
                f.write(source.text)

            use_harness = bool(cfg.harness_path)
            if use_harness:
                argv = [sys.executable, "-I", cfg.harness_path, "main.py"]
                report_r, report_w = os.pipe()
                if report_w < 10:  # keep clear of the std descriptors
                    high = fcntl.fcntl(report_w, fcntl.F_DUPFD, 10)
                    os.close(report_w)
                    report_w = high
            else:
                argv = [sys.executable, "-I", "main.py"]
                report_r = report_w = None

            mem = cfg.memory_limit_bytes
            cpu_s = math.ceil(wall_s) + 1

            def preexec():
                if report_w is not None:
                    os.dup2(report_w, 3)
                    os.closerange(4, 4096)
                else:
                    os.closerange(3, 4096)
                resource.setrlimit(resource.RLIMIT_AS, (mem, mem))
                resource.setrlimit(resource.RLIMIT_CPU, (cpu_s, cpu_s))
                resource.setrlimit(resource.RLIMIT_FSIZE, (8 * 2**20, 8 * 2**20))
                resource.setrlimit(resource.RLIMIT_CORE, (0, 0))

            start = time.perf_counter()
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                cwd=workdir,
                env=dict(_CHILD_ENV),
                preexec_fn=preexec,
                close_fds=False,
                start_new_session=True,
            )
            if report_w is not None:
                os.close(report_w)
            report_drain = _FdDrain(report_r) if report_r is not None else None
            out_drain = _Drain(proc.stdout)
            err_drain = _Drain(proc.stderr)
            try:
                proc.stdin.write(stdin_text.encode("utf-8"))
                proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            finally:
                try:
                    proc.stdin.close()
                except OSError:
                    pass

            timed_out = False
            try:
                proc.wait(timeout=wall_s)
            except subprocess.TimeoutExpired:
                timed_out = True
                self._kill_group(proc)
                try:
                    proc.wait(timeout=cfg.grace_ms / 1000.0)
                except subprocess.TimeoutExpired:
                    proc.kill()
                    proc.wait()
            wall_ms = int((time.perf_counter() - start) * 1000)

            out_drain.join()
            err_drain.join()
            if report_drain is not None:
                report_drain.join()

            # the interpreter absolutizes script paths; hide the ephemeral
            # workdir so students see "main.py" and reports stay stable
            stdout = out_drain.text().replace(workdir + os.sep, "")
            stderr = err_drain.text().replace(workdir + os.sep, "")
            payload = None
            if report_drain is not None and report_drain.data:
                try:
                    payload = json.loads(bytes(report_drain.data).decode("utf-8"))
                except (json.JSONDecodeError, UnicodeDecodeError):
                    payload = None
            if payload is None:
                stderr, payload = _split_sentinel(stderr)

            return self._assemble(
                cfg,
                rc=proc.returncode,
                timed_out=timed_out,
                wall_ms=wall_ms,
                stdout=stdout,
                stderr=stderr,
                stdout_truncated=out_drain.truncated,
                stderr_truncated=err_drain.truncated,
                payload=payload,
                harness_used=use_harness,
            )

    @staticmethod
    def _kill_group(proc: subprocess.Popen) -> None:
        try:
            os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            pass

    # ── container backend ──────────────────────────────────────────────

    def _run_container(self, source: SourceUnit, cfg: SandboxConfig, stdin_text: str) -> RunReport:
        wall_s = cfg.wall_timeout_ms / 1000.0
        name = f"tutor-{uuid.uuid4().hex[:12]}"
        with tempfile.TemporaryDirectory(prefix="tutor-sbx-") as workdir:
            student = os.path.join(workdir, "main.py")
            with open(student, "w", encoding="utf-8") as f:
                f.write(source.text)
            argv = [
                "docker",
                "run",
                "--rm",
                "-i",
                "--name",
                name,
                "--network=none",
                f"--cpus={cfg.cpu_quota}",
                f"--memory={cfg.memory_limit_bytes}b",
                f"--memory-swap={cfg.memory_limit_bytes}b",
                "--pids-limit=64",
                "--read-only",
                "-v",
                f"{workdir}:/work:ro",
                cfg.container_image,
                "python3",
                cfg.container_harness_path,
                "/work/main.py",
            ]
            start = time.perf_counter()
            timed_out = False
            try:
                done = subprocess.run(
                    argv,
                    input=stdin_text.encode("utf-8"),
                    capture_output=True,
                    timeout=wall_s + cfg.grace_ms / 1000.0,
                )
                rc = done.returncode
                stdout_b, stderr_b = done.stdout, done.stderr
            except subprocess.TimeoutExpired as exc:
                timed_out = True
                rc = None
                stdout_b = exc.stdout or b""
                stderr_b = exc.stderr or b""
                subprocess.run(
                    ["docker", "rm", "-f", name], capture_output=True, timeout=30
                )
            wall_ms = int((time.perf_counter() - start) * 1000)

            stdout = stdout_b[:STREAM_CAP].decode("utf-8", errors="replace")
            stderr_full = stderr_b[: STREAM_CAP * 2].decode("utf-8", errors="replace")
            stderr, payload = _split_sentinel(stderr_full)
            return self._assemble(
                cfg,
                rc=rc,
                timed_out=timed_out,
                wall_ms=wall_ms,
                stdout=stdout,
                stderr=stderr[:STREAM_CAP],
                stdout_truncated=len(stdout_b) > STREAM_CAP,
                stderr_truncated=len(stderr_b) > STREAM_CAP,
                payload=payload,
                harness_used=True,
            )

    # ── report assembly ────────────────────────────────────────────────

    def _assemble(
        self,
        cfg: SandboxConfig,
        *,
        rc: int | None,
        timed_out: bool,
        wall_ms: int,
        stdout: str,
        stderr: str,
        stdout_truncated: bool,
        stderr_truncated: bool,
        payload: dict | None,
        harness_used: bool,
    ) -> RunReport:
        common = dict(
            stdout=stdout,
            stderr=stderr,
            exit_code=rc,
            wall_ms=wall_ms,
            peak_rss_bytes=None,
            stdout_truncated=stdout_truncated,
            stderr_truncated=stderr_truncated,
        )
        if timed_out:
            wall_ms = max(wall_ms, cfg.wall_timeout_ms)
            common["wall_ms"] = wall_ms
            return RunReport(status=STATUS_TIMEOUT, **common)

        record: ExceptionRecord | None = None
        if payload is not None:
            if payload.get("ok"):
                return RunReport(status=STATUS_OK, **common)
            record = _record_from_payload(payload)

        if record is None:
            if rc == 0:
                return RunReport(status=STATUS_OK, **common)
            record = parse_traceback(stderr)

        if record is not None:
            status = STATUS_MEMORY if record.type_name == "MemoryError" else STATUS_EXCEPTION
            return RunReport(status=status, exception=record, **common)

        if rc is not None and rc < 0:
            if rc == -signal.SIGXCPU:
                common["wall_ms"] = max(wall_ms, cfg.wall_timeout_ms)
                return RunReport(status=STATUS_TIMEOUT, **common)
            if rc == -signal.SIGKILL:
                return RunReport(
                    status=STATUS_MEMORY,
                    diagnostic="process was killed under the memory limit",
                    **common,
                )
            return RunReport(
                status=STATUS_SANDBOX_ERROR,
                diagnostic=f"interpreter exited on signal {-rc}",
                **common,
            )
        if harness_used:
            return RunReport(
                status=STATUS_SANDBOX_ERROR,
                diagnostic="harness emitted no report",
                **common,
            )
        return RunReport(status=STATUS_OK, **common)
