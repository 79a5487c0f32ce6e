#!/usr/bin/env python3
"""In-sandbox run wrapper: execute a student program, report structure.

Invocation: ``python exec_harness.py student_file`` with stdin piped
through.  The student's stdout/stderr pass through untouched on fds 1/2;
a single-line JSON report goes to fd 3, or to stderr behind a sentinel
prefix when fd 3 does not exist (e.g. under docker).  The report channel
is claimed (duplicated and closed) before any student code runs, so
student code never holds the descriptor.

Report schema (version 1, lowercase snake_case keys)::

    {"schema_version": 1, "ok": bool,
     "exception": {"type", "message", "line", "frames"} | null,
     "wall_ms": int}

Only interpreter built-ins are imported: json for serialization, time for
timing, sys/os for streams and exit codes.
"""

import json
import os
import sys
import time

SCHEMA_VERSION = 1
SENTINEL = "#TUTOR-REPORT# "
MAX_FRAMES = 25


def _claim_report_channel():
    """Move fd 3 to a private descriptor before student code can see it."""
    try:
        private = os.dup(3)
        os.close(3)
        return private
    except OSError:
        return None


def _emit(report_fd, payload):
    line = json.dumps(payload, ensure_ascii=False)
    if report_fd is not None:
        try:
            os.write(report_fd, (line + "\n").encode("utf-8"))
            os.close(report_fd)
            return
        except OSError:
            pass
    sys.stderr.write(SENTINEL + line + "\n")
    sys.stderr.flush()


def _student_frames(tb, path):
    frames = []
    while tb is not None:
        code = tb.tb_frame.f_code
        if code.co_filename == path:
            frames.append([code.co_name or "<module>", tb.tb_lineno])
        tb = tb.tb_next
    return frames


def _print_traceback(path, src_lines, frames, type_name, message):
    """Interpreter-style traceback on stderr, harness frames hidden."""
    sys.stderr.write("Traceback (most recent call last):\n")
    shown = frames
    skipped = 0
    if len(frames) > MAX_FRAMES:
        head = MAX_FRAMES // 2
        tail = MAX_FRAMES - head
        shown = frames[:head] + frames[-tail:]
        skipped = len(frames) - len(shown)
    for i, (func, line_no) in enumerate(shown):
        if skipped and i == MAX_FRAMES // 2:
            sys.stderr.write(
                "  [%d more frames hidden by the run harness]\n" % skipped
            )
        name = "<module>" if func == "<module>" else func
        sys.stderr.write('  File "%s", line %d, in %s\n' % (path, line_no, name))
        if 0 < line_no <= len(src_lines):
            sys.stderr.write("    %s\n" % src_lines[line_no - 1].strip())
    sys.stderr.write(
        "%s: %s\n" % (type_name, message) if message else "%s\n" % type_name
    )
    sys.stderr.flush()


def _print_syntax_error(path, exc):
    sys.stderr.write('  File "%s", line %s\n' % (path, exc.lineno or 1))
    if exc.text:
        stripped = exc.text.rstrip("\n")
        sys.stderr.write("    %s\n" % stripped)
        if exc.offset:
            sys.stderr.write("    %s^\n" % (" " * max(exc.offset - 1, 0)))
    sys.stderr.write("%s: %s\n" % (type(exc).__name__, exc.msg or "invalid syntax"))
    sys.stderr.flush()


def run_wrapped(path, report_fd):
    started = time.monotonic()
    ok = True
    exception = None
    exit_code = 0
    src = ""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            src = handle.read()
        code = compile(src, path, "exec")
    except SyntaxError as exc:
        ok = False
        exit_code = 1
        exception = {
            "type": type(exc).__name__,
            "message": exc.msg or "invalid syntax",
            "line": exc.lineno,
            "frames": [],
        }
        _print_syntax_error(path, exc)
        code = None
    except (OSError, ValueError) as exc:
        ok = False
        exit_code = 1
        exception = {
            "type": "HarnessInternalError",
            "message": "cannot execute %s: %s" % (path, exc),
            "line": None,
            "frames": [],
        }
        code = None

    if code is not None:
        namespace = {
            "__name__": "__main__",
            "__file__": path,
            "__builtins__": __builtins__,
            "__doc__": None,
            "__package__": None,
            "__spec__": None,
            "__loader__": None,
        }
        src_lines = src.splitlines()
        try:
            exec(code, namespace)
        except SystemExit as exc:
            # an explicit exit() is termination, not an error
            if isinstance(exc.code, int):
                exit_code = exc.code
            elif exc.code is not None:
                sys.stderr.write("%s\n" % exc.code)
                exit_code = 1
        except BaseException as exc:
            ok = False
            exit_code = 1
            frames = _student_frames(exc.__traceback__, path)
            exception = {
                "type": type(exc).__name__,
                "message": str(exc),
                "line": frames[-1][1] if frames else None,
                "frames": frames[:MAX_FRAMES],
            }
            _print_traceback(
                path, src_lines, frames, type(exc).__name__, str(exc)
            )

    try:
        sys.stdout.flush()
    except (OSError, ValueError):
        pass
    wall_ms = int((time.monotonic() - started) * 1000)
    _emit(
        report_fd,
        {
            "schema_version": SCHEMA_VERSION,
            "ok": ok,
            "exception": exception,
            "wall_ms": wall_ms,
        },
    )
    return exit_code


def main(argv):
    report_fd = _claim_report_channel()
    if len(argv) != 2:
        _emit(
            report_fd,
            {
                "schema_version": SCHEMA_VERSION,
                "ok": False,
                "exception": {
                    "type": "HarnessInternalError",
                    "message": "usage: exec_harness.py student_file",
                    "line": None,
                    "frames": [],
                },
                "wall_ms": 0,
            },
        )
        return 2
    return run_wrapped(argv[1], report_fd)


if __name__ == "__main__":
    sys.exit(main(sys.argv))
