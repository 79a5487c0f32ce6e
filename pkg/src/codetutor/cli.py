"""One-shot command line interface.

Exit codes for ``analyze``: 0 clean run, 1 errors were diagnosed (or the
code was blocked), 2 usage or sandbox faults.  ``eval`` exits nonzero
when an accuracy threshold fails.  Output stays plain text: sections and
indentation only, no visual chrome.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import AppConfig, load_config
from .errors import TutorError, UnknownSession
from .events import (
    EV_CONCEPT,
    EV_DIAGNOSIS,
    EV_DONE,
    EV_ERROR,
    EV_EXAMPLE,
    EV_NOTICE,
    EV_QUESTION,
    EV_RUN_REPORT,
    EV_STATIC_FINDINGS,
    FeedbackEvent,
)
from .evalkit import run_benchmark, thresholds_pass
from .pipeline import collect_events, registry_for
from .registry import data_path
from .sandbox import SandboxExecutor
from .store import RetentionPolicy, TutorStore


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codetutor",
        description="Python tutoring engine: analyze student code and explain errors.",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the streaming service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    analyze = sub.add_parser("analyze", help="analyze one file and print feedback")
    analyze.add_argument("--file", required=True, help="student source file")
    analyze.add_argument("--query", help="the student's question, if any")
    analyze.add_argument("--mode", choices=["direct", "socratic"])
    analyze.add_argument("--level", choices=["beginner", "intermediate", "advanced"])
    analyze.add_argument("--stdin", help="text fed to the program as standard input")
    analyze.add_argument(
        "--offline", action="store_true", help="ignore any configured provider"
    )
    analyze.add_argument(
        "--json", action="store_true", help="emit the raw event array instead of text"
    )

    evaluate = sub.add_parser("eval", help="score the pipeline against a gold corpus")
    evaluate.add_argument(
        "--corpus", default=str(data_path("gold_corpus.jsonl")), help="corpus path"
    )
    evaluate.add_argument("--table", action="store_true", help="print the table (default)")
    evaluate.add_argument("--json", action="store_true", help="print the report as JSON")

    purge = sub.add_parser("purge", help="remove records past retention")
    purge.add_argument("--now", action="store_true", required=True)

    export = sub.add_parser("export", help="export one session's data")
    export.add_argument("--session", required=True, help="pseudonym, e.g. S-5X9T2Y")
    export.add_argument("--out", required=True, help="output JSON path")

    return parser


def _render_events(events: list[FeedbackEvent]) -> str:
    lines: list[str] = []
    for event in events:
        payload = event.payload
        if event.type == EV_STATIC_FINDINGS:
            lines.append("Static findings:")
            for finding in payload["findings"]:
                lines.append(f"  line {finding['line']}: {finding['text']}")
        elif event.type == EV_RUN_REPORT:
            lines.append(f"Run status: {payload['status']}")
            if payload["stdout"]:
                lines.append("Program output:")
                lines.extend("  " + l for l in payload["stdout"].splitlines())
            if payload["stderr"]:
                lines.append("Program errors:")
                lines.extend("  " + l for l in payload["stderr"].splitlines())
        elif event.type == EV_DIAGNOSIS and payload["text"]:
            where = f" (line {payload['line']})" if payload.get("line") else ""
            lines.append(f"Diagnosis{where}: {payload['text']}")
        elif event.type == EV_CONCEPT:
            lines.append(f"Guidance: {payload['text']}")
        elif event.type == EV_EXAMPLE:
            lines.append("Example:")
            lines.extend("  " + l for l in payload["code"].splitlines())
        elif event.type == EV_QUESTION:
            lines.append(f"Question: {payload['text']}")
        elif event.type == EV_NOTICE:
            lines.append(f"Notice: {payload['text']}")
            for rule in payload.get("rules", []):
                lines.append(
                    f"  blocked by {rule['rule_id']} (line {rule['line']}): "
                    f"{rule['rationale']}"
                )
        elif event.type == EV_ERROR:
            lines.append(f"Service error: {payload.get('message', 'unknown')}")
    return "\n".join(lines)


def _analyze_exit_code(events: list[FeedbackEvent]) -> int:
    if any(e.type == EV_ERROR for e in events):
        return 2
    if any(
        e.type == EV_NOTICE and e.payload.get("kind") == "sandbox_error" for e in events
    ):
        return 2
    done = next(e for e in events if e.type == EV_DONE)
    if done.payload.get("errors", 0) > 0 or done.payload.get("blocked"):
        return 1
    return 0


def _cmd_analyze(args, config: AppConfig) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return 2
    if args.offline:
        config.provider = None
    executor = SandboxExecutor(config.sandbox, registry_for(config))
    events = collect_events(
        text,
        config,
        executor,
        query=args.query,
        mode=args.mode,
        level=args.level,
        stdin_text=args.stdin,
    )
    if args.json:
        print(json.dumps([e.to_wire() for e in events], indent=2))
    else:
        print(_render_events(events))
    return _analyze_exit_code(events)


def _cmd_eval(args, config: AppConfig) -> int:
    report, table = run_benchmark(args.corpus)
    if args.json:
        print(
            json.dumps(
                {
                    "n": report.n,
                    "accuracy": report.accuracy,
                    "confusion": {
                        f"{gold}->{predicted}": count
                        for (gold, predicted), count in sorted(report.confusion.items())
                    },
                },
                indent=2,
            )
        )
    if args.table or not args.json:
        print(table)
    return 0 if thresholds_pass(report) else 1


def _cmd_purge(args, config: AppConfig) -> int:
    store = TutorStore(config.store_path, RetentionPolicy(config.retention_days))
    purged = store.purge_expired()
    store.close()
    print(f"purged {purged} record(s)")
    return 0


def _cmd_export(args, config: AppConfig) -> int:
    store = TutorStore(config.store_path, RetentionPolicy(config.retention_days))
    try:
        bundle = store.export_session(args.session)
    except UnknownSession:
        print(f"unknown session: {args.session}", file=sys.stderr)
        return 2
    finally:
        store.close()
    Path(args.out).write_text(json.dumps(bundle, indent=2), encoding="utf-8")
    print(f"exported {len(bundle['submissions'])} submission(s) to {args.out}")
    return 0


def _cmd_serve(args, config: AppConfig) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "serve":
            return _cmd_serve(args, config)
        if args.command == "analyze":
            return _cmd_analyze(args, config)
        if args.command == "eval":
            return _cmd_eval(args, config)
        if args.command == "purge":
            return _cmd_purge(args, config)
        if args.command == "export":
            return _cmd_export(args, config)
    except TutorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
