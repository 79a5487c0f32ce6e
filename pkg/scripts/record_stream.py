#!/usr/bin/env python3
"""Record pipeline event streams as NDJSON, one event per line.

Used to freeze replay fixtures for the web client's snapshot tests:

    python scripts/record_stream.py case_study_1 > stream.ndjson
    python scripts/record_stream.py --file student.py --mode socratic
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from codetutor.config import AppConfig
from codetutor.pipeline import collect_events
from codetutor.sandbox import SandboxConfig, SandboxExecutor

FIXTURES = {
    "case_study_1": (
        "def average(nums):\n"
        "    return sum(nums)/len(nums)\n"
        "print(average([]))",
        None,
    ),
    "figure_sum_mixed": ('print("Sum:", sum([1, "2"]))\n', None),
    "figure_input_arith": (
        "age = input(\"Enter your age: \")\n"
        "print(\"Next year, you'll be\", age + 1)\n",
        "12\n",
    ),
    "blocked_import": ("import os\nprint(os.getcwd())\n", None),
    "clean_hello": ("print('hi')\n", None),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("fixture", nargs="?", choices=sorted(FIXTURES), default=None)
    parser.add_argument("--file", help="record a stream for this source file instead")
    parser.add_argument("--mode", choices=["direct", "socratic"], default="direct")
    parser.add_argument("--level", default="beginner")
    parser.add_argument("--session", help="include a session event with this pseudonym")
    args = parser.parse_args()

    if args.file:
        text, stdin_text = Path(args.file).read_text(encoding="utf-8"), None
    elif args.fixture:
        text, stdin_text = FIXTURES[args.fixture]
    else:
        parser.error("give a fixture name or --file")

    config = AppConfig(salt="recording", store_path=":memory:")
    executor = SandboxExecutor(SandboxConfig(wall_timeout_ms=5_000))
    events = collect_events(
        text,
        config,
        executor,
        pseudonym=args.session,
        mode=args.mode,
        level=args.level,
        stdin_text=stdin_text,
    )
    for event in events:
        print(json.dumps(event.to_wire(), ensure_ascii=False))
    return 0


if __name__ == "__main__":
    sys.exit(main())
