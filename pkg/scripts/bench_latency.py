#!/usr/bin/env python3
"""Measure offline submit-to-done latency for the bundled fixtures.

Reports min/median/p90 over N runs after one warm-up (sandbox cold start
excluded), mirroring how the engagement-threshold criterion is checked.

    python scripts/bench_latency.py --runs 20
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from codetutor.config import AppConfig
from codetutor.pipeline import collect_events
from codetutor.sandbox import SandboxConfig, SandboxExecutor

from record_stream import FIXTURES


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=10)
    args = parser.parse_args()

    config = AppConfig(salt="bench", store_path=":memory:")
    executor = SandboxExecutor(SandboxConfig(wall_timeout_ms=5_000))

    print(f"{'fixture':<20}{'min':>9}{'median':>9}{'p90':>9}  (seconds)")
    for name, (text, stdin_text) in FIXTURES.items():
        collect_events(config=config, executor=executor, text=text, stdin_text=stdin_text)
        samples = []
        for _ in range(args.runs):
            started = time.perf_counter()
            collect_events(
                config=config, executor=executor, text=text, stdin_text=stdin_text
            )
            samples.append(time.perf_counter() - started)
        samples.sort()
        p90 = samples[min(len(samples) - 1, int(0.9 * len(samples)))]
        print(
            f"{name:<20}{samples[0]:>9.3f}{statistics.median(samples):>9.3f}{p90:>9.3f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
