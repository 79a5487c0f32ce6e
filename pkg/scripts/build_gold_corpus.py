#!/usr/bin/env python3
"""Regenerate the bundled gold corpus.

Syntax, runtime, and clean labels come from the auto-tagger (parse outcome
or a sandbox run of the reference interpreter) so no label is asserted by
hand.  Logic-suspect cases are the exception: they run clean by design, so
they carry fixture labels and exist to score the heuristics.

Usage: python scripts/build_gold_corpus.py [output_path]
"""

from __future__ import annotations

import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from codetutor.evalkit import CAT_LOGIC, GoldCase, auto_tag, save_corpus
from codetutor.registry import data_path
from codetutor.sandbox import SandboxConfig, SandboxExecutor

SYNTAX_SOURCES = {
    "syn-01": "def f(:\n    pass\n",
    "syn-02": "if True\n    x = 1\n",
    "syn-03": "for i in range(3)\n    print(i)\n",
    "syn-04": "while x < 3\n    x += 1\n",
    "syn-05": "print('hi'\n",
    "syn-06": "def f():\nreturn 1\n",
    "syn-07": "  x = 1\n",
    "syn-08": "x = (1,\n2\n",
    "syn-09": "class C\n    pass\n",
    "syn-10": "x === 3\n",
    "syn-11": "def f(a b):\n    pass\n",
    "syn-12": "return 5\n",
    "syn-13": "x = 1\n  y = 2\n",
    "syn-14": "if True:\npass\n",
    "syn-15": "lambda: :\n",
}

RUNTIME_SOURCES = {
    "run-01": ("total = 5\nprint(totl)\n", None),
    "run-02": ("x = y + 1\nprint(x)\n", None),
    "run-03": ("def f():\n    return count\nprint(f())\n", None),
    "run-04": ("def g():\n    x += 1\ng()\n", None),
    "run-05": ('print("Sum:", sum([1, "2"]))\n', None),
    "run-06": (
        "age = input('Enter your age: ')\nprint('Next year you will be', age + 1)\n",
        "12\n",
    ),
    "run-07": ("print(len(5))\n", None),
    "run-08": ("print('a' * 'b')\n", None),
    "run-09": ("print(int('abc'))\n", None),
    "run-10": ("print(int('12.5'))\n", None),
    "run-11": ("xs = [1, 2]\nxs.remove(3)\n", None),
    "run-12": ("d = {'a': 1}\nprint(d['b'])\n", None),
    "run-13": ("config = {}\nprint(config['mode'])\n", None),
    "run-14": ("xs = [1, 2]\nprint(xs[5])\n", None),
    "run-15": ("s = 'ab'\nprint(s[10])\n", None),
    "run-16": (
        "def average(nums):\n    return sum(nums)/len(nums)\nprint(average([]))\n",
        None,
    ),
    "run-17": ("print(10 / 0)\n", None),
    "run-18": ("n = 0\nprint(100 % n)\n", None),
    "run-19": (
        "def factorial(n):\n    if n == 0:\n        return 1\n    else:\n"
        "        return n * factorial(n-1)\nprint(factorial(5.5))\n",
        None,
    ),
    "run-20": ("def loop(n):\n    return loop(n + 1)\nloop(0)\n", None),
    "run-21": ("x = 5\nx.append(1)\n", None),
    "run-22": ("'abc'.push('d')\n", None),
    "run-23": ("import nonexistent_module_zz\n", None),
    "run-24": ("from math import cosine\n", None),
    "run-25": ("assert 1 == 2, 'broken'\n", None),
    "run-26": ("x = 5\nassert x < 0\n", None),
    "run-27": ("while True:\n    pass\n", None),
    "run-28": ("n = 1\nwhile n > 0:\n    n += 1\n", None),
    "run-29": ("x = bytearray(10**9)\n", None),
    "run-30": ("xs = [0] * (300 * 10**6)\n", None),
}

# These run clean on purpose; their labels score the logic heuristics.
LOGIC_SOURCES = {
    "log-01": "def average(nums):\n    return sum(nums) / len(nums)\nprint(average([10, 20, 30]))\n",
    "log-02": "def mean_score(scores):\n    total = 0\n    for s in scores:\n        total += s\n    return total / len(scores)\nprint(mean_score([1, 2]))\n",
    "log-03": "def ratio(parts):\n    return 100 / len(parts)\nprint(ratio([1]))\n",
    "log-04": "def per_item(total, items):\n    return total / len(items)\nprint(per_item(10, [1, 2]))\n",
    "log-05": "def add(a, b):\n    result = a + b\nprint(add(2, 3))\n",
    "log-06": "def biggest(xs):\n    if not xs:\n        return None\n    m = max(xs)\nprint(biggest([3, 1]))\n",
    "log-07": "def greet(name):\n    message = 'Hello ' + name\nprint(greet('Sam'))\n",
    "log-08": "def double(x):\n    if x > 0:\n        return 2 * x\nprint(double(-3))\n",
    "log-09": "n = 0\nwhile n > 5:\n    print('waiting')\nprint('done')\n",
    "log-10": "flag = False\nwhile flag:\n    print('busy')\nprint('ok')\n",
}

CLEAN_SOURCES = {
    "cln-01": (
        "def average(nums):\n    if not nums:\n        return 0\n"
        "    return sum(nums) / len(nums)\nprint(average([1, 2, 3]))\n",
        None,
    ),
    "cln-02": ("total = 0\nfor n in [1, 2, 3]:\n    total += n\nprint(total)\n", None),
    "cln-03": (
        "def factorial(n):\n    if n == 0:\n        return 1\n"
        "    return n * factorial(n - 1)\nprint(factorial(5))\n",
        None,
    ),
    "cln-04": ("words = ['a', 'b']\nprint(len(words))\n", None),
    "cln-05": ("name = input()\nprint('Hello ' + name)\n", "Ada\n"),
}


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else data_path("gold_corpus.jsonl")
    executor = SandboxExecutor(SandboxConfig(wall_timeout_ms=1_500))

    cases: list[GoldCase] = []
    for cid, source in SYNTAX_SOURCES.items():
        cases.append(auto_tag(GoldCase(id=cid, source=source), executor))
    for cid, (source, stdin) in RUNTIME_SOURCES.items():
        cases.append(auto_tag(GoldCase(id=cid, source=source, stdin=stdin), executor))
    for cid, source in LOGIC_SOURCES.items():
        cases.append(
            GoldCase(
                id=cid,
                source=source,
                expected=((CAT_LOGIC, "LOGIC_SUSPECT"),),
                origin="fixture",
            )
        )
    for cid, (source, stdin) in CLEAN_SOURCES.items():
        tagged = auto_tag(GoldCase(id=cid, source=source, stdin=stdin), executor)
        assert not tagged.expected, f"{cid} was meant to run clean: {tagged.expected}"
        cases.append(tagged)

    by_category = Counter(case.category for case in cases)
    by_tag = Counter(case.group for case in cases)
    print("categories:", dict(by_category))
    print("tags:", dict(by_tag))
    assert by_category["syntax"] == 15, by_category
    assert by_category["runtime"] == 30, by_category
    assert by_category["logic"] == 10, by_category
    assert by_category["clean"] == 5, by_category
    runtime_tags = Counter(
        case.group for case in cases if case.category == "runtime"
    )
    assert all(count >= 2 for count in runtime_tags.values()), runtime_tags

    save_corpus(
        out,
        cases,
        header=(
            "Gold corpus: 60 cases (15 syntax / 30 runtime / 10 logic / 5 clean).\n"
            "Labels for syntax, runtime, and clean cases are derived by the\n"
            "auto-tagger (reference-interpreter runs); logic cases are fixtures\n"
            "that run clean and score the heuristics.\n"
            "Regenerate with scripts/build_gold_corpus.py."
        ),
    )
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
