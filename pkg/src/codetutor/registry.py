"""Line-oriented record format used by every shipped data registry.

One record per line, pipe-separated ``key=value`` fields:

    id=IMPORT_OS|kind=module-import|subject=os|rationale=process control

Lines whose first non-blank character is ``#`` are comments; blank lines
are skipped.  Values may contain ``=`` but not ``|`` or newlines.  The
same format backs the denylist, the exception tag map, the feedback
templates, and both lexicons, so curricula can edit them without code
changes.
"""

from __future__ import annotations

import importlib.resources
from pathlib import Path

from .errors import RegistryMissing

Record = dict[str, str]


def parse_records(text: str) -> list[Record]:
    records: list[Record] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        record: Record = {}
        for field in line.split("|"):
            if "=" not in field:
                raise ValueError(f"line {line_no}: field {field!r} has no '='")
            key, value = field.split("=", 1)
            record[key.strip()] = value
        records.append(record)
    return records


def load_records(path: str | Path) -> list[Record]:
    path = Path(path)
    if not path.is_file():
        raise RegistryMissing(f"registry file not found: {path}")
    return parse_records(path.read_text(encoding="utf-8"))


def data_path(name: str) -> Path:
    """Path of a registry shipped inside the package."""
    return Path(importlib.resources.files("codetutor") / "data" / name)


def load_bundled(name: str) -> list[Record]:
    return load_records(data_path(name))
