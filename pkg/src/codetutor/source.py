"""Student source as an immutable value with identity hash."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import SourceTooLarge

MAX_SOURCE_BYTES = 64 * 1024


@dataclass(frozen=True)
class SourceUnit:
    text: str
    line_count: int = field(init=False)
    sha256: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "line_count", len(self.text.splitlines()))
        object.__setattr__(
            self, "sha256", hashlib.sha256(self.text.encode("utf-8")).hexdigest()
        )

    @classmethod
    def from_text(cls, text: str, max_bytes: int = MAX_SOURCE_BYTES) -> "SourceUnit":
        size = len(text.encode("utf-8"))
        if size > max_bytes:
            raise SourceTooLarge(f"source is {size} bytes, cap is {max_bytes}")
        return cls(text)
