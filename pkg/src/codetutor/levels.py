"""Explanation levels shared by the linter, feedback engine, and service."""

BEGINNER = "beginner"
INTERMEDIATE = "intermediate"
ADVANCED = "advanced"

LEVELS = (BEGINNER, INTERMEDIATE, ADVANCED)


def lower_level(level: str) -> str | None:
    """Next simpler level, or None when already at beginner."""
    idx = LEVELS.index(level)
    return LEVELS[idx - 1] if idx > 0 else None
