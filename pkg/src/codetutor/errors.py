"""Exception types shared across the tutoring engine."""


class TutorError(Exception):
    """Base class for engine-level failures (never shown raw to students)."""


class SourceTooLarge(TutorError):
    """Submitted source exceeds the configured size cap."""


class RegistryMissing(TutorError):
    """A required data registry is absent or too small to be trusted."""


class UnknownRule(TutorError):
    """A finding references a rule id that is not in the registry."""


class BlockedSource(TutorError):
    """Source failed the sanitizer re-check inside the executor."""

    def __init__(self, violations):
        super().__init__(f"{len(violations)} denylist violation(s)")
        self.violations = list(violations)


class ExecutorBusy(TutorError):
    """Sandbox pool is saturated and the caller asked not to wait."""


class MissingSalt(TutorError):
    """Pseudonymization salt is not configured."""


class UnknownSession(TutorError):
    """Session id does not exist (or has been purged)."""


class SessionExpired(TutorError):
    """Session exists but its retention window has closed."""


class EmptyGold(TutorError):
    """Accuracy requested over an empty gold corpus."""


class ZeroPreScore(TutorError):
    """Gain score undefined for a zero pre-test score."""


class CorpusFormatError(TutorError):
    """Gold corpus file is malformed."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"corpus line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason
