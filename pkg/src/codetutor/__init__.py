"""Self-hostable tutoring engine for student Python code.

Static analysis, sandboxed execution, hybrid error classification, and
template-first pedagogical feedback behind a streaming API and a CLI.
"""

from .classifier import ClassifiedError, classify, detect_logic_suspects, parse_traceback
from .config import AppConfig, load_config
from .errors import TutorError
from .events import FeedbackEvent, check_stream
from .feedback import FeedbackBundle, classify_intent, generate_feedback
from .linting import StaticFinding, lint_source
from .parsing import ParseOutcome, SyntaxDiagnostic, parse_source
from .pipeline import analyze, collect_events, run_pipeline
from .reports import ExceptionRecord, RunReport
from .sandbox import SandboxConfig, SandboxExecutor
from .sanitizer import SanitizerVerdict, sanitize
from .source import SourceUnit
from .store import TutorStore, pseudonymize

__version__ = "0.1.0"

__all__ = [
    "AppConfig",
    "ClassifiedError",
    "ExceptionRecord",
    "FeedbackBundle",
    "FeedbackEvent",
    "ParseOutcome",
    "RunReport",
    "SandboxConfig",
    "SandboxExecutor",
    "SanitizerVerdict",
    "SourceUnit",
    "StaticFinding",
    "SyntaxDiagnostic",
    "TutorError",
    "TutorStore",
    "analyze",
    "check_stream",
    "classify",
    "classify_intent",
    "collect_events",
    "detect_logic_suspects",
    "generate_feedback",
    "lint_source",
    "load_config",
    "parse_source",
    "parse_traceback",
    "pseudonymize",
    "run_pipeline",
    "sanitize",
]
