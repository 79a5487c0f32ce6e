"""Pseudonymized persistence with hard retention and regulator-style export.

Backing store is a single sqlite file in WAL mode (or ``:memory:`` for
tests), wrapped in a small interface so deployments can swap it out.
Raw identifiers never reach this module: callers pseudonymize first, and
the salt lives in configuration, never beside the data.
"""

from __future__ import annotations

import base64
import hashlib
import json
import sqlite3
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import MissingSalt, SessionExpired, UnknownSession
from .feedback import FeedbackBundle
from .source import SourceUnit

DEFAULT_RETENTION_DAYS = 30
EXPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RetentionPolicy:
    days: int = DEFAULT_RETENTION_DAYS

    def __post_init__(self):
        if self.days < 1:
            raise ValueError("retention must be at least one day")

    @property
    def seconds(self) -> int:
        return self.days * 86_400


def pseudonymize(raw_identifier: str, salt: str) -> str:
    """Salted SHA-256, truncated and base32-encoded into the S-XXXXXX form.

    Deterministic for a fixed salt; the raw identifier itself is never
    stored anywhere.
    """
    if not salt:
        raise MissingSalt("pseudonymization salt is not configured")
    digest = hashlib.sha256((salt + raw_identifier).encode("utf-8")).digest()
    return "S-" + base64.b32encode(digest).decode("ascii")[:6]


@dataclass
class SessionRecord:
    pseudonym: str
    created_at: float
    expires_at: float
    retry_counters: dict[str, int] = field(default_factory=dict)


@dataclass
class StoredSubmission:
    pseudonym: str
    seq: int
    sha256: str
    source: str
    tags: tuple[str, ...]
    bundle: FeedbackBundle
    stored_at: float


def _iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


class TutorStore:
    """Serialized writes, concurrent-safe reads, explicit clock for tests."""

    def __init__(
        self,
        path: str = ":memory:",
        retention: RetentionPolicy | None = None,
        clock=time.time,
    ):
        self.retention = retention or RetentionPolicy()
        self._clock = clock
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        with self._lock:
            if path != ":memory:":
                self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS sessions ("
                " pseudonym TEXT PRIMARY KEY,"
                " created_at REAL NOT NULL,"
                " expires_at REAL NOT NULL,"
                " retry_counters TEXT NOT NULL DEFAULT '{}')"
            )
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS submissions ("
                " pseudonym TEXT NOT NULL,"
                " seq INTEGER NOT NULL,"
                " sha256 TEXT NOT NULL,"
                " source TEXT NOT NULL,"
                " tags TEXT NOT NULL,"
                " bundle TEXT NOT NULL,"
                " stored_at REAL NOT NULL,"
                " PRIMARY KEY (pseudonym, seq))"
            )
            self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # ── sessions ───────────────────────────────────────────────────────

    def create_session(self, pseudonym: str, now: float | None = None) -> SessionRecord:
        """Create (or return) the session for a pseudonym; idempotent."""
        now = self._clock() if now is None else now
        with self._lock:
            row = self._session_row(pseudonym)
            if row is not None and row.expires_at > now:
                return row
            expires = now + self.retention.seconds
            self._conn.execute(
                "INSERT OR REPLACE INTO sessions VALUES (?, ?, ?, '{}')",
                (pseudonym, now, expires),
            )
            self._conn.commit()
            return SessionRecord(pseudonym, now, expires)

    def _session_row(self, pseudonym: str) -> SessionRecord | None:
        cur = self._conn.execute(
            "SELECT pseudonym, created_at, expires_at, retry_counters"
            " FROM sessions WHERE pseudonym = ?",
            (pseudonym,),
        )
        row = cur.fetchone()
        if row is None:
            return None
        return SessionRecord(row[0], row[1], row[2], json.loads(row[3]))

    def get_session(self, pseudonym: str, now: float | None = None) -> SessionRecord:
        now = self._clock() if now is None else now
        with self._lock:
            row = self._session_row(pseudonym)
        if row is None or row.expires_at <= now:
            # an expired session behaves exactly like one that never existed
            raise UnknownSession(pseudonym)
        return row

    def bump_retry(self, pseudonym: str, tag: str) -> int:
        with self._lock:
            session = self.get_session(pseudonym)
            count = session.retry_counters.get(tag, 0) + 1
            session.retry_counters[tag] = count
            self._conn.execute(
                "UPDATE sessions SET retry_counters = ? WHERE pseudonym = ?",
                (json.dumps(session.retry_counters), pseudonym),
            )
            self._conn.commit()
            return count

    def retry_count(self, pseudonym: str, tag: str) -> int:
        return self.get_session(pseudonym).retry_counters.get(tag, 0)

    # ── submissions ────────────────────────────────────────────────────

    def store_submission(
        self,
        pseudonym: str,
        source: SourceUnit,
        bundle: FeedbackBundle,
        tags: tuple[str, ...] = (),
        now: float | None = None,
    ) -> int:
        now = self._clock() if now is None else now
        with self._lock:
            row = self._session_row(pseudonym)
            if row is None:
                raise UnknownSession(pseudonym)
            if row.expires_at <= now:
                raise SessionExpired(pseudonym)
            cur = self._conn.execute(
                "SELECT COALESCE(MAX(seq), 0) FROM submissions WHERE pseudonym = ?",
                (pseudonym,),
            )
            seq = cur.fetchone()[0] + 1
            self._conn.execute(
                "INSERT INTO submissions VALUES (?, ?, ?, ?, ?, ?, ?)",
                (
                    pseudonym,
                    seq,
                    source.sha256,
                    source.text,
                    json.dumps(list(tags)),
                    json.dumps(bundle.to_payload()),
                    now,
                ),
            )
            self._conn.commit()
            return seq

    def get_history(self, pseudonym: str, now: float | None = None) -> list[StoredSubmission]:
        self.get_session(pseudonym, now)  # raises for absent/expired sessions
        with self._lock:
            cur = self._conn.execute(
                "SELECT pseudonym, seq, sha256, source, tags, bundle, stored_at"
                " FROM submissions WHERE pseudonym = ? ORDER BY seq",
                (pseudonym,),
            )
            rows = cur.fetchall()
        return [self._submission(row) for row in rows]

    @staticmethod
    def _submission(row) -> StoredSubmission:
        payload = json.loads(row[5])
        bundle = FeedbackBundle(
            diagnosis=payload["diagnosis"],
            concept=payload["concept"],
            example=payload["example"],
            socratic_question=payload["socratic_question"],
            notices=tuple(payload["notices"]),
            level=payload["level"],
            provenance=payload["provenance"],
        )
        return StoredSubmission(
            pseudonym=row[0],
            seq=row[1],
            sha256=row[2],
            source=row[3],
            tags=tuple(json.loads(row[4])),
            bundle=bundle,
            stored_at=row[6],
        )

    # ── retention ──────────────────────────────────────────────────────

    def purge_expired(self, now: float | None = None) -> int:
        """Remove every record past its retention boundary; idempotent."""
        now = self._clock() if now is None else now
        cutoff = now - self.retention.seconds
        with self._lock:
            subs = self._conn.execute(
                "DELETE FROM submissions WHERE stored_at <= ?", (cutoff,)
            ).rowcount
            sessions = self._conn.execute(
                "DELETE FROM sessions WHERE expires_at <= ?", (now,)
            ).rowcount
            self._conn.commit()
        return subs + sessions

    # ── export ─────────────────────────────────────────────────────────

    def export_session(self, pseudonym: str, now: float | None = None) -> dict:
        """Right-of-access bundle: everything stored, zero raw identifiers.

        Redaction is structural; raw identifiers have no field to live in.
        """
        self.get_session(pseudonym, now)
        history = self.get_history(pseudonym, now)
        return {
            "schema_version": EXPORT_SCHEMA_VERSION,
            "pseudonym": pseudonym,
            "submissions": [
                {
                    "seq": sub.seq,
                    "sha256": sub.sha256,
                    "source": sub.source,
                    "error_tags": list(sub.tags),
                    "feedback": sub.bundle.to_payload(),
                    "stored_at": _iso(sub.stored_at),
                }
                for sub in history
            ],
        }

    # test/maintenance oracle: every persisted byte, for PII scanning
    def dump_all_bytes(self) -> str:
        with self._lock:
            return "\n".join(self._conn.iterdump())
