"""Durable relational log store (SQLite, WAL journaling).

Tables: sessions, interactions (one row per user input, updated in place on
confirmation), functions (registry additions), notes, pending_actions
(crash-restart durability for unexecuted actions).
"""

from __future__ import annotations

import datetime as _dt
import json
import sqlite3
import threading
from dataclasses import dataclass, field
from typing import Optional

from ..errors import SchemaMismatch, StorageUnavailable

SCHEMA_VERSION = 1

_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT);
CREATE TABLE IF NOT EXISTS sessions (
    id TEXT PRIMARY KEY,
    started_at TEXT NOT NULL,
    instrument TEXT
);
CREATE TABLE IF NOT EXISTS interactions (
    interaction_id INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id TEXT NOT NULL,
    timestamp TEXT NOT NULL,
    input_text TEXT NOT NULL,
    input_mode TEXT NOT NULL DEFAULT 'text',
    classifier_label TEXT,
    cog_invoked TEXT,
    cog_output TEXT,
    confirmed INTEGER,
    edited_output TEXT,
    executed_ok INTEGER,
    latency_ms TEXT
);
CREATE TABLE IF NOT EXISTS functions (
    id TEXT PRIMARY KEY,
    entry_json TEXT NOT NULL,
    added_at TEXT NOT NULL,
    added_by TEXT
);
CREATE TABLE IF NOT EXISTS notes (
    ts TEXT NOT NULL,
    session TEXT NOT NULL,
    text TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS pending_actions (
    action_id TEXT PRIMARY KEY,
    session_id TEXT NOT NULL,
    command_class TEXT NOT NULL,
    payload_json TEXT NOT NULL,
    status TEXT NOT NULL,
    created_at TEXT NOT NULL
);
"""


@dataclass
class LogRow:
    session_id: str
    input_text: str
    input_mode: str = "text"
    classifier_label: Optional[str] = None
    cog_invoked: Optional[str] = None
    cog_output: Optional[str] = None
    confirmed: Optional[bool] = None
    edited_output: Optional[str] = None
    executed_ok: Optional[bool] = None
    latency_ms: dict = field(default_factory=dict)
    timestamp: str = ""
    interaction_id: Optional[int] = None


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


class LogStore:
    def __init__(self, path=":memory:"):
        try:
            self._conn = sqlite3.connect(path, check_same_thread=False)
            self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.executescript(_SCHEMA)
            self._conn.commit()
        except sqlite3.Error as exc:
            raise StorageUnavailable(f"cannot open log store {path}: {exc}") from exc
        self._lock = threading.Lock()
        cur = self._conn.execute("SELECT value FROM meta WHERE key='schema_version'")
        row = cur.fetchone()
        if row is None:
            self._conn.execute(
                "INSERT INTO meta VALUES ('schema_version', ?)", (str(SCHEMA_VERSION),)
            )
            self._conn.commit()
        elif int(row[0]) != SCHEMA_VERSION:
            raise SchemaMismatch(
                f"store schema v{row[0]} != supported v{SCHEMA_VERSION}"
            )

    def close(self) -> None:
        self._conn.close()

    # --- sessions ------------------------------------------------------

    def ensure_session(self, session_id: str, instrument: Optional[str] = None) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR IGNORE INTO sessions VALUES (?, ?, ?)",
                (session_id, _now(), instrument),
            )
            self._conn.commit()

    # --- interactions --------------------------------------------------

    def record(self, row: LogRow) -> int:
        with self._lock:
            cur = self._conn.execute(
                "INSERT INTO interactions (session_id, timestamp, input_text, "
                "input_mode, classifier_label, cog_invoked, cog_output, confirmed, "
                "edited_output, executed_ok, latency_ms) VALUES (?,?,?,?,?,?,?,?,?,?,?)",
                (
                    row.session_id,
                    row.timestamp or _now(),
                    row.input_text,
                    row.input_mode,
                    row.classifier_label,
                    row.cog_invoked,
                    row.cog_output,
                    _flag(row.confirmed),
                    row.edited_output,
                    _flag(row.executed_ok),
                    json.dumps(row.latency_ms),
                ),
            )
            self._conn.commit()
            return cur.lastrowid

    def update_confirmation(
        self,
        interaction_id: int,
        confirmed: bool,
        edited_output: Optional[str] = None,
        executed_ok: Optional[bool] = None,
    ) -> None:
        with self._lock:
            self._conn.execute(
                "UPDATE interactions SET confirmed=?, edited_output=?, executed_ok=? "
                "WHERE interaction_id=?",
                (_flag(confirmed), edited_output, _flag(executed_ok), interaction_id),
            )
            self._conn.commit()

    def query_log(
        self,
        session: Optional[str] = None,
        cog: Optional[str] = None,
        confirmed: Optional[bool] = None,
        since: Optional[str] = None,
        until: Optional[str] = None,
    ) -> list[LogRow]:
        clauses, params = [], []
        if session is not None:
            clauses.append("session_id=?")
            params.append(session)
        if cog is not None:
            clauses.append("cog_invoked=?")
            params.append(cog)
        if confirmed is not None:
            clauses.append("confirmed=?")
            params.append(_flag(confirmed))
        if since is not None:
            clauses.append("timestamp>=?")
            params.append(since)
        if until is not None:
            clauses.append("timestamp<=?")
            params.append(until)
        where = (" WHERE " + " AND ".join(clauses)) if clauses else ""
        with self._lock:
            cur = self._conn.execute(
                "SELECT interaction_id, session_id, timestamp, input_text, input_mode, "
                "classifier_label, cog_invoked, cog_output, confirmed, edited_output, "
                "executed_ok, latency_ms FROM interactions" + where +
                " ORDER BY interaction_id",
                params,
            )
            rows = cur.fetchall()
        return [
            LogRow(
                interaction_id=r[0],
                session_id=r[1],
                timestamp=r[2],
                input_text=r[3],
                input_mode=r[4],
                classifier_label=r[5],
                cog_invoked=r[6],
                cog_output=r[7],
                confirmed=_unflag(r[8]),
                edited_output=r[9],
                executed_ok=_unflag(r[10]),
                latency_ms=json.loads(r[11]) if r[11] else {},
            )
            for r in rows
        ]

    # --- functions and notes -------------------------------------------

    def record_function(self, entry_id: str, entry_json: str, added_by: str = "") -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO functions VALUES (?,?,?,?)",
                (entry_id, entry_json, _now(), added_by),
            )
            self._conn.commit()

    def record_note(self, ts: str, session: str, text: str) -> None:
        with self._lock:
            self._conn.execute("INSERT INTO notes VALUES (?,?,?)", (ts, session, text))
            self._conn.commit()

    # --- pending-action durability -------------------------------------

    def save_pending(self, action_id, session_id, command_class, payload_json, status, created_at):
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO pending_actions VALUES (?,?,?,?,?,?)",
                (action_id, session_id, command_class, payload_json, status, created_at),
            )
            self._conn.commit()

    def finalize_pending(self, action_id: str, status: str) -> None:
        with self._lock:
            self._conn.execute(
                "UPDATE pending_actions SET status=? WHERE action_id=?",
                (status, action_id),
            )
            self._conn.commit()

    def unfinished_actions(self) -> list[tuple]:
        """Actions that never reached a terminal state (crash-restart path)."""
        with self._lock:
            cur = self._conn.execute(
                "SELECT action_id, session_id, command_class, payload_json, created_at "
                "FROM pending_actions WHERE status IN "
                "('pending','confirmed','edited_confirmed') ORDER BY created_at"
            )
            return cur.fetchall()


def _flag(value: Optional[bool]):
    return None if value is None else int(value)


def _unflag(value) -> Optional[bool]:
    return None if value is None else bool(value)
