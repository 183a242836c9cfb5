"""Envelope transport between console, gateway, and cog manager.

Two interchangeable channel implementations: an in-process queue (default)
and a shared-directory drop for split console/backend deployments.  Both
deliver envelopes at least once, ordered by strictly increasing ids.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import threading
from dataclasses import dataclass, field

from ..errors import ChannelUnavailable

KINDS = (
    "user_input",
    "cog_result",
    "confirmation",
    "execution_result",
    "chat",
    "function_add",
    "error",
)
SOURCES = ("console", "gateway", "cog_manager")


@dataclass(frozen=True)
class Envelope:
    id: int
    session_id: str
    source: str
    kind: str
    payload: dict
    created_at: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "session_id": self.session_id,
                "source": self.source,
                "kind": self.kind,
                "payload": self.payload,
                "created_at": self.created_at,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Envelope":
        d = json.loads(text)
        return cls(
            d["id"], d["session_id"], d["source"], d["kind"], d["payload"], d["created_at"]
        )


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


@dataclass
class InProcessChannel:
    envelopes: list = field(default_factory=list)
    _next_id: int = 1
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def publish(self, session_id: str, source: str, kind: str, payload: dict) -> Envelope:
        with self._lock:
            env = Envelope(self._next_id, session_id, source, kind, dict(payload), _now())
            self._next_id += 1
            self.envelopes.append(env)
            return env

    def poll(self, after_id: int = 0) -> list:
        with self._lock:
            return [e for e in self.envelopes if e.id > after_id]


@dataclass
class DirectoryChannel:
    """Object-drop transport: one JSON file per envelope in a shared directory."""

    directory: str
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def _paths(self):
        try:
            names = sorted(n for n in os.listdir(self.directory) if n.endswith(".json"))
        except OSError as exc:
            raise ChannelUnavailable(f"cannot read channel directory: {exc}") from exc
        return names

    def publish(self, session_id: str, source: str, kind: str, payload: dict) -> Envelope:
        with self._lock:
            names = self._paths()
            next_id = int(names[-1].split(".")[0]) + 1 if names else 1
            env = Envelope(next_id, session_id, source, kind, dict(payload), _now())
            path = os.path.join(self.directory, f"{next_id:012d}.json")
            tmp = path + ".tmp"
            try:
                with open(tmp, "w", encoding="utf-8") as fh:
                    fh.write(env.to_json())
                os.replace(tmp, path)
            except OSError as exc:
                raise ChannelUnavailable(str(exc)) from exc
            return env

    def poll(self, after_id: int = 0) -> list:
        out = []
        for name in self._paths():
            env_id = int(name.split(".")[0])
            if env_id <= after_id:
                continue
            with open(os.path.join(self.directory, name), encoding="utf-8") as fh:
                out.append(Envelope.from_json(fh.read()))
        return out


def publish(channel, session_id: str, source: str, kind: str, payload: dict) -> Envelope:
    if kind not in KINDS or source not in SOURCES:
        raise ChannelUnavailable(f"unknown envelope kind/source {kind!r}/{source!r}")
    return channel.publish(session_id, source, kind, payload)


def poll(channel, after_id: int = 0) -> list:
    return channel.poll(after_id)
