"""Append-only per-session event logs.

Each session has one newline-delimited JSON file under
``<data_dir>/sessions``; an ``index.json`` beside them maps session ids
to their latest sequence number and finalized flag.  Events for one
session are written in a single buffered append, so a failed step leaves
no partial trace.  Replayability is the contract; storage is plain text
on purpose.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from typing import Any

from ..errors import UnknownSession

KIND_CREATED = "created"
KIND_STEPPED = "stepped"
KIND_TURN_EMITTED = "turn_emitted"
KIND_FINALIZED = "finalized"


@dataclass(frozen=True)
class SessionEvent:
    session_id: str
    seq: int
    ts: float
    kind: str
    payload: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "seq": self.seq,
            "ts": self.ts,
            "kind": self.kind,
            "payload": self.payload,
        }

    @staticmethod
    def from_dict(raw: dict[str, Any]) -> "SessionEvent":
        return SessionEvent(
            session_id=raw["session_id"],
            seq=int(raw["seq"]),
            ts=float(raw["ts"]),
            kind=raw["kind"],
            payload=raw.get("payload", {}),
        )


class EventStore:
    def __init__(self, data_dir: str):
        self.sessions_dir = os.path.join(data_dir, "sessions")
        os.makedirs(self.sessions_dir, exist_ok=True)
        self.index_path = os.path.join(self.sessions_dir, "index.json")
        self._lock = threading.Lock()
        self._index: dict[str, dict[str, Any]] = {}
        if os.path.exists(self.index_path):
            with open(self.index_path, encoding="utf-8") as fh:
                self._index = json.load(fh)

    def _log_path(self, session_id: str) -> str:
        return os.path.join(self.sessions_dir, f"{session_id}.ndjson")

    def append(self, session_id: str, kinds_payloads: list[tuple[str, dict[str, Any]]]) -> list[SessionEvent]:
        """Append a batch of events atomically; seq stays dense per session."""
        with self._lock:
            entry = self._index.get(session_id, {"seq": -1, "finalized": False})
            if entry["finalized"]:
                raise ValueError(f"session {session_id} already finalized in log")
            seq = entry["seq"]
            now = time.time()
            events = []
            for kind, payload in kinds_payloads:
                seq += 1
                events.append(SessionEvent(session_id=session_id, seq=seq, ts=now, kind=kind, payload=payload))
            lines = "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in events)
            with open(self._log_path(session_id), "a", encoding="utf-8") as fh:
                fh.write(lines)
                fh.flush()
            entry["seq"] = seq
            entry["finalized"] = any(e.kind == KIND_FINALIZED for e in events) or entry["finalized"]
            self._index[session_id] = entry
            self._write_index()
            return events

    def _write_index(self) -> None:
        tmp = self.index_path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self._index, fh, sort_keys=True, indent=2)
        os.replace(tmp, self.index_path)

    def read(self, session_id: str) -> list[SessionEvent]:
        path = self._log_path(session_id)
        if not os.path.exists(path):
            raise UnknownSession(session_id)
        events: list[SessionEvent] = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(SessionEvent.from_dict(json.loads(line)))
        return events

    def session_ids(self) -> list[str]:
        return sorted(self._index)
