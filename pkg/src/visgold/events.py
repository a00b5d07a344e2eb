"""Append-only session event log with ndjson persistence.

Events are totally ordered by a global sequence number and per-worker by
``wseq``. The log is the system of record: engine state can be rebuilt by
replaying it, which is also the crash-recovery mechanism.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterator


class EventKind(str, Enum):
    HIT_ASSIGNED = "hit_assigned"
    SUBMITTED = "submitted"
    GOLD_FEEDBACK = "gold_feedback"
    WARNING = "warning"
    BONUS = "bonus"
    BLOCK = "block"
    ABANDON = "abandon"


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    wseq: int
    kind: EventKind
    worker_id: str
    hit_id: str
    timestamp: float
    payload: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        rec = asdict(self)
        rec["kind"] = self.kind.value
        return json.dumps(rec, sort_keys=True)

    @staticmethod
    def from_json(line: str) -> "SessionEvent":
        rec = json.loads(line)
        return SessionEvent(
            seq=int(rec["seq"]),
            wseq=int(rec["wseq"]),
            kind=EventKind(rec["kind"]),
            worker_id=rec["worker_id"],
            hit_id=rec["hit_id"],
            timestamp=float(rec["timestamp"]),
            payload=rec.get("payload", {}),
        )


class EventLog:
    """In-memory event list with optional file append-through."""

    def __init__(self, path: str | Path | None = None, clock: Callable[[], float] | None = None):
        self.events: list[SessionEvent] = []
        self._path = Path(path) if path else None
        self._fh = self._path.open("a") if self._path else None
        # injected clock so simulated and live sessions share code paths
        self._clock = clock or (lambda: float(len(self.events)))
        self._wseq: dict[str, int] = {}

    def append(self, kind: EventKind, worker_id: str, hit_id: str, payload: dict[str, Any]) -> SessionEvent:
        wseq = self._wseq.get(worker_id, 0) + 1
        self._wseq[worker_id] = wseq
        event = SessionEvent(
            seq=len(self.events) + 1,
            wseq=wseq,
            kind=kind,
            worker_id=worker_id,
            hit_id=hit_id,
            timestamp=self._clock(),
            payload=payload,
        )
        self.events.append(event)
        if self._fh:
            self._fh.write(event.to_json() + "\n")
            self._fh.flush()
        return event

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None

    def __iter__(self) -> Iterator[SessionEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)


def read_event_log(path: str | Path) -> list[SessionEvent]:
    out = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(SessionEvent.from_json(line))
    return out
