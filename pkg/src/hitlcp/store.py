"""Append-only event log: the audit trail and the store are the same file.

One JSON record per line: {seq, request_id, event, payload, ts}. The live
in-memory index is rebuilt on startup by replaying the file, so replay
equivalence is a structural property rather than a migration concern.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

from .core import utc_now_iso


@dataclass(frozen=True)
class AuditRecord:
    seq: int
    request_id: str
    event: str
    payload: dict
    ts: str

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "request_id": self.request_id,
            "event": self.event,
            "payload": self.payload,
            "ts": self.ts,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AuditRecord":
        return cls(
            seq=doc["seq"],
            request_id=doc.get("request_id", ""),
            event=doc["event"],
            payload=doc.get("payload", {}),
            ts=doc["ts"],
        )


class StorageError(Exception):
    """Durable append failed; surfaces as a 503 to the triggering call."""


class EventStore:
    """Durable, append-only record log with strictly increasing seq numbers."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: list[AuditRecord] = []
        self._by_request: dict[str, list[AuditRecord]] = {}
        self._load()
        self._handle = self.path.open("a", encoding="utf-8")

    def _load(self) -> None:
        if not self.path.exists():
            return
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = AuditRecord.from_dict(json.loads(line))
                self._index(record)

    def _index(self, record: AuditRecord) -> None:
        self._records.append(record)
        if record.request_id:
            self._by_request.setdefault(record.request_id, []).append(record)

    @property
    def next_seq(self) -> int:
        return (self._records[-1].seq + 1) if self._records else 1

    def append(self, request_id: str, event: str, payload: dict, ts: Optional[str] = None) -> AuditRecord:
        """Assign the next seq and write the record to disk before returning."""
        with self._lock:
            record = AuditRecord(
                seq=self.next_seq,
                request_id=request_id,
                event=event,
                payload=payload,
                ts=ts or utc_now_iso(),
            )
            try:
                self._handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
                self._handle.flush()
            except (OSError, ValueError) as exc:
                raise StorageError(f"audit append failed: {exc}") from exc
            self._index(record)
            return record

    def records(self) -> Iterator[AuditRecord]:
        with self._lock:
            snapshot = list(self._records)
        return iter(snapshot)

    def records_for(self, request_id: str) -> list[AuditRecord]:
        with self._lock:
            return list(self._by_request.get(request_id, []))

    def page(self, offset: int = 0, limit: int = 100) -> tuple[list[AuditRecord], Optional[int]]:
        """One page of the full log plus the next offset (None at the end)."""
        with self._lock:
            chunk = self._records[offset:offset + limit]
            next_offset = offset + limit if offset + limit < len(self._records) else None
        return chunk, next_offset

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def close(self) -> None:
        with self._lock:
            self._handle.close()
