"""Local HTTP receiver for callback-mode decision delivery.

Deduplicates on idempotency_key, so at-least-once transport collapses to
exactly one effective delivery per request. Failure injection (fail the
first N attempts per key) exists to exercise the service's retry path.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional


class CallbackReceiver:
    def __init__(self, host: str = "127.0.0.1", fail_times: int = 0):
        self.fail_times = fail_times
        self._lock = threading.Lock()
        self._seen_keys: set[str] = set()
        self._failures_by_key: dict[str, int] = {}
        self._deliveries: dict[str, dict] = {}  # request_id -> payload (first effective)
        self._attempt_counts: dict[str, int] = {}  # request_id -> total attempts observed
        self._duplicates = 0

        receiver = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:  # noqa: N802 (http.server API)
                length = int(self.headers.get("Content-Length", 0))
                try:
                    payload = json.loads(self.rfile.read(length))
                except json.JSONDecodeError:
                    self.send_response(400)
                    self.end_headers()
                    return
                status = receiver._accept(payload)
                self.send_response(status)
                self.end_headers()
                self.wfile.write(b"{}")

            def log_message(self, fmt: str, *args) -> None:  # silence stdlib chatter
                pass

        self._server = ThreadingHTTPServer((host, 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        self.url = f"http://{host}:{self._server.server_address[1]}/callback"

    def _accept(self, payload: dict) -> int:
        key = payload.get("idempotency_key", "")
        request_id = payload.get("request_id", "")
        with self._lock:
            self._attempt_counts[request_id] = self._attempt_counts.get(request_id, 0) + 1
            failures = self._failures_by_key.get(key, 0)
            if failures < self.fail_times:
                self._failures_by_key[key] = failures + 1
                return 500
            if key in self._seen_keys:
                self._duplicates += 1
                return 200
            self._seen_keys.add(key)
            self._deliveries.setdefault(request_id, payload)
            return 200

    def wait_for(self, request_id: str, timeout: float) -> Optional[dict]:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._lock:
                payload = self._deliveries.get(request_id)
            if payload is not None:
                return payload
            time.sleep(0.02)
        return None

    def effective_deliveries(self, request_id: str) -> int:
        with self._lock:
            return 1 if request_id in self._deliveries else 0

    def attempts(self, request_id: str) -> int:
        with self._lock:
            return self._attempt_counts.get(request_id, 0)

    @property
    def duplicates(self) -> int:
        with self._lock:
            return self._duplicates

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=2)
