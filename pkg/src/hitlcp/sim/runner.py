"""Scenario execution: the agent side of the request-resolution protocol.

A scenario submits scripted decision requests and obtains outcomes either by
polling get-decision or by receiving callbacks on a local endpoint. Optional
responder directives play the human side; they are consumed in the order
requests enter the awaiting_human state.
"""

from __future__ import annotations

import copy
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import httpx

from .receiver import CallbackReceiver

TERMINAL = {"resolved", "auto_resolved", "expired"}


class ServiceUnreachable(Exception):
    pass


class ScenarioTimeout(Exception):
    pass


@dataclass(frozen=True)
class ResponderDirective:
    delay: float
    user_id: str
    outcome: str
    modified_action: Optional[dict] = None
    enrichment: Optional[dict] = None
    comment: Optional[str] = None


@dataclass(frozen=True)
class ScenarioRequest:
    body: dict
    mode: str = "poll"  # poll | callback


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    requests: tuple[ScenarioRequest, ...]
    responders: tuple[ResponderDirective, ...] = ()
    repetitions: int = 1


def load_scenario(path: str | Path) -> ScenarioSpec:
    with Path(path).open("r", encoding="utf-8") as fh:
        doc = json.load(fh)
    requests = []
    for i, raw in enumerate(doc.get("requests", [])):
        mode = raw.get("mode", "poll")
        if mode not in ("poll", "callback"):
            raise ValueError(f"requests[{i}].mode must be 'poll' or 'callback', got '{mode}'")
        body = raw.get("body")
        if not isinstance(body, dict):
            raise ValueError(f"requests[{i}].body must be an object")
        requests.append(ScenarioRequest(body=body, mode=mode))
    responders = tuple(
        ResponderDirective(
            delay=raw.get("delay", 0.0),
            user_id=raw["user_id"],
            outcome=raw["outcome"],
            modified_action=raw.get("modified_action"),
            enrichment=raw.get("enrichment"),
            comment=raw.get("comment"),
        )
        for raw in doc.get("responder_script", [])
    )
    return ScenarioSpec(
        name=doc.get("name", Path(path).stem),
        requests=tuple(requests),
        responders=responders,
        repetitions=doc.get("repetitions", 1),
    )


@dataclass
class RequestResult:
    index: int
    request_id: str
    mode: str
    status: str
    outcome: Optional[str]
    decided_by: Optional[str]
    latency_seconds: float
    polls: int

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "request_id": self.request_id,
            "mode": self.mode,
            "status": self.status,
            "outcome": self.outcome,
            "decided_by": self.decided_by,
            "latency_seconds": self.latency_seconds,
            "polls": self.polls,
        }


@dataclass
class ScenarioReport:
    scenario: str
    mode: str
    results: list[RequestResult] = field(default_factory=list)
    duration_seconds: float = 0.0

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def auto_resolved(self) -> int:
        return sum(1 for r in self.results if r.status == "auto_resolved")

    @property
    def autonomy_ratio(self) -> Optional[float]:
        if not self.results:
            return None
        return self.auto_resolved / len(self.results)

    @property
    def all_terminal(self) -> bool:
        return bool(self.results) and all(r.status in TERMINAL for r in self.results)


class _ResponderPool:
    """Assigns directives, in order, to requests as they become human-gated."""

    def __init__(self, directives: tuple[ResponderDirective, ...], client: httpx.Client):
        self._directives = directives
        self._client = client
        self._lock = threading.Lock()
        self._gated = 0
        self._threads: list[threading.Thread] = []

    def schedule(self, request_id: str) -> None:
        if not self._directives:
            return
        with self._lock:
            directive = self._directives[self._gated % len(self._directives)]
            self._gated += 1

        def respond() -> None:
            time.sleep(directive.delay)
            body = {
                "request_id": request_id,
                "user_id": directive.user_id,
                "outcome": directive.outcome,
            }
            if directive.modified_action is not None:
                body["modified_action"] = directive.modified_action
            if directive.enrichment is not None:
                body["enrichment"] = directive.enrichment
            if directive.comment is not None:
                body["comment"] = directive.comment
            try:
                self._client.post("/api/hitl/respond", json=body)
            except httpx.HTTPError:
                pass

        thread = threading.Thread(target=respond, daemon=True)
        thread.start()
        with self._lock:
            self._threads.append(thread)

    def join(self) -> None:
        with self._lock:
            threads = list(self._threads)
        for thread in threads:
            thread.join(timeout=10)


def run_scenario(
    spec: ScenarioSpec,
    base_url: str,
    *,
    mode: Optional[str] = None,
    parallel: int = 1,
    timeout: float = 60.0,
    poll_interval: Optional[float] = None,
    receiver: Optional[CallbackReceiver] = None,
) -> ScenarioReport:
    """Execute a scenario against a running service and report outcomes.

    mode, when given, overrides the per-request execution mode. Raises
    ServiceUnreachable if the service does not answer; per-request timeouts
    are recorded as status="timeout" rather than aborting the run.
    """
    client = httpx.Client(base_url=base_url, timeout=max(10.0, timeout))
    started = time.perf_counter()
    try:
        try:
            client.get("/healthz")
        except httpx.HTTPError as exc:
            raise ServiceUnreachable(f"service at {base_url} not reachable: {exc}") from exc

        jobs = [
            (index, request)
            for index, request in enumerate(
                [req for _ in range(max(1, spec.repetitions)) for req in spec.requests]
            )
        ]
        effective_modes = {index: (mode or request.mode) for index, request in jobs}
        own_receiver = False
        if receiver is None and any(m == "callback" for m in effective_modes.values()):
            receiver = CallbackReceiver()
            own_receiver = True
        responders = _ResponderPool(spec.responders, client)

        def run_one(index: int, request: ScenarioRequest) -> RequestResult:
            run_mode = effective_modes[index]
            body = copy.deepcopy(request.body)
            if run_mode == "callback":
                body["callback_endpoint"] = receiver.url
            t0 = time.perf_counter()
            deadline = t0 + timeout
            try:
                submit = client.post("/api/hitl/request", json=body)
            except httpx.HTTPError as exc:
                raise ServiceUnreachable(str(exc)) from exc
            if submit.status_code not in (200, 422):
                return RequestResult(index, "", run_mode, f"http_{submit.status_code}",
                                     None, None, time.perf_counter() - t0, 0)
            data = submit.json()
            request_id = data["request_id"]
            if data["status"] == "awaiting_human":
                responders.schedule(request_id)
            try:
                if run_mode == "callback":
                    status, outcome, decided_by, polls = _await_callback(
                        client, receiver, request_id, deadline
                    )
                else:
                    status, outcome, decided_by, polls = _await_poll(
                        client, request_id, deadline, poll_interval
                    )
            except ScenarioTimeout:
                return RequestResult(index, request_id, run_mode, "timeout",
                                     None, None, time.perf_counter() - t0, 0)
            return RequestResult(
                index=index,
                request_id=request_id,
                mode=run_mode,
                status=status,
                outcome=outcome,
                decided_by=decided_by,
                latency_seconds=time.perf_counter() - t0,
                polls=polls,
            )

        if parallel > 1:
            with ThreadPoolExecutor(max_workers=parallel) as pool:
                results = list(pool.map(lambda job: run_one(*job), jobs))
        else:
            results = [run_one(index, request) for index, request in jobs]
        responders.join()
        if own_receiver:
            receiver.close()
        results.sort(key=lambda r: r.index)
        return ScenarioReport(
            scenario=spec.name,
            mode=mode or "as-scripted",
            results=results,
            duration_seconds=time.perf_counter() - started,
        )
    finally:
        client.close()


def _await_poll(
    client: httpx.Client,
    request_id: str,
    deadline: float,
    poll_interval: Optional[float],
) -> tuple[str, Optional[str], Optional[str], int]:
    polls = 0
    while True:
        response = client.get("/api/hitl/get-decision", params={"request_id": request_id})
        polls += 1
        body = response.json()
        if body.get("status") in TERMINAL:
            resolution = body.get("resolution") or {}
            return body["status"], resolution.get("outcome"), body.get("decided_by"), polls
        if time.perf_counter() >= deadline:
            raise ScenarioTimeout(request_id)
        time.sleep(poll_interval if poll_interval is not None
                   else body.get("retry_after_seconds", 2.0))


def _await_callback(
    client: httpx.Client,
    receiver: CallbackReceiver,
    request_id: str,
    deadline: float,
) -> tuple[str, Optional[str], Optional[str], int]:
    payload = receiver.wait_for(request_id, max(0.0, deadline - time.perf_counter()))
    if payload is not None:
        resolution = payload["resolution"]
        status = "auto_resolved" if resolution["decided_by"] == "automated" else "resolved"
        return status, resolution["outcome"], resolution["decided_by"], 0
    # Expired requests never produce a callback; check the terminal state once.
    body = client.get("/api/hitl/get-decision", params={"request_id": request_id}).json()
    if body.get("status") in TERMINAL:
        resolution = body.get("resolution") or {}
        return body["status"], resolution.get("outcome"), body.get("decided_by"), 1
    raise ScenarioTimeout(request_id)


def emit_report(report: ScenarioReport, fmt: str = "text") -> str:
    """Render a report deterministically; json output is schema-stable."""
    if fmt == "json":
        doc = {
            "scenario": report.scenario,
            "mode": report.mode,
            "total": report.total,
            "auto_resolved": report.auto_resolved,
            "autonomy_ratio": report.autonomy_ratio,
            "all_terminal": report.all_terminal,
            "duration_seconds": report.duration_seconds,
            "results": [r.to_dict() for r in report.results],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    ratio = "n/a" if report.autonomy_ratio is None else f"{report.autonomy_ratio:.2f}"
    lines = [
        f"scenario: {report.scenario} (mode: {report.mode})",
        f"requests: {report.total}  auto-resolved: {report.auto_resolved}  autonomy ratio: {ratio}",
        f"duration: {report.duration_seconds:.2f}s",
    ]
    if report.results:
        lines.append(f"{'idx':>3}  {'status':<14}{'outcome':<10}{'decided_by':<11}"
                     f"{'latency':>8}  {'polls':>5}  request_id")
        for r in report.results:
            lines.append(
                f"{r.index:>3}  {r.status:<14}{r.outcome or '-':<10}{r.decided_by or '-':<11}"
                f"{r.latency_seconds:>7.2f}s  {r.polls:>5}  {r.request_id}"
            )
    return "\n".join(lines) + "\n"
