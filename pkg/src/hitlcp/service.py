"""Request lifecycle: evaluation, state machine, persistence, callbacks.

Every state change is an event appended to the store before the triggering
call returns; the in-memory index is rebuilt from the same events on
startup. Per-request mutations are linearized with one lock per request_id,
so exactly one response can ever win a race.
"""

from __future__ import annotations

import hashlib
import logging
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Any, Mapping, Optional

import httpx

from .audit import AuditEvent, analyze_autonomy
from .channels import ChannelRouter, DeliveryRecord
from .config import ServiceConfig
from .core import (
    Comparator,
    DecidedBy,
    Disposition,
    DispositionKind,
    HitlRequest,
    Outcome,
    Resolution,
    Scalar,
    Urgency,
    action_signature,
    canonical_json,
    evaluate_rubric,
    is_scalar,
    utc_now_iso,
    validate_request,
)
from .facts import FactProvider, NullFactProvider
from .org import OrgModel, RoleResolutionError, RoleSpec, UnknownUser, load_org_model
from .org import resolve_participants
from .store import AuditRecord, EventStore

logger = logging.getLogger(__name__)


class RequestStatus(str, Enum):
    RECEIVED = "received"
    AUTO_RESOLVED = "auto_resolved"
    AWAITING_HUMAN = "awaiting_human"
    RESOLVED = "resolved"
    EXPIRED = "expired"


TERMINAL_STATUSES = {
    RequestStatus.AUTO_RESOLVED,
    RequestStatus.RESOLVED,
    RequestStatus.EXPIRED,
}

LEGAL_TRANSITIONS = {
    (RequestStatus.RECEIVED, RequestStatus.AUTO_RESOLVED),
    (RequestStatus.RECEIVED, RequestStatus.AWAITING_HUMAN),
    (RequestStatus.AWAITING_HUMAN, RequestStatus.RESOLVED),
    (RequestStatus.AWAITING_HUMAN, RequestStatus.AWAITING_HUMAN),
    (RequestStatus.AWAITING_HUMAN, RequestStatus.EXPIRED),
}


class ServiceError(Exception):
    pass


class UnknownRequest(ServiceError):
    def __init__(self, request_id: str):
        super().__init__(f"unknown request '{request_id}'")
        self.request_id = request_id


class NotParticipant(ServiceError):
    def __init__(self, user_id: str, request_id: str):
        super().__init__(f"user '{user_id}' is not a resolved participant of '{request_id}'")
        self.user_id = user_id


class AlreadyResolved(ServiceError):
    def __init__(self, request_id: str, status: RequestStatus):
        super().__init__(f"request '{request_id}' is no longer awaiting a response ({status.value})")
        self.status = status


class InvalidResponse(ServiceError):
    """Malformed response payload (bad outcome, non-scalar enrichment)."""


class ModifyWithoutAction(ServiceError):
    def __init__(self) -> None:
        super().__init__("outcome 'modify' requires modified_action")


class IllegalTransition(ServiceError):
    """Internal invariant violation; never expected at runtime."""


@dataclass
class RequestState:
    request: dict
    signature: str
    status: RequestStatus
    history: list[tuple[str, str]]
    facts: dict
    disposition: Optional[dict] = None
    participants: list[str] = field(default_factory=list)
    defer_count: int = 0
    deadline: Optional[str] = None
    resolution: Optional[dict] = None

    @property
    def request_id(self) -> str:
        return self.request["request_id"]


@dataclass
class CallbackTask:
    request_id: str
    endpoint: str
    idempotency_key: str
    attempts: int = 0
    next_attempt_at: float = 0.0
    delivered: bool = False
    parked: bool = False

    @property
    def pending(self) -> bool:
        return not self.delivered and not self.parked


@dataclass(frozen=True)
class SubmitResult:
    request_id: str
    status: RequestStatus
    disposition_reason: str
    role_unresolved: bool = False
    detail: Optional[str] = None


def _idempotency_key(request_id: str, resolution: Mapping) -> str:
    digest = hashlib.sha256(canonical_json(dict(resolution)).encode("utf-8")).hexdigest()
    return f"{request_id}:{digest[:16]}"


class HitlService:
    """The HITL control plane behind the REST interface."""

    def __init__(
        self,
        config: ServiceConfig,
        org_model: OrgModel,
        store: EventStore,
        router: ChannelRouter,
        fact_provider: Optional[FactProvider] = None,
    ) -> None:
        self.config = config
        self.org_model = org_model
        self.store = store
        self.router = router
        self.fact_provider = fact_provider or NullFactProvider()
        self.router.on_record = self._on_delivery_record

        self._states: dict[str, RequestState] = {}
        self._callback_tasks: dict[str, CallbackTask] = {}
        self._states_lock = threading.Lock()
        self._request_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._model_lock = threading.Lock()
        self._dispatch_lock = threading.Lock()
        self._background: Optional[threading.Thread] = None
        self._stop = threading.Event()

        for record in self.store.records():
            self._apply(record)

    # ------------------------------------------------------------------
    # Event plumbing
    # ------------------------------------------------------------------

    def _lock_for(self, request_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._request_locks.setdefault(request_id, threading.Lock())

    def _emit(self, request_id: str, event: AuditEvent, payload: dict) -> AuditRecord:
        record = self.store.append(request_id, event.value, payload)
        self._apply(record)
        return record

    def _transition(self, state: RequestState, new_status: RequestStatus, ts: str) -> None:
        if (state.status, new_status) not in LEGAL_TRANSITIONS:
            raise IllegalTransition(f"{state.status.value} -> {new_status.value}")
        state.status = new_status
        state.history.append((new_status.value, ts))

    def _apply(self, record: AuditRecord) -> None:
        """Reduce one event into in-memory state. Replay and live writes share
        this path, so a rebuilt index is equal to the live one by construction."""
        event = AuditEvent(record.event)
        payload = record.payload
        if event is AuditEvent.SUBMITTED:
            request = payload["request"]
            state = RequestState(
                request=request,
                signature=payload["signature"],
                status=RequestStatus.RECEIVED,
                history=[(RequestStatus.RECEIVED.value, record.ts)],
                facts=dict(request.get("facts", {})),
            )
            with self._states_lock:
                self._states[record.request_id] = state
            return
        if event is AuditEvent.ORG_RELOADED:
            return
        state = self._states.get(record.request_id)
        if state is None:
            logger.warning("event %s for unknown request %s", record.event, record.request_id)
            return
        if event is AuditEvent.EVALUATED:
            state.disposition = payload["disposition"]
            state.facts = dict(payload["effective_facts"])
            state.participants = list(payload.get("participants", []))
            state.deadline = payload.get("deadline")
            if payload.get("next_status") == RequestStatus.AWAITING_HUMAN.value:
                self._transition(state, RequestStatus.AWAITING_HUMAN, record.ts)
        elif event is AuditEvent.DELIVERED:
            pass  # informational; delivery state lives in the record itself
        elif event is AuditEvent.RESPONDED:
            enrichment = payload.get("enrichment") or {}
            state.facts.update(enrichment)
            if payload["outcome"] == Outcome.DEFER.value and payload.get("requeued", False):
                state.defer_count = payload["defer_count"]
                self._transition(state, RequestStatus.AWAITING_HUMAN, record.ts)
        elif event is AuditEvent.RESOLVED:
            state.resolution = payload["resolution"]
            self._transition(state, RequestStatus(payload["status"]), record.ts)
            endpoint = state.request.get("callback_endpoint")
            if endpoint:
                self._callback_tasks[record.request_id] = CallbackTask(
                    request_id=record.request_id,
                    endpoint=endpoint,
                    idempotency_key=_idempotency_key(record.request_id, state.resolution),
                    next_attempt_at=time.time(),
                )
        elif event is AuditEvent.EXPIRED:
            self._transition(state, RequestStatus.EXPIRED, record.ts)
        elif event is AuditEvent.CALLBACK_ATTEMPTED:
            task = self._callback_tasks.get(record.request_id)
            if task is not None:
                task.attempts = payload["attempt"]
        elif event is AuditEvent.CALLBACK_DELIVERED:
            task = self._callback_tasks.get(record.request_id)
            if task is not None:
                task.delivered = True
        elif event is AuditEvent.CALLBACK_PARKED:
            task = self._callback_tasks.get(record.request_id)
            if task is not None:
                task.parked = True

    def _on_delivery_record(self, record: DeliveryRecord) -> None:
        self._emit(record.request_id, AuditEvent.DELIVERED, {"delivery": record.to_dict()})

    # ------------------------------------------------------------------
    # Submission
    # ------------------------------------------------------------------

    def submit_request(self, raw: Mapping) -> SubmitResult:
        """Validate, evaluate, and either auto-resolve or gate to humans.

        All transitions are persisted and audited before this returns.
        Raises RequestValidationError for malformed documents.
        """
        request = validate_request(raw)
        provider_facts = dict(self.fact_provider.facts_for(
            request.agent_id, request.proposed_action.name
        ))
        effective: dict[str, Scalar] = {**provider_facts, **dict(request.facts)}
        for tag in request.constraints:
            # Constraint tags become reserved boolean facts so rubric rules
            # can address compliance requirements uniformly.
            effective[f"constraint:{tag}"] = True
        disposition = evaluate_rubric(effective, request.confidence, request.rubric)
        signature = action_signature(request)

        with self._lock_for(request.request_id):
            self._emit(
                request.request_id,
                AuditEvent.SUBMITTED,
                {"request": request.to_dict(), "signature": signature},
            )
            if disposition.kind in (DispositionKind.AUTO_APPROVE, DispositionKind.AUTO_REJECT):
                return self._auto_resolve(request, disposition, effective)
            if disposition.kind is DispositionKind.NOTIFY_ONLY:
                return self._notify_only(request, disposition, effective)
            return self._gate_to_humans(request, disposition, effective)

    def _auto_resolve(
        self,
        request: HitlRequest,
        disposition: Disposition,
        effective: dict,
        *,
        participants: Optional[list[str]] = None,
        outcome: Optional[Outcome] = None,
        comment: Optional[str] = None,
        role_unresolved: bool = False,
        detail: Optional[str] = None,
    ) -> SubmitResult:
        self._emit(
            request.request_id,
            AuditEvent.EVALUATED,
            {
                "disposition": disposition.to_dict(),
                "effective_facts": effective,
                "participants": participants or [],
                "next_status": None,
                "deadline": None,
            },
        )
        if outcome is None:
            outcome = (
                Outcome.APPROVE
                if disposition.kind is DispositionKind.AUTO_APPROVE
                else Outcome.REJECT
            )
        resolution = Resolution(
            outcome=outcome,
            decided_by=DecidedBy.AUTOMATED,
            decided_at=utc_now_iso(),
            comment=comment,
        )
        self._emit(
            request.request_id,
            AuditEvent.RESOLVED,
            {"status": RequestStatus.AUTO_RESOLVED.value, "resolution": resolution.to_dict()},
        )
        return SubmitResult(
            request_id=request.request_id,
            status=RequestStatus.AUTO_RESOLVED,
            disposition_reason=disposition.reason,
            role_unresolved=role_unresolved,
            detail=detail,
        )

    def _notify_only(
        self, request: HitlRequest, disposition: Disposition, effective: dict
    ) -> SubmitResult:
        recipients = []
        if disposition.role_hint:
            try:
                recipients = resolve_participants(
                    RoleSpec.parse(disposition.role_hint),
                    self.org_model,
                    self._context_from(effective),
                )
            except RoleResolutionError as exc:
                logger.warning("notify_only recipients unresolved: %s", exc)
        result = self._auto_resolve(
            request,
            disposition,
            effective,
            participants=[u.user_id for u in recipients],
            outcome=Outcome.APPROVE,
            comment="notify_only",
        )
        state = self._states[request.request_id]
        for user in recipients:
            self.router.route_and_deliver(
                self._work_item(state, user.user_id, kind="notification"),
                user,
                request.urgency,
            )
        return result

    def _gate_to_humans(
        self, request: HitlRequest, disposition: Disposition, effective: dict
    ) -> SubmitResult:
        spec = RoleSpec.parse(disposition.role_hint or self.config.default_role_spec)
        try:
            participants = resolve_participants(spec, self.org_model, self._context_from(effective))
        except RoleResolutionError as exc:
            # Agents must never block on a misconfigured org model: store an
            # automated rejection and report it distinctly to the caller.
            return self._auto_resolve(
                request,
                disposition,
                effective,
                outcome=Outcome.REJECT,
                comment=f"role_unresolved: {exc}",
                role_unresolved=True,
                detail=str(exc),
            )
        deadline = None
        if self.config.request_ttl_seconds is not None:
            created = datetime.fromisoformat(request.created_at)
            deadline = (created + timedelta(seconds=self.config.request_ttl_seconds)).isoformat(
                timespec="milliseconds"
            )
        self._emit(
            request.request_id,
            AuditEvent.EVALUATED,
            {
                "disposition": disposition.to_dict(),
                "effective_facts": effective,
                "participants": [u.user_id for u in participants],
                "next_status": RequestStatus.AWAITING_HUMAN.value,
                "deadline": deadline,
            },
        )
        state = self._states[request.request_id]
        self._deliver_work_items(state, participants)
        return SubmitResult(
            request_id=request.request_id,
            status=RequestStatus.AWAITING_HUMAN,
            disposition_reason=disposition.reason,
        )

    def _context_from(self, effective: Mapping[str, Scalar]) -> dict[str, str]:
        return {k: v for k, v in effective.items() if isinstance(v, str)}

    def _work_item(self, state: RequestState, user_id: str, kind: str = "approval_request") -> dict:
        base = self.config.public_base_url or f"http://{self.config.host}:{self.config.port}"
        return {
            "kind": kind,
            "request_id": state.request_id,
            "agent_id": state.request["agent_id"],
            "proposed_action": state.request["proposed_action"],
            "reason": state.disposition["reason"] if state.disposition else None,
            "urgency": state.request["urgency"],
            "defer_count": state.defer_count,
            "respond_by": state.deadline,
            "respond_endpoint": f"{base}/api/hitl/respond",
            "user_id": user_id,
        }

    def _deliver_work_items(self, state: RequestState, participants) -> None:
        urgency = Urgency(state.request["urgency"])
        for user in participants:
            self.router.route_and_deliver(
                self._work_item(state, user.user_id), user, urgency
            )

    # ------------------------------------------------------------------
    # Decision retrieval
    # ------------------------------------------------------------------

    def get_decision(self, request_id: str) -> dict:
        """Read-only view of a request. Terminal bodies never change again."""
        state = self._states.get(request_id)
        if state is None:
            raise UnknownRequest(request_id)
        with self._lock_for(request_id):
            body: dict[str, Any] = {
                "request_id": request_id,
                "status": state.status.value,
                "disposition_reason": state.disposition["reason"] if state.disposition else None,
                "history": [[status, ts] for status, ts in state.history],
            }
            if state.resolution is not None:
                body["resolution"] = dict(state.resolution)
                body["decided_by"] = state.resolution["decided_by"]
            if state.status not in TERMINAL_STATUSES:
                body["retry_after_seconds"] = self.config.retry_after_seconds
            return body

    # ------------------------------------------------------------------
    # Human responses
    # ------------------------------------------------------------------

    def submit_response(
        self,
        request_id: str,
        user_id: str,
        outcome: str,
        modified_action: Optional[Mapping] = None,
        enrichment: Optional[Mapping] = None,
        comment: Optional[str] = None,
    ) -> dict:
        """Apply one human response; the first valid response wins atomically."""
        try:
            parsed_outcome = Outcome(outcome)
        except ValueError:
            raise InvalidResponse(f"unknown outcome '{outcome}'")
        if not user_id or not isinstance(user_id, str):
            raise InvalidResponse("user_id must be a non-empty string")
        if enrichment is not None:
            if not isinstance(enrichment, Mapping) or not all(
                isinstance(k, str) and k and is_scalar(v) for k, v in enrichment.items()
            ):
                raise InvalidResponse("enrichment must map fact names to scalar values")
        if parsed_outcome is Outcome.MODIFY and modified_action is None:
            raise ModifyWithoutAction()
        if modified_action is not None and not isinstance(modified_action, Mapping):
            raise InvalidResponse("modified_action must be an object")

        state = self._states.get(request_id)
        if state is None:
            raise UnknownRequest(request_id)
        with self._lock_for(request_id):
            if state.status is not RequestStatus.AWAITING_HUMAN:
                raise AlreadyResolved(request_id, state.status)
            if user_id not in state.participants:
                raise NotParticipant(user_id, request_id)
            if parsed_outcome is Outcome.DEFER:
                return self._defer(state, user_id, enrichment, comment)
            resolution = Resolution(
                outcome=parsed_outcome,
                decided_by=DecidedBy.HUMAN,
                decided_at=utc_now_iso(),
                user_id=user_id,
                modified_action=dict(modified_action) if modified_action else None,
                enrichment=dict(enrichment) if enrichment else None,
                comment=comment,
            )
            self._emit(
                request_id,
                AuditEvent.RESPONDED,
                {
                    "user_id": user_id,
                    "outcome": parsed_outcome.value,
                    "modified_action": dict(modified_action) if modified_action else None,
                    "enrichment": dict(enrichment) if enrichment else None,
                    "comment": comment,
                    "defer_count": state.defer_count,
                    "requeued": False,
                },
            )
            self._emit(
                request_id,
                AuditEvent.RESOLVED,
                {"status": RequestStatus.RESOLVED.value, "resolution": resolution.to_dict()},
            )
            return {
                "request_id": request_id,
                "status": RequestStatus.RESOLVED.value,
                "resolution": resolution.to_dict(),
            }

    def _defer(
        self,
        state: RequestState,
        user_id: str,
        enrichment: Optional[Mapping],
        comment: Optional[str],
    ) -> dict:
        request_id = state.request_id
        requeue = state.defer_count < self.config.max_defers
        self._emit(
            request_id,
            AuditEvent.RESPONDED,
            {
                "user_id": user_id,
                "outcome": Outcome.DEFER.value,
                "modified_action": None,
                "enrichment": dict(enrichment) if enrichment else None,
                "comment": comment,
                "defer_count": state.defer_count + 1 if requeue else state.defer_count,
                "requeued": requeue,
            },
        )
        if not requeue:
            self._emit(request_id, AuditEvent.EXPIRED, {"reason": "max_defers_exceeded"})
            return {"request_id": request_id, "status": RequestStatus.EXPIRED.value}
        participants = [
            self.org_model.users[uid] for uid in state.participants if uid in self.org_model.users
        ]
        self._deliver_work_items(state, participants)
        return {
            "request_id": request_id,
            "status": RequestStatus.AWAITING_HUMAN.value,
            "defer_count": state.defer_count,
        }

    # ------------------------------------------------------------------
    # Pending work items
    # ------------------------------------------------------------------

    def list_pending(self, user_id: str) -> list[dict]:
        if user_id not in self.org_model.users:
            raise UnknownUser(user_id)
        with self._states_lock:
            states = list(self._states.values())
        items = []
        for state in states:
            with self._lock_for(state.request_id):
                if state.status is not RequestStatus.AWAITING_HUMAN:
                    continue
                if user_id not in state.participants:
                    continue
                items.append(
                    {
                        "request_id": state.request_id,
                        "agent_id": state.request["agent_id"],
                        "proposed_action": state.request["proposed_action"],
                        "facts": dict(state.facts),
                        "reason": state.disposition["reason"] if state.disposition else None,
                        "defer_count": state.defer_count,
                        "urgency": state.request["urgency"],
                        "created_at": state.request["created_at"],
                    }
                )
        items.sort(key=lambda it: (-Urgency(it["urgency"]).rank, it["created_at"], it["request_id"]))
        return items

    # ------------------------------------------------------------------
    # Callbacks and expiry
    # ------------------------------------------------------------------

    def dispatch_callbacks(self, now: Optional[float] = None) -> int:
        """Attempt every due callback once; returns how many were delivered.

        At-least-once semantics: receivers deduplicate on idempotency_key.
        """
        delivered = 0
        with self._dispatch_lock:
            due = [
                task
                for task in list(self._callback_tasks.values())
                if task.pending and task.next_attempt_at <= (now if now is not None else time.time())
            ]
            for task in due:
                delivered += self._attempt_callback(task)
        return delivered

    def _attempt_callback(self, task: CallbackTask) -> int:
        state = self._states.get(task.request_id)
        if state is None or state.resolution is None:
            return 0
        attempt = task.attempts + 1
        body = {
            "request_id": task.request_id,
            "resolution": dict(state.resolution),
            "idempotency_key": task.idempotency_key,
        }
        ok = False
        detail = ""
        try:
            response = httpx.post(
                task.endpoint, json=body, timeout=self.config.callback.timeout_seconds
            )
            ok = 200 <= response.status_code < 300
            detail = f"status {response.status_code}"
        except httpx.HTTPError as exc:
            detail = str(exc)
        self._emit(
            task.request_id,
            AuditEvent.CALLBACK_ATTEMPTED,
            {
                "endpoint": task.endpoint,
                "idempotency_key": task.idempotency_key,
                "attempt": attempt,
                "ok": ok,
                "detail": detail,
            },
        )
        if ok:
            self._emit(
                task.request_id,
                AuditEvent.CALLBACK_DELIVERED,
                {
                    "endpoint": task.endpoint,
                    "idempotency_key": task.idempotency_key,
                    "attempts": attempt,
                },
            )
            return 1
        if attempt >= self.config.callback.max_attempts:
            self._emit(
                task.request_id,
                AuditEvent.CALLBACK_PARKED,
                {
                    "endpoint": task.endpoint,
                    "idempotency_key": task.idempotency_key,
                    "attempts": attempt,
                },
            )
        else:
            backoff = self.config.callback.base_delay_seconds * (
                self.config.callback.backoff_factor ** (attempt - 1)
            )
            task.next_attempt_at = time.time() + backoff
        return 0

    def sweep_expired(self, now: Optional[str] = None) -> int:
        """Expire awaiting requests whose deadline has passed."""
        now = now or utc_now_iso()
        expired = 0
        with self._states_lock:
            states = list(self._states.values())
        for state in states:
            with self._lock_for(state.request_id):
                if (
                    state.status is RequestStatus.AWAITING_HUMAN
                    and state.deadline is not None
                    and state.deadline <= now
                ):
                    self._emit(state.request_id, AuditEvent.EXPIRED, {"reason": "deadline"})
                    expired += 1
        return expired

    # ------------------------------------------------------------------
    # Admin, descriptor, audit views
    # ------------------------------------------------------------------

    def reload_org_model(self, document: Mapping) -> OrgModel:
        """Validate and atomically swap the active model. In-flight requests
        keep their already-resolved participants."""
        model = load_org_model(document)
        with self._model_lock:
            self.org_model = model
        self._emit(
            "",
            AuditEvent.ORG_RELOADED,
            {"users": sorted(model.users), "roles": sorted(model.roles)},
        )
        return model

    def descriptor(self) -> dict:
        """Protocol-facing description of this deployment's WHEN/WHO/WHAT/WHERE."""
        return {
            "WHEN": {
                "criteria": "rubric",
                "rule_fields": ["fact", "comparator", "operand", "disposition", "role_hint"],
                "comparators": [c.value for c in Comparator],
                "dispositions": [k.value for k in DispositionKind],
                "default_disposition": DispositionKind.REQUIRE_HUMAN.value,
            },
            "WHO": ["named_role", "manager_of", "user_literal"],
            "WHAT": ["approve", "reject", "modify", "defer", "enrich", "notify"],
            "WHERE": [k.value for k in self.router.policy.channel_kinds()],
        }

    def audit_for(self, request_id: str) -> list[dict]:
        return [r.to_dict() for r in self.store.records_for(request_id)]

    def audit_page(self, offset: int = 0, limit: int = 100) -> tuple[list[dict], Optional[int]]:
        records, next_offset = self.store.page(offset, limit)
        return [r.to_dict() for r in records], next_offset

    def suggestions(self, threshold_n: int = 5) -> list[dict]:
        return [s.to_dict() for s in analyze_autonomy(self.store.records(), threshold_n)]

    # ------------------------------------------------------------------
    # Background loop
    # ------------------------------------------------------------------

    def start_background(self) -> None:
        if self._background is not None:
            return
        self._stop.clear()

        def loop() -> None:
            while not self._stop.is_set():
                try:
                    self.dispatch_callbacks()
                    self.sweep_expired()
                except Exception:  # pragma: no cover - defensive
                    logger.exception("background dispatch failed")
                self._stop.wait(self.config.callback.poll_interval_seconds)

        self._background = threading.Thread(target=loop, name="hitl-dispatch", daemon=True)
        self._background.start()

    def stop_background(self) -> None:
        if self._background is None:
            return
        self._stop.set()
        self._background.join(timeout=5)
        self._background = None

    def close(self) -> None:
        self.stop_background()
        self.store.close()
