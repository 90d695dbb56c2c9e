"""Channel selection and work-item delivery through pluggable adapters.

Stand-ins for the usual enterprise transports: dashboard inbox (the portal
analog), outbound webhook (the Slack/SMS analog), and a file-outbox email
stub. The dashboard is the mandatory terminal fallback, so delivery as a
whole can never fail even when individual adapters do.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Optional

import httpx

from .core import Urgency, utc_now_iso
from .org import User

logger = logging.getLogger(__name__)


class ChannelKind(str, Enum):
    DASHBOARD = "dashboard"
    WEBHOOK = "webhook"
    EMAIL_STUB = "email_stub"


class PolicyError(ValueError):
    """Raised when a routing policy document fails validation."""


class DeliveryFailure(Exception):
    """A single adapter attempt failed; the router falls through."""


@dataclass(frozen=True)
class RoutingRule:
    match: str  # urgency value or "*"
    channel_order: tuple[ChannelKind, ...]


@dataclass(frozen=True)
class RoutingPolicy:
    rules: tuple[RoutingRule, ...]

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RoutingPolicy":
        rules = []
        for raw in doc.get("rules", []):
            match = raw.get("match")
            if match != "*" and match not in {u.value for u in Urgency}:
                raise PolicyError(f"routing rule match '{match}' is not an urgency or '*'")
            try:
                order = tuple(ChannelKind(k) for k in raw.get("channel_order", []))
            except ValueError as exc:
                raise PolicyError(f"unknown channel kind in routing rule: {exc}") from exc
            rules.append(RoutingRule(match=match, channel_order=order))
        if not any(r.match == "*" for r in rules):
            raise PolicyError("routing policy requires a '*' fallback rule")
        return cls(rules=tuple(rules))

    def channel_kinds(self) -> list[ChannelKind]:
        """Every channel kind reachable under this policy, in enum order."""
        configured = {k for rule in self.rules for k in rule.channel_order}
        configured.add(ChannelKind.DASHBOARD)
        return [k for k in ChannelKind if k in configured]

    def to_dict(self) -> dict:
        return {
            "rules": [
                {"match": r.match, "channel_order": [k.value for k in r.channel_order]}
                for r in self.rules
            ]
        }


DEFAULT_ROUTING_POLICY = RoutingPolicy.from_dict(
    {
        "rules": [
            {"match": "realtime", "channel_order": ["webhook", "dashboard"]},
            {"match": "low", "channel_order": ["email_stub", "dashboard"]},
            {"match": "*", "channel_order": ["dashboard"]},
        ]
    }
)


@dataclass(frozen=True)
class DeliveryRecord:
    delivery_id: str
    request_id: str
    user_id: str
    channel: ChannelKind
    address: str
    status: str  # sent | failed | fallback_used
    attempted_at: str

    def to_dict(self) -> dict:
        return {
            "delivery_id": self.delivery_id,
            "request_id": self.request_id,
            "user_id": self.user_id,
            "channel": self.channel.value,
            "address": self.address,
            "status": self.status,
            "attempted_at": self.attempted_at,
        }


def select_channel(urgency: Urgency, user: User, policy: RoutingPolicy) -> list[ChannelKind]:
    """Channel preference order for one interaction.

    The first policy rule matching the urgency (or "*") applies; its order is
    filtered to channels the user has an address for. Every user implicitly
    has a dashboard inbox, so the result always ends with (or contains)
    dashboard and is never empty.
    """
    matched = next(r for r in policy.rules if r.match in (urgency.value, "*"))
    order = [
        kind
        for kind in matched.channel_order
        if kind is ChannelKind.DASHBOARD or user.channel_addresses.get(kind.value)
    ]
    if ChannelKind.DASHBOARD not in order:
        order.append(ChannelKind.DASHBOARD)
    return order


class ChannelAdapter:
    """Base adapter; implementations raise DeliveryFailure on failure."""

    kind: ChannelKind

    def __init__(self) -> None:
        self.calls = 0

    def send(self, work_item: Mapping, address: str) -> None:
        raise NotImplementedError


class DashboardAdapter(ChannelAdapter):
    """In-process per-user inbox; delivery always succeeds."""

    kind = ChannelKind.DASHBOARD

    def __init__(self) -> None:
        super().__init__()
        self._lock = threading.Lock()
        self._inboxes: dict[str, list[dict]] = {}

    def send(self, work_item: Mapping, address: str) -> None:
        self.calls += 1
        with self._lock:
            self._inboxes.setdefault(address, []).append(dict(work_item))

    def inbox(self, user_id: str) -> list[dict]:
        with self._lock:
            return list(self._inboxes.get(user_id, []))


class WebhookAdapter(ChannelAdapter):
    """POSTs the work item; non-2xx or timeout counts as failure.

    One retry before giving up, so a flaky endpoint gets a second chance
    before the router falls back to the next channel.
    """

    kind = ChannelKind.WEBHOOK

    def __init__(self, timeout: float = 5.0, retries: int = 1) -> None:
        super().__init__()
        self.timeout = timeout
        self.retries = retries

    def send(self, work_item: Mapping, address: str) -> None:
        last_error: Optional[str] = None
        for _ in range(self.retries + 1):
            self.calls += 1
            try:
                response = httpx.post(address, json=dict(work_item), timeout=self.timeout)
            except httpx.HTTPError as exc:
                last_error = str(exc)
                continue
            if 200 <= response.status_code < 300:
                return
            last_error = f"status {response.status_code}"
        raise DeliveryFailure(f"webhook {address}: {last_error}")


class EmailStubAdapter(ChannelAdapter):
    """Writes one message file per delivery into an outbox directory."""

    kind = ChannelKind.EMAIL_STUB

    def __init__(self, outbox_dir: str | Path) -> None:
        super().__init__()
        self.outbox_dir = Path(outbox_dir)

    def send(self, work_item: Mapping, address: str) -> None:
        self.calls += 1
        try:
            self.outbox_dir.mkdir(parents=True, exist_ok=True)
            path = self.outbox_dir / f"{work_item['delivery_id']}.json"
            body = {"to": address, **work_item}
            path.write_text(json.dumps(body, indent=2), encoding="utf-8")
        except OSError as exc:
            raise DeliveryFailure(f"email outbox write failed: {exc}") from exc


class ChannelRouter:
    """Attempts channels in preference order until one succeeds.

    Every attempt (including failures) produces a DeliveryRecord, kept in
    .history and passed to the optional on_record hook. Safe for concurrent
    deliveries to different users; a single (request, user) delivery runs on
    one thread of control at a time by construction of the caller.
    """

    def __init__(
        self,
        policy: RoutingPolicy,
        adapters: Mapping[ChannelKind, ChannelAdapter],
        on_record: Optional[Callable[[DeliveryRecord], None]] = None,
    ) -> None:
        if ChannelKind.DASHBOARD not in adapters:
            raise ValueError("a dashboard adapter is required (terminal fallback)")
        self.policy = policy
        self.adapters = dict(adapters)
        self.on_record = on_record
        self._lock = threading.Lock()
        self.history: list[DeliveryRecord] = []

    @property
    def dashboard(self) -> DashboardAdapter:
        return self.adapters[ChannelKind.DASHBOARD]  # type: ignore[return-value]

    def _record(self, record: DeliveryRecord) -> None:
        with self._lock:
            self.history.append(record)
        if self.on_record is not None:
            self.on_record(record)

    def deliver(
        self,
        work_item: Mapping,
        user: User,
        channels: list[ChannelKind],
    ) -> DeliveryRecord:
        """Deliver a work item, returning the terminal (successful) record."""
        if not channels:
            raise ValueError("channel list must be non-empty")
        request_id = work_item.get("request_id", "")
        for position, kind in enumerate(channels):
            # Fresh id per attempt: one DeliveryRecord per (request, user, attempt).
            item = dict(work_item)
            item["delivery_id"] = uuid.uuid4().hex
            address = (
                user.user_id
                if kind is ChannelKind.DASHBOARD
                else user.channel_addresses.get(kind.value, "")
            )
            adapter = self.adapters.get(kind)
            try:
                if adapter is None:
                    raise DeliveryFailure(f"no adapter configured for {kind.value}")
                adapter.send(item, address)
            except DeliveryFailure as exc:
                logger.warning("delivery via %s failed for %s: %s", kind.value, user.user_id, exc)
                self._record(
                    DeliveryRecord(
                        delivery_id=item["delivery_id"],
                        request_id=request_id,
                        user_id=user.user_id,
                        channel=kind,
                        address=address,
                        status="failed",
                        attempted_at=utc_now_iso(),
                    )
                )
                continue
            record = DeliveryRecord(
                delivery_id=item["delivery_id"],
                request_id=request_id,
                user_id=user.user_id,
                channel=kind,
                address=address,
                status="sent" if position == 0 else "fallback_used",
                attempted_at=utc_now_iso(),
            )
            self._record(record)
            return record
        # Unreachable when the channel list ends with dashboard, which the
        # select_channel contract guarantees.
        raise RuntimeError("all channels failed; dashboard fallback missing from channel list")

    def route_and_deliver(self, work_item: Mapping, user: User, urgency: Urgency) -> DeliveryRecord:
        return self.deliver(work_item, user, select_channel(urgency, user, self.policy))
