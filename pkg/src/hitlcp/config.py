"""Service configuration."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .channels import DEFAULT_ROUTING_POLICY, RoutingPolicy


@dataclass(frozen=True)
class CallbackConfig:
    base_delay_seconds: float = 1.0
    backoff_factor: float = 2.0
    max_attempts: int = 5
    timeout_seconds: float = 5.0
    poll_interval_seconds: float = 0.5  # background dispatcher wake interval


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    storage_path: str = "data/events.jsonl"
    org_model_path: Optional[str] = None
    fact_provider_path: Optional[str] = None
    email_outbox_dir: str = "data/outbox"
    routing_policy: RoutingPolicy = field(default_factory=lambda: DEFAULT_ROUTING_POLICY)
    max_defers: int = 3
    default_role_spec: str = "role:approvers"
    retry_after_seconds: float = 2.0
    request_ttl_seconds: Optional[float] = None  # deadline for awaiting requests
    webhook_timeout_seconds: float = 5.0
    public_base_url: Optional[str] = None  # advertised respond endpoint base
    callback: CallbackConfig = field(default_factory=CallbackConfig)

    @classmethod
    def from_dict(cls, doc: Mapping, base_dir: Optional[Path] = None) -> "ServiceConfig":
        def _path(value: Optional[str]) -> Optional[str]:
            if value is None or base_dir is None:
                return value
            return str((base_dir / value).resolve()) if not Path(value).is_absolute() else value

        callback_doc = doc.get("callback", {})
        callback = CallbackConfig(
            base_delay_seconds=callback_doc.get("base_delay_seconds", 1.0),
            backoff_factor=callback_doc.get("backoff_factor", 2.0),
            max_attempts=callback_doc.get("max_attempts", 5),
            timeout_seconds=callback_doc.get("timeout_seconds", 5.0),
            poll_interval_seconds=callback_doc.get("poll_interval_seconds", 0.5),
        )
        policy = (
            RoutingPolicy.from_dict(doc["routing_policy"])
            if "routing_policy" in doc
            else DEFAULT_ROUTING_POLICY
        )
        return cls(
            host=doc.get("host", "127.0.0.1"),
            port=doc.get("port", 8080),
            storage_path=_path(doc.get("storage_path", "data/events.jsonl")),
            org_model_path=_path(doc.get("org_model_path")),
            fact_provider_path=_path(doc.get("fact_provider_path")),
            email_outbox_dir=_path(doc.get("email_outbox_dir", "data/outbox")),
            routing_policy=policy,
            max_defers=doc.get("max_defers", 3),
            default_role_spec=doc.get("default_role_spec", "role:approvers"),
            retry_after_seconds=doc.get("retry_after_seconds", 2.0),
            request_ttl_seconds=doc.get("request_ttl_seconds"),
            webhook_timeout_seconds=doc.get("webhook_timeout_seconds", 5.0),
            public_base_url=doc.get("public_base_url"),
            callback=callback,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        with path.open("r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls.from_dict(doc, base_dir=path.parent)
