from __future__ import annotations

import copy

import pytest
from fastapi.testclient import TestClient

from hitlcp.api import create_app
from hitlcp.channels import (
    ChannelKind,
    ChannelRouter,
    DashboardAdapter,
    EmailStubAdapter,
    RoutingPolicy,
    WebhookAdapter,
)
from hitlcp.config import CallbackConfig, ServiceConfig
from hitlcp.org import load_org_model
from hitlcp.service import HitlService
from hitlcp.store import EventStore

# Three-level reporting chain alice -> bob -> carol, plus dave with
# webhook/email addresses for channel-routing tests.
ORG_DOC = {
    "users": [
        {"user_id": "alice", "display_name": "Alice"},
        {"user_id": "bob", "display_name": "Bob"},
        {"user_id": "carol", "display_name": "Carol"},
        {
            "user_id": "dave",
            "display_name": "Dave",
            "channel_addresses": {"email_stub": "dave@example.test"},
        },
    ],
    "role_bindings": {"approvers": ["bob"], "compliance-officer": ["carol", "dave"]},
    "reporting_edges": {"alice": "bob", "bob": "carol"},
}

TEST_POLICY = RoutingPolicy.from_dict(
    {
        "rules": [
            {"match": "realtime", "channel_order": ["webhook", "dashboard"]},
            {"match": "low", "channel_order": ["email_stub", "dashboard"]},
            {"match": "*", "channel_order": ["dashboard"]},
        ]
    }
)


@pytest.fixture
def org_doc():
    return copy.deepcopy(ORG_DOC)


def make_test_config(tmp_path, **overrides) -> ServiceConfig:
    defaults = dict(
        storage_path=str(tmp_path / "events.jsonl"),
        email_outbox_dir=str(tmp_path / "outbox"),
        retry_after_seconds=0.05,
        webhook_timeout_seconds=1.0,
        callback=CallbackConfig(
            base_delay_seconds=0.02,
            backoff_factor=2.0,
            max_attempts=5,
            timeout_seconds=1.0,
            poll_interval_seconds=0.02,
        ),
    )
    defaults.update(overrides)
    return ServiceConfig(**defaults)


@pytest.fixture
def make_service(tmp_path, org_doc):
    """Factory building fully wired services on a per-test store."""
    created: list[HitlService] = []
    counter = {"n": 0}

    def factory(
        *,
        org=None,
        config_overrides=None,
        policy=TEST_POLICY,
        storage_path=None,
        fact_provider=None,
    ) -> HitlService:
        counter["n"] += 1
        overrides = dict(config_overrides or {})
        if storage_path is not None:
            overrides["storage_path"] = str(storage_path)
        else:
            overrides.setdefault(
                "storage_path", str(tmp_path / f"events-{counter['n']}.jsonl")
            )
        overrides.setdefault("routing_policy", policy)
        config = make_test_config(tmp_path, **overrides)
        router = ChannelRouter(
            policy=config.routing_policy,
            adapters={
                ChannelKind.DASHBOARD: DashboardAdapter(),
                ChannelKind.WEBHOOK: WebhookAdapter(
                    timeout=config.webhook_timeout_seconds, retries=1
                ),
                ChannelKind.EMAIL_STUB: EmailStubAdapter(config.email_outbox_dir),
            },
        )
        service = HitlService(
            config=config,
            org_model=load_org_model(org or org_doc),
            store=EventStore(config.storage_path),
            router=router,
            fact_provider=fact_provider,
        )
        created.append(service)
        return service

    yield factory
    for service in created:
        service.close()


@pytest.fixture
def service(make_service):
    return make_service()


@pytest.fixture
def client(service):
    with TestClient(create_app(service)) as test_client:
        yield test_client
