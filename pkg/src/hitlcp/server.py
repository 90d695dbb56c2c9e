"""Service assembly and the hitl-serve entry point."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional

import click
import uvicorn

from .api import create_app
from .channels import (
    ChannelKind,
    ChannelRouter,
    DashboardAdapter,
    EmailStubAdapter,
    WebhookAdapter,
)
from .config import ServiceConfig
from .facts import NullFactProvider, StaticFileFactProvider
from .org import OrgModel, load_org_model
from .service import HitlService
from .store import EventStore

logger = logging.getLogger(__name__)


def build_service(config: ServiceConfig, org_model: Optional[OrgModel] = None) -> HitlService:
    """Wire a service from config: store, adapters, org model, fact provider."""
    if org_model is None:
        if config.org_model_path is None:
            raise ValueError("config must name an org_model_path (or pass org_model)")
        with open(config.org_model_path, "r", encoding="utf-8") as fh:
            org_model = load_org_model(json.load(fh))
    provider = (
        StaticFileFactProvider(config.fact_provider_path)
        if config.fact_provider_path
        else NullFactProvider()
    )
    router = ChannelRouter(
        policy=config.routing_policy,
        adapters={
            ChannelKind.DASHBOARD: DashboardAdapter(),
            ChannelKind.WEBHOOK: WebhookAdapter(timeout=config.webhook_timeout_seconds),
            ChannelKind.EMAIL_STUB: EmailStubAdapter(config.email_outbox_dir),
        },
    )
    store = EventStore(config.storage_path)
    return HitlService(
        config=config,
        org_model=org_model,
        store=store,
        router=router,
        fact_provider=provider,
    )


@click.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="Service config file (JSON).")
@click.option("--host", default=None, help="Override the configured bind host.")
@click.option("--port", default=None, type=int, help="Override the configured port.")
def main(config_path: str, host: Optional[str], port: Optional[int]) -> None:
    """Run the HITL control-plane service."""
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    config = ServiceConfig.from_file(Path(config_path))
    if host or port:
        config = ServiceConfig(
            **{
                **config.__dict__,
                "host": host or config.host,
                "port": port or config.port,
            }
        )
    service = build_service(config)
    app = create_app(service)
    logger.info("serving on %s:%s (store: %s)", config.host, config.port, config.storage_path)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
