"""Decoupled human-in-the-loop control plane for agentic workflows.

Agents delegate gated decisions over a request-resolution protocol; the
service evaluates rubric conditions (WHEN), resolves responsible humans
(WHO), applies interaction semantics (WHAT), routes over channels (WHERE),
and audits every transition to an append-only event log.
"""

from .core import (
    Comparator,
    DecidedBy,
    Disposition,
    DispositionKind,
    HitlRequest,
    Outcome,
    Resolution,
    Rubric,
    RubricRule,
    Urgency,
    action_signature,
    evaluate_rubric,
    validate_request,
)
from .org import OrgModel, RoleSpec, User, escalation_chain, load_org_model, resolve_participants
from .channels import ChannelKind, ChannelRouter, DeliveryRecord, RoutingPolicy, select_channel
from .audit import AuditEvent, AutonomySuggestion, analyze_autonomy
from .config import ServiceConfig
from .service import HitlService, RequestStatus
from .store import AuditRecord, EventStore

__version__ = "0.1.0"

__all__ = [
    "AuditEvent",
    "AuditRecord",
    "AutonomySuggestion",
    "ChannelKind",
    "ChannelRouter",
    "Comparator",
    "DecidedBy",
    "DeliveryRecord",
    "Disposition",
    "DispositionKind",
    "EventStore",
    "HitlRequest",
    "HitlService",
    "OrgModel",
    "Outcome",
    "RequestStatus",
    "Resolution",
    "RoleSpec",
    "RoutingPolicy",
    "Rubric",
    "RubricRule",
    "ServiceConfig",
    "Urgency",
    "User",
    "action_signature",
    "analyze_autonomy",
    "escalation_chain",
    "evaluate_rubric",
    "load_org_model",
    "resolve_participants",
    "select_channel",
    "validate_request",
]
