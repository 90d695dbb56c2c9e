"""Audit vocabulary and progressive-autonomy analytics.

The event log is the unified record of every human-agent interaction.
Analysis over it is pure and advisory: repeated human approval of similar
actions surfaces automation candidates, frequent rejection or modification
surfaces constraint candidates. No rubric is ever mutated here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .core import (
    DecidedBy,
    DispositionKind,
    Outcome,
    Rubric,
    evaluate_rubric,
)
from .store import AuditRecord


class AuditEvent(str, Enum):
    SUBMITTED = "submitted"
    EVALUATED = "evaluated"
    DELIVERED = "delivered"
    RESPONDED = "responded"
    RESOLVED = "resolved"
    EXPIRED = "expired"
    CALLBACK_ATTEMPTED = "callback_attempted"
    CALLBACK_DELIVERED = "callback_delivered"
    CALLBACK_PARKED = "callback_parked"
    ORG_RELOADED = "org_reloaded"


class SuggestionKind(str, Enum):
    AUTOMATE_CANDIDATE = "automate_candidate"
    CONSTRAINT_CANDIDATE = "constraint_candidate"


@dataclass(frozen=True)
class AutonomySuggestion:
    signature: str
    kind: SuggestionKind
    evidence: dict
    window: int

    def to_dict(self) -> dict:
        return {
            "signature": self.signature,
            "kind": self.kind.value,
            "evidence": dict(self.evidence),
            "window": self.window,
        }


@dataclass
class _Observation:
    seq: int
    outcome: str
    override_of_auto: bool


def _would_have_auto_approved(
    rubric_doc: dict, facts: dict, confidence: Optional[float], fired_reason: str
) -> bool:
    """Re-evaluate with the fired gating rule removed: would automation have
    approved this action absent the human gate?"""
    if not fired_reason.startswith("rule:"):
        return False
    index = int(fired_reason.split(":", 1)[1])
    rubric = Rubric.from_dict(rubric_doc)
    reduced = Rubric(
        rules=tuple(r for i, r in enumerate(rubric.rules) if i != index),
        default_disposition=rubric.default_disposition,
    )
    return evaluate_rubric(facts, confidence, reduced).kind is DispositionKind.AUTO_APPROVE


def analyze_autonomy(
    records: Iterable[AuditRecord], threshold_n: int
) -> list[AutonomySuggestion]:
    """Scan the log for per-signature human decision patterns.

    For each action signature, the window is the most recent
    min(threshold_n, total) human resolutions in log order:

    - automate_candidate: at least threshold_n observations exist and the
      last threshold_n are all approvals (any reject/modify in the window
      suppresses the suggestion).
    - constraint_candidate: at least half the window is reject or modify.

    Deterministic and side-effect free; suggestions are sorted by signature.
    """
    if threshold_n < 1:
        raise ValueError("threshold_n must be >= 1")

    signatures: dict[str, str] = {}
    requests: dict[str, dict] = {}
    evaluations: dict[str, dict] = {}
    by_signature: dict[str, list[_Observation]] = {}

    for record in records:
        event = record.event
        if event == AuditEvent.SUBMITTED.value:
            signatures[record.request_id] = record.payload["signature"]
            requests[record.request_id] = record.payload["request"]
        elif event == AuditEvent.EVALUATED.value:
            evaluations[record.request_id] = record.payload
        elif event == AuditEvent.RESOLVED.value:
            resolution = record.payload["resolution"]
            if resolution["decided_by"] != DecidedBy.HUMAN.value:
                continue
            signature = signatures.get(record.request_id)
            if signature is None:
                continue
            outcome = resolution["outcome"]
            override = False
            if outcome in (Outcome.REJECT.value, Outcome.MODIFY.value):
                request = requests.get(record.request_id, {})
                evaluation = evaluations.get(record.request_id, {})
                override = _would_have_auto_approved(
                    request.get("rubric", {}),
                    evaluation.get("effective_facts", {}),
                    request.get("confidence"),
                    evaluation.get("disposition", {}).get("reason", ""),
                )
            by_signature.setdefault(signature, []).append(
                _Observation(seq=record.seq, outcome=outcome, override_of_auto=override)
            )

    suggestions: list[AutonomySuggestion] = []
    for signature in sorted(by_signature):
        observations = sorted(by_signature[signature], key=lambda o: o.seq)
        window = observations[-min(threshold_n, len(observations)):]
        evidence = {
            "approvals": sum(1 for o in window if o.outcome == Outcome.APPROVE.value),
            "rejections": sum(1 for o in window if o.outcome == Outcome.REJECT.value),
            "modifications": sum(1 for o in window if o.outcome == Outcome.MODIFY.value),
            "overrides_of_auto": sum(1 for o in window if o.override_of_auto),
        }
        negatives = evidence["rejections"] + evidence["modifications"]
        if len(observations) >= threshold_n and evidence["approvals"] == len(window):
            suggestions.append(
                AutonomySuggestion(
                    signature=signature,
                    kind=SuggestionKind.AUTOMATE_CANDIDATE,
                    evidence=evidence,
                    window=len(window),
                )
            )
        elif window and negatives * 2 >= len(window):
            suggestions.append(
                AutonomySuggestion(
                    signature=signature,
                    kind=SuggestionKind.CONSTRAINT_CANDIDATE,
                    evidence=evidence,
                    window=len(window),
                )
            )
    return suggestions
