"""Domain types and the pure policy engine.

A gated decision arrives as a request document carrying observed facts and
a rubric: an ordered list of condition rules. Evaluation is first-match and
fail-safe — a rule that references a fact the request cannot supply escalates
to a human instead of guessing.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Mapping, Optional, Union

Scalar = Union[bool, int, float, str]


def utc_now_iso() -> str:
    """Current UTC time as an ISO-8601 string with millisecond precision."""
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def canonical_json(obj: Any) -> str:
    """Deterministic JSON rendering (sorted keys, no whitespace)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class Urgency(str, Enum):
    REALTIME = "realtime"
    NORMAL = "normal"
    LOW = "low"

    @property
    def rank(self) -> int:
        return {"realtime": 2, "normal": 1, "low": 0}[self.value]


class DispositionKind(str, Enum):
    AUTO_APPROVE = "auto_approve"
    AUTO_REJECT = "auto_reject"
    REQUIRE_HUMAN = "require_human"
    NOTIFY_ONLY = "notify_only"


class Comparator(str, Enum):
    LT = "lt"
    LE = "le"
    GT = "gt"
    GE = "ge"
    EQ = "eq"
    NE = "ne"
    IN_SET = "in_set"
    MATCHES_PATTERN = "matches_pattern"


NUMERIC_COMPARATORS = {Comparator.LT, Comparator.LE, Comparator.GT, Comparator.GE}


class Outcome(str, Enum):
    APPROVE = "approve"
    REJECT = "reject"
    MODIFY = "modify"
    DEFER = "defer"


class DecidedBy(str, Enum):
    AUTOMATED = "automated"
    HUMAN = "human"


def scalar_kind(value: Any) -> Optional[str]:
    """Classify a scalar; bool is checked before int (it subclasses int)."""
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    return None


def is_scalar(value: Any) -> bool:
    return scalar_kind(value) is not None


def scalars_equal(a: Scalar, b: Scalar) -> bool:
    """Equality with strict kinds: true != 1, "5" != 5; int 5 == float 5.0."""
    ka, kb = scalar_kind(a), scalar_kind(b)
    return ka == kb and a == b


@dataclass(frozen=True)
class Disposition:
    """Result of rubric evaluation.

    reason is "rule:<index>" for a fired rule, "default" when no rule
    matched, or "missing_fact:<name>" for the fail-safe escalation.
    """

    kind: DispositionKind
    reason: str
    role_hint: Optional[str] = None

    @property
    def creates_work_item(self) -> bool:
        return self.kind in (DispositionKind.REQUIRE_HUMAN, DispositionKind.NOTIFY_ONLY)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "reason": self.reason, "role_hint": self.role_hint}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Disposition":
        return cls(
            kind=DispositionKind(doc["kind"]),
            reason=doc["reason"],
            role_hint=doc.get("role_hint"),
        )


@dataclass(frozen=True)
class RubricRule:
    fact: str
    comparator: Comparator
    operand: Any  # scalar, tuple of scalars for in_set, or pattern string
    disposition: DispositionKind
    role_hint: Optional[str] = None

    def to_dict(self) -> dict:
        operand = list(self.operand) if isinstance(self.operand, tuple) else self.operand
        return {
            "fact": self.fact,
            "comparator": self.comparator.value,
            "operand": operand,
            "disposition": self.disposition.value,
            "role_hint": self.role_hint,
        }


@dataclass(frozen=True)
class Rubric:
    rules: tuple[RubricRule, ...] = ()
    default_disposition: DispositionKind = DispositionKind.REQUIRE_HUMAN

    def to_dict(self) -> dict:
        return {
            "rules": [r.to_dict() for r in self.rules],
            "default_disposition": self.default_disposition.value,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Rubric":
        """Parse an already-validated rubric document."""
        rules = []
        for raw in doc.get("rules", []):
            operand = raw.get("operand")
            if isinstance(operand, list):
                operand = tuple(operand)
            rules.append(
                RubricRule(
                    fact=raw["fact"],
                    comparator=Comparator(raw["comparator"]),
                    operand=operand,
                    disposition=DispositionKind(raw["disposition"]),
                    role_hint=raw.get("role_hint"),
                )
            )
        default = doc.get("default_disposition") or DispositionKind.REQUIRE_HUMAN.value
        return cls(rules=tuple(rules), default_disposition=DispositionKind(default))


@dataclass(frozen=True)
class ProposedAction:
    name: str
    fields: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "fields": dict(self.fields)}


@dataclass(frozen=True)
class HitlRequest:
    request_id: str
    agent_id: str
    proposed_action: ProposedAction
    task_state: Any = None
    facts: Mapping[str, Scalar] = field(default_factory=dict)
    confidence: Optional[float] = None
    constraints: tuple[str, ...] = ()
    rubric: Rubric = field(default_factory=Rubric)
    urgency: Urgency = Urgency.NORMAL
    callback_endpoint: Optional[str] = None
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "agent_id": self.agent_id,
            "task_state": self.task_state,
            "proposed_action": self.proposed_action.to_dict(),
            "facts": dict(self.facts),
            "confidence": self.confidence,
            "constraints": list(self.constraints),
            "rubric": self.rubric.to_dict(),
            "urgency": self.urgency.value,
            "callback_endpoint": self.callback_endpoint,
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class Resolution:
    """Terminal outcome of a request, with provenance."""

    outcome: Outcome
    decided_by: DecidedBy
    decided_at: str
    user_id: Optional[str] = None
    modified_action: Optional[Mapping[str, Any]] = None
    enrichment: Optional[Mapping[str, Scalar]] = None
    comment: Optional[str] = None

    def __post_init__(self) -> None:
        if self.outcome is Outcome.MODIFY and self.modified_action is None:
            raise ValueError("modify resolution requires modified_action")
        if self.decided_by is DecidedBy.HUMAN and not self.user_id:
            raise ValueError("human resolution requires user_id")

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "decided_by": self.decided_by.value,
            "decided_at": self.decided_at,
            "user_id": self.user_id,
            "modified_action": dict(self.modified_action) if self.modified_action else None,
            "enrichment": dict(self.enrichment) if self.enrichment else None,
            "comment": self.comment,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Resolution":
        return cls(
            outcome=Outcome(doc["outcome"]),
            decided_by=DecidedBy(doc["decided_by"]),
            decided_at=doc["decided_at"],
            user_id=doc.get("user_id"),
            modified_action=doc.get("modified_action"),
            enrichment=doc.get("enrichment"),
            comment=doc.get("comment"),
        )


# ---------------------------------------------------------------------------
# Request validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldError:
    field: str
    code: str  # missing_field | type_mismatch | confidence_out_of_range
    detail: str

    def to_dict(self) -> dict:
        return {"field": self.field, "code": self.code, "detail": self.detail}


class RequestValidationError(ValueError):
    def __init__(self, errors: list[FieldError]):
        super().__init__("; ".join(f"{e.field}: {e.detail}" for e in errors))
        self.errors = errors


def _missing(name: str) -> FieldError:
    return FieldError(name, "missing_field", f"required field '{name}' is missing")


def _mismatch(name: str, expected: str) -> FieldError:
    return FieldError(name, "type_mismatch", f"field '{name}' expected {expected}")


def _validate_rule(raw: Any, path: str, errors: list[FieldError]) -> None:
    if not isinstance(raw, Mapping):
        errors.append(_mismatch(path, "an object"))
        return
    fact = raw.get("fact")
    if not isinstance(fact, str) or not fact:
        errors.append(_mismatch(f"{path}.fact", "a non-empty string"))
    comparator_raw = raw.get("comparator")
    try:
        comparator = Comparator(comparator_raw)
    except ValueError:
        errors.append(_mismatch(f"{path}.comparator", f"one of {[c.value for c in Comparator]}"))
        return
    operand = raw.get("operand")
    if comparator in NUMERIC_COMPARATORS:
        if scalar_kind(operand) != "number":
            errors.append(_mismatch(f"{path}.operand", f"a number for comparator '{comparator.value}'"))
    elif comparator is Comparator.IN_SET:
        if not isinstance(operand, (list, tuple)) or not all(is_scalar(v) for v in operand):
            errors.append(_mismatch(f"{path}.operand", "a list of scalars for comparator 'in_set'"))
    elif comparator is Comparator.MATCHES_PATTERN:
        if not isinstance(operand, str):
            errors.append(_mismatch(f"{path}.operand", "a pattern string for comparator 'matches_pattern'"))
        else:
            try:
                re.compile(operand)
            except re.error as exc:
                errors.append(_mismatch(f"{path}.operand", f"a valid regular expression ({exc})"))
    else:  # eq / ne
        if not is_scalar(operand):
            errors.append(_mismatch(f"{path}.operand", "a scalar"))
    disposition = raw.get("disposition")
    if disposition not in {k.value for k in DispositionKind}:
        errors.append(_mismatch(f"{path}.disposition", f"one of {[k.value for k in DispositionKind]}"))
    role_hint = raw.get("role_hint")
    if role_hint is not None and not isinstance(role_hint, str):
        errors.append(_mismatch(f"{path}.role_hint", "a string"))


def validate_request(
    raw: Mapping,
    *,
    request_id: Optional[str] = None,
    now: Optional[str] = None,
) -> HitlRequest:
    """Normalize a raw request document into a HitlRequest.

    Defaults are applied (urgency=normal, default_disposition=require_human,
    empty facts/constraints/rules). request_id and created_at are
    service-assigned; any values supplied by the caller are ignored.

    Raises RequestValidationError carrying field-level errors.
    """
    errors: list[FieldError] = []
    if not isinstance(raw, Mapping):
        raise RequestValidationError([_mismatch("$", "an object")])

    agent_id = raw.get("agent_id")
    if agent_id is None:
        errors.append(_missing("agent_id"))
    elif not isinstance(agent_id, str) or not agent_id:
        errors.append(_mismatch("agent_id", "a non-empty string"))

    action_raw = raw.get("proposed_action")
    action = None
    if action_raw is None:
        errors.append(_missing("proposed_action"))
    elif not isinstance(action_raw, Mapping):
        errors.append(_mismatch("proposed_action", "an object with 'name' and 'fields'"))
    else:
        name = action_raw.get("name")
        if not isinstance(name, str) or not name:
            errors.append(_mismatch("proposed_action.name", "a non-empty string"))
        fields = action_raw.get("fields", {})
        if not isinstance(fields, Mapping):
            errors.append(_mismatch("proposed_action.fields", "an object"))
        else:
            action = ProposedAction(name=name if isinstance(name, str) else "", fields=dict(fields))

    task_state = raw.get("task_state")
    if task_state is not None and not isinstance(task_state, (str, Mapping)):
        errors.append(_mismatch("task_state", "a string or an object"))

    facts_raw = raw.get("facts", {})
    facts: dict[str, Scalar] = {}
    if not isinstance(facts_raw, Mapping):
        errors.append(_mismatch("facts", "an object of scalar values"))
    else:
        for key, value in facts_raw.items():
            if not isinstance(key, str) or not key:
                errors.append(_mismatch("facts", "non-empty string keys"))
            elif not is_scalar(value):
                errors.append(_mismatch(f"facts.{key}", "a scalar (number, string, or boolean)"))
            else:
                facts[key] = value

    confidence = raw.get("confidence")
    if confidence is not None:
        if scalar_kind(confidence) != "number":
            errors.append(_mismatch("confidence", "a number"))
        elif not 0.0 <= confidence <= 1.0:
            errors.append(
                FieldError("confidence", "confidence_out_of_range",
                           f"confidence {confidence} outside [0, 1]")
            )

    constraints_raw = raw.get("constraints", [])
    constraints: tuple[str, ...] = ()
    if not isinstance(constraints_raw, (list, tuple)) or not all(
        isinstance(c, str) for c in constraints_raw
    ):
        errors.append(_mismatch("constraints", "a list of strings"))
    else:
        constraints = tuple(constraints_raw)

    urgency_raw = raw.get("urgency", Urgency.NORMAL.value)
    urgency = Urgency.NORMAL
    try:
        urgency = Urgency(urgency_raw)
    except ValueError:
        errors.append(_mismatch("urgency", f"one of {[u.value for u in Urgency]}"))

    callback = raw.get("callback_endpoint")
    if callback is not None:
        if not isinstance(callback, str) or not callback.startswith(("http://", "https://")):
            errors.append(_mismatch("callback_endpoint", "an http(s) URL"))

    rubric_raw = raw.get("rubric", {})
    rubric = Rubric()
    if not isinstance(rubric_raw, Mapping):
        errors.append(_mismatch("rubric", "an object with 'rules' and 'default_disposition'"))
    else:
        rules_raw = rubric_raw.get("rules", [])
        if not isinstance(rules_raw, list):
            errors.append(_mismatch("rubric.rules", "a list of rules"))
            rules_raw = []
        for i, rule_raw in enumerate(rules_raw):
            _validate_rule(rule_raw, f"rubric.rules[{i}]", errors)
        default = rubric_raw.get("default_disposition")
        if default is not None and default not in {k.value for k in DispositionKind}:
            errors.append(
                _mismatch("rubric.default_disposition", f"one of {[k.value for k in DispositionKind]}")
            )
        if not errors:
            rubric = Rubric.from_dict(rubric_raw)

    if errors:
        raise RequestValidationError(errors)

    return HitlRequest(
        request_id=request_id or uuid.uuid4().hex,
        agent_id=agent_id,
        proposed_action=action,
        task_state=dict(task_state) if isinstance(task_state, Mapping) else task_state,
        facts=facts,
        confidence=float(confidence) if confidence is not None else None,
        constraints=constraints,
        rubric=rubric,
        urgency=urgency,
        callback_endpoint=callback,
        created_at=now or utc_now_iso(),
    )


# ---------------------------------------------------------------------------
# Rubric evaluation
# ---------------------------------------------------------------------------

class _UnusableFact(Exception):
    """Fact value present but not usable by the rule's comparator."""


def _condition_holds(rule: RubricRule, value: Scalar) -> bool:
    cmp = rule.comparator
    if cmp in NUMERIC_COMPARATORS:
        if scalar_kind(value) != "number":
            raise _UnusableFact
        if cmp is Comparator.LT:
            return value < rule.operand
        if cmp is Comparator.LE:
            return value <= rule.operand
        if cmp is Comparator.GT:
            return value > rule.operand
        return value >= rule.operand
    if cmp is Comparator.EQ:
        return scalars_equal(value, rule.operand)
    if cmp is Comparator.NE:
        return not scalars_equal(value, rule.operand)
    if cmp is Comparator.IN_SET:
        return any(scalars_equal(value, member) for member in rule.operand)
    # matches_pattern: full-string match against the operand regex
    if scalar_kind(value) != "string":
        raise _UnusableFact
    return re.fullmatch(rule.operand, value) is not None


def evaluate_rubric(
    facts: Mapping[str, Scalar],
    confidence: Optional[float],
    rubric: Rubric,
) -> Disposition:
    """Evaluate rules in order; the first rule whose condition holds wins.

    Pure and deterministic. confidence, when supplied, is visible to rules
    under the reserved fact name "confidence". Reaching a rule whose fact is
    absent (or present but unusable for the comparator) escalates fail-safe
    to require_human rather than skipping the rule.
    """
    view: dict[str, Scalar] = dict(facts)
    if confidence is not None:
        view["confidence"] = confidence
    for index, rule in enumerate(rubric.rules):
        if rule.fact not in view:
            return Disposition(DispositionKind.REQUIRE_HUMAN, f"missing_fact:{rule.fact}")
        try:
            hit = _condition_holds(rule, view[rule.fact])
        except _UnusableFact:
            return Disposition(DispositionKind.REQUIRE_HUMAN, f"missing_fact:{rule.fact}")
        if hit:
            return Disposition(rule.disposition, f"rule:{index}", role_hint=rule.role_hint)
    return Disposition(rubric.default_disposition, "default")


# ---------------------------------------------------------------------------
# Action signatures
# ---------------------------------------------------------------------------

def _value_bucket(value: Any) -> str:
    kind = scalar_kind(value)
    if kind == "bool":
        return f"bool:{str(value).lower()}"
    if kind == "number":
        if value == 0:
            return "num:zero"
        return f"num:e{int(math.floor(math.log10(abs(value))))}"
    if kind == "string":
        return "str"
    return "doc"


def action_signature(request: HitlRequest, *, value_buckets: bool = False) -> str:
    """Canonical fingerprint grouping similar actions.

    Covers (agent_id, action name, sorted field names, deduplicated
    constraint tags); invariant under field/fact ordering and, by default,
    under field values. With value_buckets=True, coarse per-field value
    buckets (numeric order of magnitude, boolean literal) are mixed in.
    """
    payload: dict[str, Any] = {
        "agent": request.agent_id,
        "action": request.proposed_action.name,
        "fields": sorted(request.proposed_action.fields),
        "constraints": sorted(set(request.constraints)),
    }
    if value_buckets:
        payload["buckets"] = {
            name: _value_bucket(value)
            for name, value in sorted(request.proposed_action.fields.items())
        }
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:16]
