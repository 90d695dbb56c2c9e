"""Organizational model: users, role bindings, and the reporting hierarchy.

Workflow-independent by design — nothing here reads rubric or action
content. Role specs are resolved against the model at runtime; the model
itself is immutable after load and replaced wholesale on reload.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional


class OrgModelError(ValueError):
    """Raised when an org model document fails validation."""


class DuplicateUser(OrgModelError):
    def __init__(self, user_id: str):
        super().__init__(f"duplicate user '{user_id}'")
        self.user_id = user_id


class UnknownUser(OrgModelError):
    def __init__(self, user_id: str):
        super().__init__(f"unknown user '{user_id}'")
        self.user_id = user_id


class CyclicHierarchy(OrgModelError):
    def __init__(self, cycle: list[str]):
        super().__init__(f"reporting hierarchy contains a cycle: {' -> '.join(cycle)}")
        self.cycle = cycle


class RoleResolutionError(ValueError):
    """Base for runtime participant-resolution failures."""


class RoleUnresolved(RoleResolutionError):
    def __init__(self, spec: "RoleSpec", detail: str = ""):
        super().__init__(f"role spec '{spec}' resolved to no users" + (f": {detail}" if detail else ""))
        self.spec = spec


class MissingContextKey(RoleResolutionError):
    def __init__(self, key: str):
        super().__init__(f"context key '{key}' required by manager_of is missing")
        self.key = key


class NoManager(RoleResolutionError):
    def __init__(self, user_id: str):
        super().__init__(f"user '{user_id}' has no manager")
        self.user_id = user_id


@dataclass(frozen=True)
class User:
    user_id: str
    display_name: str = ""
    channel_addresses: Mapping[str, str] = field(default_factory=dict)


class RoleSpecKind(str, Enum):
    NAMED_ROLE = "named_role"
    MANAGER_OF = "manager_of"
    USER_LITERAL = "user_literal"


@dataclass(frozen=True)
class RoleSpec:
    """Who should handle an interaction.

    String syntax: "role:<name>", "manager_of:<context key>", "user:<id>";
    a bare string is shorthand for a named role.
    """

    kind: RoleSpecKind
    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("role spec value must be non-empty")

    def __str__(self) -> str:
        prefix = {"named_role": "role", "manager_of": "manager_of", "user_literal": "user"}
        return f"{prefix[self.kind.value]}:{self.value}"

    @classmethod
    def parse(cls, spec: str) -> "RoleSpec":
        if spec.startswith("manager_of:"):
            return cls(RoleSpecKind.MANAGER_OF, spec.split(":", 1)[1])
        if spec.startswith("user:"):
            return cls(RoleSpecKind.USER_LITERAL, spec.split(":", 1)[1])
        if spec.startswith("role:"):
            return cls(RoleSpecKind.NAMED_ROLE, spec.split(":", 1)[1])
        return cls(RoleSpecKind.NAMED_ROLE, spec)


@dataclass(frozen=True)
class OrgModel:
    users: Mapping[str, User]
    role_bindings: Mapping[str, tuple[str, ...]]
    reporting_edges: Mapping[str, str]

    @property
    def roles(self) -> set[str]:
        return set(self.role_bindings)


def load_org_model(document: Mapping) -> OrgModel:
    """Validate and build an OrgModel from a config document.

    Fails on duplicate users, references to unknown users, or any cycle in
    reporting_edges (single-parent forest required).
    """
    users: dict[str, User] = {}
    for raw in document.get("users", []):
        user_id = raw.get("user_id")
        if not isinstance(user_id, str) or not user_id:
            raise OrgModelError("user entry missing user_id")
        if user_id in users:
            raise DuplicateUser(user_id)
        addresses = raw.get("channel_addresses", {})
        if not isinstance(addresses, Mapping):
            raise OrgModelError(f"channel_addresses for '{user_id}' must be an object")
        users[user_id] = User(
            user_id=user_id,
            display_name=raw.get("display_name", user_id),
            channel_addresses=dict(addresses),
        )

    bindings: dict[str, tuple[str, ...]] = {}
    for role, members in document.get("role_bindings", {}).items():
        for user_id in members:
            if user_id not in users:
                raise UnknownUser(user_id)
        bindings[role] = tuple(sorted(set(members)))

    edges: dict[str, str] = {}
    for user_id, manager_id in document.get("reporting_edges", {}).items():
        if user_id not in users:
            raise UnknownUser(user_id)
        if manager_id not in users:
            raise UnknownUser(manager_id)
        edges[user_id] = manager_id

    _check_acyclic(edges)
    return OrgModel(users=users, role_bindings=bindings, reporting_edges=edges)


def _check_acyclic(edges: Mapping[str, str]) -> None:
    cleared: set[str] = set()
    for start in edges:
        if start in cleared:
            continue
        path: list[str] = []
        seen_here: set[str] = set()
        node: Optional[str] = start
        while node is not None and node not in cleared:
            if node in seen_here:
                cycle = path[path.index(node):] + [node]
                raise CyclicHierarchy(cycle)
            seen_here.add(node)
            path.append(node)
            node = edges.get(node)
        cleared.update(path)


def resolve_participants(
    spec: RoleSpec,
    model: OrgModel,
    context: Optional[Mapping[str, str]] = None,
) -> list[User]:
    """Resolve a role spec to a non-empty, lexicographically ordered user list.

    named_role returns every bound user (any one may respond); manager_of
    looks up context[key] and walks one reporting edge; user_literal returns
    that user. Pure over (spec, model, context).
    """
    context = context or {}
    if spec.kind is RoleSpecKind.NAMED_ROLE:
        member_ids = model.role_bindings.get(spec.value, ())
        if not member_ids:
            raise RoleUnresolved(spec)
        return [model.users[uid] for uid in member_ids]
    if spec.kind is RoleSpecKind.MANAGER_OF:
        subject = context.get(spec.value)
        if subject is None:
            raise MissingContextKey(spec.value)
        if not isinstance(subject, str) or subject not in model.users:
            raise RoleUnresolved(spec, detail=f"context user '{subject}' not in model")
        manager_id = model.reporting_edges.get(subject)
        if manager_id is None:
            raise NoManager(subject)
        return [model.users[manager_id]]
    # user_literal
    user = model.users.get(spec.value)
    if user is None:
        raise RoleUnresolved(spec, detail="no such user")
    return [user]


def escalation_chain(user_id: str, model: OrgModel) -> list[str]:
    """Managers of user_id in order, up to the hierarchy root (user excluded).

    Acyclicity guarantees termination; length is bounded by |users|.
    """
    if user_id not in model.users:
        raise UnknownUser(user_id)
    chain: list[str] = []
    node = model.reporting_edges.get(user_id)
    while node is not None:
        chain.append(node)
        node = model.reporting_edges.get(node)
    return chain
