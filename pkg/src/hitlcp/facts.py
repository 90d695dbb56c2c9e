"""Pluggable fact providers.

The service can enrich a request's facts from an external source keyed by
(agent_id, action name). The default implementation reads a static JSON
file; anything smarter (an MCP client, a database) plugs in behind the same
two-argument lookup. Provider facts are a baseline: facts submitted with
the request always win on key collisions.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Protocol

from .core import Scalar


class FactProvider(Protocol):
    def facts_for(self, agent_id: str, action_name: str) -> Mapping[str, Scalar]:
        ...


class NullFactProvider:
    """No enrichment; facts pass through as submitted."""

    def facts_for(self, agent_id: str, action_name: str) -> Mapping[str, Scalar]:
        return {}


class StaticFileFactProvider:
    """Facts from a JSON file shaped {agent_id: {action_name: {fact: value}}}."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        with self.path.open("r", encoding="utf-8") as fh:
            self._table = json.load(fh)

    def facts_for(self, agent_id: str, action_name: str) -> Mapping[str, Scalar]:
        return self._table.get(agent_id, {}).get(action_name, {})
