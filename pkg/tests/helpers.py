"""Shared test utilities: independent oracles, request builders, stub servers."""

from __future__ import annotations

import json
import re
import socket
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

import uvicorn

FACT_POOL = ["amount", "region", "tier", "flagged", "score", "count", "owner", "category"]


# ---------------------------------------------------------------------------
# Brute-force rubric oracle: a reference linear scan over raw documents,
# deliberately independent of the implementation it checks.
# ---------------------------------------------------------------------------

def _kind(value):
    if isinstance(value, bool):
        return "b"
    if isinstance(value, (int, float)):
        return "n"
    if isinstance(value, str):
        return "s"
    return "?"


def _oracle_match(comparator, value, operand):
    """True/False when the condition is decidable, 'unusable' otherwise."""
    if comparator in ("lt", "le", "gt", "ge"):
        if _kind(value) != "n":
            return "unusable"
        if comparator == "lt":
            return value < operand
        if comparator == "le":
            return value <= operand
        if comparator == "gt":
            return value > operand
        return value >= operand
    if comparator == "eq":
        return _kind(value) == _kind(operand) and value == operand
    if comparator == "ne":
        return not (_kind(value) == _kind(operand) and value == operand)
    if comparator == "in_set":
        return any(_kind(value) == _kind(m) and value == m for m in operand)
    # matches_pattern
    if _kind(value) != "s":
        return "unusable"
    return re.fullmatch(operand, value) is not None


def oracle_evaluate(facts, confidence, rubric_doc):
    """Reference first-match scan; returns (kind, reason, role_hint)."""
    known = dict(facts)
    if confidence is not None:
        known["confidence"] = confidence
    for index, rule in enumerate(rubric_doc.get("rules", [])):
        name = rule["fact"]
        if name not in known:
            return ("require_human", f"missing_fact:{name}", None)
        verdict = _oracle_match(rule["comparator"], known[name], rule["operand"])
        if verdict == "unusable":
            return ("require_human", f"missing_fact:{name}", None)
        if verdict:
            return (rule["disposition"], f"rule:{index}", rule.get("role_hint"))
    return (rubric_doc.get("default_disposition", "require_human"), "default", None)


# ---------------------------------------------------------------------------
# Random instance generation (shared by unit and acceptance tests)
# ---------------------------------------------------------------------------

def gen_scalar(rng):
    pick = rng.randrange(4)
    if pick == 0:
        return rng.choice([True, False])
    if pick == 1:
        return rng.randint(-100, 100000)
    if pick == 2:
        return round(rng.uniform(-10.0, 10.0), 3)
    return rng.choice(["eu", "us", "apac", "gold", "silver", "x1", "x9"])


def gen_rule(rng, fact_pool=None):
    fact = rng.choice((fact_pool or FACT_POOL) + ["confidence"])
    comparator = rng.choice(
        ["lt", "le", "gt", "ge", "eq", "ne", "in_set", "matches_pattern"]
    )
    if comparator in ("lt", "le", "gt", "ge"):
        operand = rng.choice([rng.randint(-50, 50000), round(rng.uniform(0.0, 1.0), 2)])
    elif comparator == "in_set":
        operand = [gen_scalar(rng) for _ in range(rng.randrange(0, 4))]
    elif comparator == "matches_pattern":
        operand = rng.choice(["eu.*", "[a-z]+", "gold|silver", "x\\d", "us"])
    else:
        operand = gen_scalar(rng)
    disposition = rng.choice(["auto_approve", "auto_reject", "require_human", "notify_only"])
    role_hint = None
    if disposition == "require_human" and rng.random() < 0.3:
        role_hint = rng.choice(["role:approvers", "manager_of:requester"])
    return {
        "fact": fact,
        "comparator": comparator,
        "operand": operand,
        "disposition": disposition,
        "role_hint": role_hint,
    }


def gen_instance(rng, max_rules=10, max_facts=8):
    rules = [gen_rule(rng) for _ in range(rng.randrange(0, max_rules + 1))]
    default = rng.choice(["auto_approve", "auto_reject", "require_human", "notify_only"])
    facts = {
        name: gen_scalar(rng)
        for name in rng.sample(FACT_POOL, rng.randrange(0, max_facts + 1))
    }
    confidence = round(rng.random(), 3) if rng.random() < 0.7 else None
    return facts, confidence, {"rules": rules, "default_disposition": default}


# ---------------------------------------------------------------------------
# Request document builders
# ---------------------------------------------------------------------------

def rule_doc(fact, comparator, operand, disposition, role_hint=None):
    return {
        "fact": fact,
        "comparator": comparator,
        "operand": operand,
        "disposition": disposition,
        "role_hint": role_hint,
    }


def rubric_doc(*rules, default="require_human"):
    return {"rules": list(rules), "default_disposition": default}


def request_doc(
    agent_id="agent-1",
    action="wire_transfer",
    fields=None,
    facts=None,
    rubric=None,
    **extra,
):
    doc = {
        "agent_id": agent_id,
        "proposed_action": {"name": action, "fields": fields or {"amount": 100}},
        "facts": facts if facts is not None else {},
    }
    if rubric is not None:
        doc["rubric"] = rubric
    doc.update(extra)
    return doc


def gated_request(user_facts=None, role_hint="user:bob", urgency="normal", **extra):
    """A request whose rubric always routes to a human."""
    return request_doc(
        facts=user_facts if user_facts is not None else {"amount": 50000},
        rubric=rubric_doc(
            rule_doc("amount", "gt", 10000, "require_human", role_hint=role_hint),
            default="auto_approve",
        ),
        urgency=urgency,
        **extra,
    )


def auto_request(**extra):
    """A request whose rubric always auto-approves."""
    return request_doc(
        facts={"amount": 10},
        confidence=0.99,
        rubric=rubric_doc(
            rule_doc("confidence", "ge", 0.9, "auto_approve"),
            default="require_human",
        ),
        **extra,
    )


# ---------------------------------------------------------------------------
# Scriptable HTTP endpoint (webhook targets, callback receivers in tests)
# ---------------------------------------------------------------------------

class StubEndpoint:
    """Answers POSTs with scripted status codes; records received payloads."""

    def __init__(self, script: Optional[list[int]] = None, default_status: int = 200):
        self.script = list(script or [])
        self.default_status = default_status
        self.received: list[dict] = []
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:  # noqa: N802
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    payload = json.loads(raw) if raw else {}
                except json.JSONDecodeError:
                    payload = {"_raw": raw.decode("utf-8", "replace")}
                with stub._lock:
                    stub.received.append(payload)
                    status = stub.script.pop(0) if stub.script else stub.default_status
                self.send_response(status)
                self.end_headers()
                self.wfile.write(b"{}")

            def log_message(self, fmt, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        self.url = f"http://127.0.0.1:{self._server.server_address[1]}/hook"

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=2)


# ---------------------------------------------------------------------------
# Live uvicorn server for protocol-level tests
# ---------------------------------------------------------------------------

class LiveServer:
    def __init__(self, app):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        self.port = port
        self.url = f"http://127.0.0.1:{port}"
        config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("live server failed to start")
            time.sleep(0.02)

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=5)
