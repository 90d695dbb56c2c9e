"""Agent simulator: scenario execution, reporting, CLI."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from hitlcp.api import create_app
from hitlcp.sim import (
    CallbackReceiver,
    ScenarioReport,
    emit_report,
    load_scenario,
    run_scenario,
)
from hitlcp.sim.cli import main as sim_main
from hitlcp.sim.runner import RequestResult, ServiceUnreachable

from helpers import LiveServer, auto_request, gated_request


@pytest.fixture
def live(make_service):
    service = make_service()
    server = LiveServer(create_app(service))
    try:
        yield server, service
    finally:
        server.stop()


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def all_auto_scenario(n=5, mode="poll"):
    return {
        "name": "all-auto",
        "requests": [{"mode": mode, "body": auto_request()} for _ in range(n)],
    }


def gated_scenario(mode="poll", delay=0.2, outcome="approve"):
    return {
        "name": "one-gate",
        "requests": [{"mode": mode, "body": gated_request()}],
        "responder_script": [{"delay": delay, "user_id": "bob", "outcome": outcome}],
    }


class TestRunScenario:
    def test_all_auto_ratio_one(self, live, tmp_path):
        server, service = live
        spec = load_scenario(write_scenario(tmp_path, all_auto_scenario(10)))
        report = run_scenario(spec, server.url, poll_interval=0.02)
        assert report.total == 10
        assert report.autonomy_ratio == 1.0
        assert report.all_terminal
        assert all(r.decided_by == "automated" for r in report.results)
        for user in service.org_model.users:
            assert service.list_pending(user) == []

    def test_poll_mode_gated_approval(self, live, tmp_path):
        server, _ = live
        spec = load_scenario(write_scenario(tmp_path, gated_scenario(delay=0.3)))
        report = run_scenario(spec, server.url, poll_interval=0.05)
        result = report.results[0]
        assert result.status == "resolved"
        assert result.outcome == "approve"
        assert result.decided_by == "human"
        assert result.polls >= 1
        assert report.autonomy_ratio == 0.0

    def test_callback_mode_single_effective_delivery_despite_retries(self, live, tmp_path):
        server, _ = live
        receiver = CallbackReceiver(fail_times=2)
        try:
            spec = load_scenario(write_scenario(tmp_path, gated_scenario(mode="callback")))
            report = run_scenario(spec, server.url, receiver=receiver, timeout=30)
            result = report.results[0]
            assert result.outcome == "approve"
            assert result.decided_by == "human"
            assert receiver.effective_deliveries(result.request_id) == 1
            assert receiver.attempts(result.request_id) == 3  # two forced failures + success
        finally:
            receiver.close()

    def test_mode_equivalence_small(self, live, tmp_path):
        server, _ = live
        doc = {
            "name": "mixed",
            "requests": [
                {"mode": "poll", "body": auto_request()},
                {"mode": "poll", "body": gated_request()},
                {"mode": "poll", "body": auto_request()},
            ],
            "responder_script": [{"delay": 0.1, "user_id": "bob", "outcome": "reject"}],
        }
        spec = load_scenario(write_scenario(tmp_path, doc))
        polled = run_scenario(spec, server.url, mode="poll", poll_interval=0.05)
        called_back = run_scenario(spec, server.url, mode="callback", timeout=30)
        key = lambda rep: sorted((r.outcome, r.decided_by) for r in rep.results)
        assert key(polled) == key(called_back)

    def test_repetitions_expand_requests(self, live, tmp_path):
        server, _ = live
        doc = all_auto_scenario(2)
        doc["repetitions"] = 3
        spec = load_scenario(write_scenario(tmp_path, doc))
        report = run_scenario(spec, server.url, poll_interval=0.02, parallel=3)
        assert report.total == 6

    def test_unreachable_service(self, tmp_path):
        spec = load_scenario(write_scenario(tmp_path, all_auto_scenario(1)))
        with pytest.raises(ServiceUnreachable):
            run_scenario(spec, "http://127.0.0.1:9", timeout=2)

    def test_bad_mode_rejected_at_load(self, tmp_path):
        with pytest.raises(ValueError):
            load_scenario(
                write_scenario(
                    tmp_path,
                    {"name": "x", "requests": [{"mode": "smoke", "body": {}}]},
                )
            )


class TestEmitReport:
    def _result(self, index, status="auto_resolved", outcome="approve", decided_by="automated"):
        return RequestResult(
            index=index,
            request_id=f"req-{index}",
            mode="poll",
            status=status,
            outcome=outcome,
            decided_by=decided_by,
            latency_seconds=0.01,
            polls=1,
        )

    def test_empty_scenario_ratio_na(self):
        report = ScenarioReport(scenario="empty", mode="poll", results=[])
        text = emit_report(report, "text")
        assert "autonomy ratio: n/a" in text
        assert json.loads(emit_report(report, "json"))["autonomy_ratio"] is None

    def test_mixed_ratio(self):
        results = [self._result(i) for i in range(3)]
        results.append(self._result(3, status="resolved", decided_by="human"))
        report = ScenarioReport(scenario="mixed", mode="poll", results=results)
        assert report.autonomy_ratio == 0.75
        assert "autonomy ratio: 0.75" in emit_report(report, "text")

    def test_json_rendering_deterministic(self):
        report = ScenarioReport(
            scenario="x", mode="poll", results=[self._result(0)], duration_seconds=1.5
        )
        assert emit_report(report, "json") == emit_report(report, "json")
        parsed = json.loads(emit_report(report, "json"))
        assert parsed["total"] == 1 and parsed["all_terminal"] is True


class TestCli:
    def test_run_exits_zero_on_all_terminal(self, live, tmp_path):
        server, _ = live
        path = write_scenario(tmp_path, all_auto_scenario(3))
        runner = CliRunner()
        result = runner.invoke(
            sim_main,
            [
                "run",
                "--scenario", str(path),
                "--service", server.url,
                "--poll-interval", "0.02",
                "--format", "json",
            ],
        )
        assert result.exit_code == 0, result.output
        parsed = json.loads(result.output)
        assert parsed["autonomy_ratio"] == 1.0

    def test_unreachable_service_exits_two(self, tmp_path):
        path = write_scenario(tmp_path, all_auto_scenario(1))
        runner = CliRunner()
        result = runner.invoke(
            sim_main,
            ["run", "--scenario", str(path), "--service", "http://127.0.0.1:9"],
        )
        assert result.exit_code == 2
