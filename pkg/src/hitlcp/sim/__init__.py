"""Agent-side simulator: drives the request-resolution protocol end to end."""

from .receiver import CallbackReceiver
from .runner import (
    RequestResult,
    ResponderDirective,
    ScenarioReport,
    ScenarioSpec,
    emit_report,
    load_scenario,
    run_scenario,
)

__all__ = [
    "CallbackReceiver",
    "RequestResult",
    "ResponderDirective",
    "ScenarioReport",
    "ScenarioSpec",
    "emit_report",
    "load_scenario",
    "run_scenario",
]
