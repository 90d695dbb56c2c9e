"""hitl-sim: drive scenarios against a running control-plane service."""

from __future__ import annotations

import sys

import click

from .runner import ServiceUnreachable, emit_report, load_scenario, run_scenario


@click.group()
def main() -> None:
    """Agent simulator for the HITL control plane."""


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True),
              help="Scenario file (JSON).")
@click.option("--service", "service_url", required=True, help="Service base URL.")
@click.option("--mode", type=click.Choice(["poll", "callback"]), default=None,
              help="Override the per-request execution mode.")
@click.option("--parallel", default=1, type=int, show_default=True,
              help="Concurrent in-flight requests.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text",
              show_default=True)
@click.option("--timeout", default=60.0, type=float, show_default=True,
              help="Per-request terminal-state timeout in seconds.")
@click.option("--poll-interval", default=None, type=float,
              help="Fixed poll interval; defaults to the service's retry-after hint.")
def run(scenario_path: str, service_url: str, mode: str | None, parallel: int,
        fmt: str, timeout: float, poll_interval: float | None) -> None:
    """Run a scenario; exit 0 iff every request reached a terminal state."""
    spec = load_scenario(scenario_path)
    try:
        report = run_scenario(
            spec,
            service_url,
            mode=mode,
            parallel=parallel,
            timeout=timeout,
            poll_interval=poll_interval,
        )
    except ServiceUnreachable as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(emit_report(report, fmt), nl=False)
    sys.exit(0 if report.all_terminal else 1)


if __name__ == "__main__":
    main()
