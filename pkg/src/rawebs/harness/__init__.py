from .push_inbox import PushInbox
from .report import render_figures, render_report, render_reports, write_report
from .scenarios import (
    SCENARIO_NAMES,
    ScenarioEvent,
    ScenarioFailure,
    ScenarioReport,
    ScenarioSpec,
    run_all,
    run_scenario,
)

__all__ = [
    "PushInbox",
    "SCENARIO_NAMES",
    "ScenarioEvent",
    "ScenarioFailure",
    "ScenarioReport",
    "ScenarioSpec",
    "render_figures",
    "render_report",
    "render_reports",
    "run_all",
    "run_scenario",
    "write_report",
]
