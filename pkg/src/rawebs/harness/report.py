"""Scenario report rendering: structured text, TSV event logs, and figures.

The text form is deterministic byte-for-byte for a given set of reports, so
two runs with the same seed produce identical files. Figures are rendered
with the Agg backend straight to PNG files next to the report.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional, Sequence

from .scenarios import ScenarioReport

EVENT_HEADER = "time\tactor\taction\tdetail"


def render_report(report: ScenarioReport) -> str:
    """One structured text document for one scenario."""
    lines = [
        f"=== scenario: {report.scenario} ===",
        f"outcome: {report.outcome}",
        f"detection_latency: {report.detection_latency if report.detection_latency is not None else '-'}",
        f"undetected_window: {report.undetected_window if report.undetected_window is not None else '-'}",
        f"notifications_delivered: {report.notifications_delivered}",
        f"events: {len(report.events)}",
        EVENT_HEADER,
    ]
    lines.extend(event.tsv() for event in report.events)
    return "\n".join(lines) + "\n"


def render_reports(reports: Sequence[ScenarioReport]) -> str:
    return "\n".join(render_report(report) for report in reports)


def write_report(reports: Sequence[ScenarioReport], path: Optional[Path] = None) -> str:
    """Render all reports; write to `path` when given, else return only."""
    text = render_reports(reports)
    if path is not None:
        Path(path).write_text(text)
    return text


def _scenario_colors(names: Iterable[str]) -> dict:
    palette = [
        "#2a9d8f", "#e76f51", "#264653", "#e9c46a", "#8ab17d", "#6a4c93", "#c0392b",
    ]
    return {name: palette[i % len(palette)] for i, name in enumerate(names)}


def render_figures(reports: Sequence[ScenarioReport], stem: Path) -> list[Path]:
    """Render a timeline and a latency chart as <stem>_timeline.png etc."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    outputs = []

    names = [report.scenario for report in reports]
    colors = _scenario_colors(names)

    # Timeline: one lane per scenario, one marker per event (relative time).
    fig, ax = plt.subplots(figsize=(10, 0.6 * max(len(reports), 2) + 1.5))
    for lane, report in enumerate(reports):
        if not report.events:
            continue
        t0 = report.events[0].time
        times = [event.time - t0 for event in report.events]
        ax.scatter(times, [lane] * len(times), s=18, color=colors[report.scenario])
        ax.hlines(lane, times[0], times[-1], color=colors[report.scenario], alpha=0.3)
    ax.set_yticks(range(len(reports)))
    ax.set_yticklabels(names)
    ax.set_xlabel("simulated seconds since scenario start")
    ax.set_title("Scenario event timelines")
    ax.grid(axis="x", alpha=0.3)
    fig.tight_layout()
    timeline_path = stem.parent / f"{stem.name}_timeline.png"
    fig.savefig(timeline_path, dpi=110)
    plt.close(fig)
    outputs.append(timeline_path)

    # Latency: detection latency or undetected window per scenario.
    fig, ax = plt.subplots(figsize=(8, 4.5))
    bars, values, labels = [], [], []
    for report in reports:
        value = (
            report.detection_latency
            if report.detection_latency is not None
            else report.undetected_window
        )
        if value is None:
            continue
        bars.append(report.scenario)
        values.append(value)
        labels.append(
            "detection latency" if report.detection_latency is not None else "undetected window"
        )
    if bars:
        positions = range(len(bars))
        ax.bar(positions, values, color=[colors[name] for name in bars])
        ax.set_xticks(list(positions))
        ax.set_xticklabels(bars, rotation=20, ha="right")
        for position, value, label in zip(positions, values, labels):
            ax.annotate(
                f"{value}s\n({label})",
                (position, value),
                ha="center",
                va="bottom",
                fontsize=8,
            )
    ax.set_ylabel("simulated seconds")
    ax.set_title("Detection latency / undetected window per scenario")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    latency_path = stem.parent / f"{stem.name}_latency.png"
    fig.savefig(latency_path, dpi=110)
    plt.close(fig)
    outputs.append(latency_path)

    return outputs
