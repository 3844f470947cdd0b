"""Consumption-chart rendering to image files.

Mirrors the interactive chart: recorded epochs as a solid line, the
extrapolated tail dashed with open markers, alternatives in a contrasting
dashed orange. Used by the CLI's report/whatif --figure flag.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .types import Metric, ProjectionSeries

_METRIC_LABEL = {Metric.KWH: "electricity (kWh)", Metric.CO2_LBS: "CO2 (lbs)"}

BASELINE_COLOR = "#1f77b4"
ALTERNATIVE_COLOR = "#ff7f0e"


def _plot_series(ax, series: ProjectionSeries, label: str, color: str) -> None:
    n = len(series.recorded)
    xs = list(range(n))
    ax.plot(xs, series.recorded, color=color, marker="o", markersize=4, label=label)
    if series.extrapolated:
        # join the dashed tail to the last recorded point
        tail_x = [n - 1] + list(range(n, n + len(series.extrapolated)))
        tail_y = [series.recorded[-1]] + list(series.extrapolated)
        ax.plot(
            tail_x,
            tail_y,
            color=color,
            linestyle="--",
            marker="o",
            markersize=4,
            markerfacecolor="white",
            label=f"{label} (predicted)",
        )


def render_consumption_chart(
    path: str | Path,
    baseline: ProjectionSeries,
    alternative: ProjectionSeries | None = None,
    title: str = "",
    baseline_label: str = "recorded",
    alternative_label: str = "alternative",
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    _plot_series(ax, baseline, baseline_label, BASELINE_COLOR)
    if alternative is not None:
        _plot_series(ax, alternative, alternative_label, ALTERNATIVE_COLOR)
    ax.set_xlabel("epoch")
    ax.set_ylabel(_METRIC_LABEL[baseline.metric])
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
