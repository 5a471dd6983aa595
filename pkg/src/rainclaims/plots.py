"""Figure rendering for the report paths.

Charts are written as SVG next to the delimited output. A fixed hash salt and
stripped date metadata keep the files diffable across runs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .pipeline import ProjectionResult  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "rainclaims"


def save_figure(fig, path: str | Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_delta_bars(results: Sequence[ProjectionResult], path: str | Path) -> None:
    """Grouped bars of the per-sub-period percentage changes, one panel for
    claims and one for losses."""
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    labels = [d.period.label for d in results[0].deltas] if results else []
    x = range(len(labels))
    width = 0.8 / max(1, len(results))
    for k, res in enumerate(results):
        offs = [i + (k - (len(results) - 1) / 2) * width for i in x]
        axes[0].bar(offs, [d.delta_claims_pct for d in res.deltas], width=width, label=res.scenario)
        axes[1].bar(offs, [d.delta_loss_pct for d in res.deltas], width=width, label=res.scenario)
    axes[0].set_ylabel("claims change (%)")
    axes[1].set_ylabel("loss change (%)")
    axes[1].set_xticks(list(x))
    axes[1].set_xticklabels(labels, rotation=30)
    axes[0].axhline(0.0, color="black", linewidth=0.8)
    axes[1].axhline(0.0, color="black", linewidth=0.8)
    if results:
        axes[0].legend(fontsize=8)
    fig.suptitle("Projected change vs control period")
    fig.tight_layout()
    save_figure(fig, path)


def render_fitted_series(
    week_starts: Sequence,
    observed,
    fitted_by_model: Mapping[str, object],
    ylabel: str,
    path: str | Path,
) -> None:
    """Observed weekly series with one fitted line per model."""
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(week_starts, observed, color="black", linewidth=1.0, label="observed")
    for name, fitted in fitted_by_model.items():
        ax.plot(week_starts, fitted, linewidth=0.9, alpha=0.85, label=name)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    fig.tight_layout()
    save_figure(fig, path)
