"""Figure output for evaluation reports and training runs.

Rendering always goes to files (Agg backend); nothing here opens a window,
so the CLI stays usable on headless machines.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import DomainError
from .harness import CoverageReport


def save_coverage_figure(report: CoverageReport, path: str | Path) -> Path:
    """Bar chart of coverage per explanation kind, support printed above
    each bar ("-" where undefined)."""
    path = Path(path)
    kinds = [r.kind for r in report.rows]
    percentages = [100.0 * r.coverage for r in report.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(kinds, percentages, color="#4878a8")
    for bar, row in zip(bars, report.rows):
        ax.annotate(
            row.support_text,
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center",
            va="bottom",
            fontsize=9,
        )
    ax.set_ylabel("coverage (%)")
    ax.set_ylim(0, 105)
    ax.set_title("explanation coverage by kind")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_loss_figure(losses: Sequence[float], path: str | Path) -> Path:
    """Line plot of the per-epoch training loss."""
    if not losses:
        raise DomainError("cannot plot an empty loss curve")
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(len(losses)), losses, color="#a85448")
    ax.set_xlabel("epoch")
    ax.set_ylabel("margin loss")
    ax.set_title("training loss")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
