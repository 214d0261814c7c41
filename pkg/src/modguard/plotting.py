"""Figures for ``modguard report``."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .conflicts import ConflictReport  # noqa: E402

_PNG_META = {"Software": None}


def plot_pattern_counts(report: ConflictReport, path: str | Path) -> Path:
    labels = list(report.counts)
    values = [report.counts[k] for k in labels]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    bars = ax.bar(labels, values, color=["#4c72b0", "#dd8452", "#55a868"][: len(labels)])
    ax.bar_label(bars)
    ax.set_ylabel("findings")
    ax.set_title("Conflicts by pattern")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=100, metadata=_PNG_META)
    plt.close(fig)
    return out


def plot_top_paths(report: ConflictReport, path: str | Path) -> Path:
    items = list(reversed(report.top_paths))
    fig, ax = plt.subplots(figsize=(6, max(2.0, 0.35 * len(items) + 1)))
    if items:
        ax.barh([p for p, _ in items], [n for _, n in items], color="#4c72b0")
    ax.set_xlabel("packages involved")
    ax.set_title("Most shared conflicting paths")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=100, metadata=_PNG_META)
    plt.close(fig)
    return out
