"""Matplotlib figures written next to the CSV/JSON reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .simulate import SimMetrics  # noqa: E402

_METADATA = {"Software": None}


def plot_simulation(metrics: SimMetrics, path: Path | str, title: str = "", compare: SimMetrics | None = None) -> Path:
    """Loss, malicious probability and cohort reputation per epoch.

    ``compare`` overlays a second run (dashed), typically the anonymous regime.
    """
    epochs = range(len(metrics.loss))
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    axes[0].plot(epochs, metrics.loss, label="loss")
    axes[1].plot(epochs, metrics.p_m, label="mean p_m (trolls)")
    axes[2].plot(epochs, metrics.rep_honest, label="honest")
    axes[2].plot(epochs, metrics.rep_troll, label="troll")
    if compare is not None:
        axes[0].plot(epochs, compare.loss, "--", label="loss (compare)")
        axes[1].plot(epochs, compare.p_m, "--", label="p_m (compare)")
    axes[0].set_ylabel("epistemic loss")
    axes[1].set_ylabel("p_m")
    axes[2].set_ylabel("mean trust")
    axes[2].set_xlabel("epoch")
    for ax in axes:
        ax.legend(loc="best", fontsize=8)
        ax.grid(alpha=0.3)
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100, metadata=_METADATA)
    plt.close(fig)
    return path


def plot_scores(report: dict, path: Path | str) -> Path:
    """Horizontal bar chart of one score report."""
    scores = report["scores"]
    names = list(scores)
    fig, ax = plt.subplots(figsize=(7, 0.35 * len(names) + 1.2))
    ax.barh(names, [scores[n] for n in names])
    ax.invert_yaxis()
    ax.set_title(f"{report['kind']} {report['subject'][:12]}")
    ax.grid(axis="x", alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100, metadata=_METADATA)
    plt.close(fig)
    return path
