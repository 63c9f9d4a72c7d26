"""Figure rendering for evaluation reports.

Writes PNG files next to the delimited report output: one confusion
heatmap per model and a grouped per-class F1 bar chart per language.
Uses the Agg backend so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import ConfusionMatrix, EvalReport

__all__ = ["confusion_heatmap", "f1_bars", "render_figures"]


def confusion_heatmap(cm: ConfusionMatrix, title: str, path: str | Path) -> Path:
    """Render one confusion matrix as an annotated heatmap."""
    grid = np.asarray(cm.counts, dtype=float)
    fig, ax = plt.subplots(figsize=(4.5, 4))
    image = ax.imshow(grid, cmap="Blues")
    ax.set_xticks(range(len(cm.classes)), cm.classes, rotation=45, ha="right")
    ax.set_yticks(range(len(cm.classes)), cm.classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(title)
    threshold = grid.max() / 2 if grid.max() else 0.5
    for i in range(len(cm.classes)):
        for j in range(len(cm.classes)):
            color = "white" if grid[i, j] > threshold else "black"
            ax.text(j, i, f"{int(grid[i, j])}", ha="center", va="center", color=color)
    fig.colorbar(image, ax=ax, fraction=0.046)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def f1_bars(reports: list[EvalReport], title: str, path: str | Path) -> Path:
    """Grouped bar chart: per-class F1 for each model, accuracy in the legend."""
    classes = list(reports[0].classes)
    x = np.arange(len(classes))
    width = 0.8 / max(len(reports), 1)
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for k, report in enumerate(reports):
        values = [report.f1[c] for c in classes]
        offset = (k - (len(reports) - 1) / 2) * width
        ax.bar(x + offset, values, width, label=f"{report.model} (acc {report.accuracy:.2f})")
    ax.set_xticks(x, classes)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("F1")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_figures(
    reports: list[EvalReport],
    matrices: dict[str, ConfusionMatrix],
    out_dir: str | Path,
    prefix: str = "",
) -> list[Path]:
    """Write the standard figure set for one evaluation run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for model, cm in matrices.items():
        written.append(
            confusion_heatmap(
                cm, f"{prefix}{model}", out_dir / f"{prefix}confusion_{model}.png"
            )
        )
    if reports:
        written.append(
            f1_bars(reports, f"{prefix}per-class F1", out_dir / f"{prefix}f1_by_class.png")
        )
    return written
