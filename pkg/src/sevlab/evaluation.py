"""Confusion matrices, per-class metrics, report rendering, and the
arithmetic-consistency validator for published metric tables.

Metric conventions: precision = TP/(TP+FP), recall = TP/(TP+FN),
F1 = 2PR/(P+R), with every 0/0 defined as 0. Text reports mirror the
class-by-metric table layout with models as columns and two decimal
places; machine reports carry full precision plus macro averages.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "ConfusionMatrix",
    "EvalReport",
    "EvaluationError",
    "confusion",
    "metrics",
    "render_report",
    "machine_report_lines",
    "validate_report_consistency",
    "load_reference_table",
]


class EvaluationError(ValueError):
    """Raised for mismatched inputs or inconsistent report sets."""


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # rows = true class, columns = predicted

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


@dataclass(frozen=True)
class EvalReport:
    model: str
    language: str
    classes: tuple[str, ...]
    precision: dict[str, float] = field(default_factory=dict)
    recall: dict[str, float] = field(default_factory=dict)
    f1: dict[str, float] = field(default_factory=dict)
    accuracy: float = 0.0
    sample_count: int = 0


def confusion(y_true: list[str], y_pred: list[str], classes: list[str]) -> ConfusionMatrix:
    """Count (true, predicted) label pairs."""
    if len(y_true) != len(y_pred):
        raise EvaluationError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if not y_true:
        raise EvaluationError("cannot build a confusion matrix from empty inputs")
    index = {c: i for i, c in enumerate(classes)}
    grid = [[0] * len(classes) for _ in classes]
    for t, p in zip(y_true, y_pred):
        if t not in index or p not in index:
            unknown = t if t not in index else p
            raise EvaluationError(f"label {unknown!r} not in class list {list(classes)}")
        grid[index[t]][index[p]] += 1
    return ConfusionMatrix(classes=tuple(classes), counts=tuple(tuple(row) for row in grid))


def _safe_div(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def metrics(cm: ConfusionMatrix, model: str = "", language: str = "") -> EvalReport:
    """Per-class precision/recall/F1 and overall accuracy from a matrix."""
    if cm.total == 0:
        raise EvaluationError("confusion matrix has no samples")
    precision: dict[str, float] = {}
    recall: dict[str, float] = {}
    f1: dict[str, float] = {}
    for i, cls in enumerate(cm.classes):
        tp = cm.counts[i][i]
        fp = sum(cm.counts[r][i] for r in range(len(cm.classes))) - tp
        fn = sum(cm.counts[i]) - tp
        p = _safe_div(tp, tp + fp)
        r = _safe_div(tp, tp + fn)
        precision[cls] = p
        recall[cls] = r
        f1[cls] = _safe_div(2 * p * r, p + r)
    accuracy = sum(cm.counts[i][i] for i in range(len(cm.classes))) / cm.total
    return EvalReport(
        model=model,
        language=language,
        classes=cm.classes,
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=accuracy,
        sample_count=cm.total,
    )


def render_report(reports: list[EvalReport], format: str = "text") -> str:
    """Render reports as a fixed-width table ("text") or JSONL ("machine")."""
    if not reports:
        raise EvaluationError("nothing to render")
    classes = reports[0].classes
    for report in reports[1:]:
        if report.classes != classes:
            raise EvaluationError(
                f"class lists differ: {list(classes)} vs {list(report.classes)}"
            )
    if format == "machine":
        return "\n".join(machine_report_lines(reports)) + "\n"
    if format != "text":
        raise EvaluationError(f"unknown report format {format!r}")

    models = [r.model or f"model{i}" for i, r in enumerate(reports)]
    label_width = max(12, max(len(c) for c in classes) + 2)
    col_width = max(10, max(len(m) for m in models) + 2)
    lines = []
    header = " " * (label_width + 11)
    header += "".join(m.rjust(col_width) for m in models)
    lines.append(header)
    lines.append("-" * len(header))
    for cls in classes:
        for metric_name, getter in (
            ("Precision", lambda r, c=cls: r.precision[c]),
            ("Recall", lambda r, c=cls: r.recall[c]),
            ("F-1", lambda r, c=cls: r.f1[c]),
        ):
            row = cls.ljust(label_width) if metric_name == "Precision" else " " * label_width
            row += metric_name.ljust(11)
            row += "".join(f"{getter(r):.2f}".rjust(col_width) for r in reports)
            lines.append(row)
        lines.append("-" * len(header))
    row = "Accuracy".ljust(label_width) + " " * 11
    row += "".join(f"{r.accuracy:.2f}".rjust(col_width) for r in reports)
    lines.append(row)
    return "\n".join(lines) + "\n"


def machine_report_lines(reports: list[EvalReport]) -> list[str]:
    """Full-precision JSONL: one record per class, then accuracy and macro."""
    lines = []
    for r in reports:
        for cls in r.classes:
            lines.append(
                json.dumps(
                    {
                        "model": r.model,
                        "language": r.language,
                        "class": cls,
                        "precision": r.precision[cls],
                        "recall": r.recall[cls],
                        "f1": r.f1[cls],
                    },
                    sort_keys=True,
                )
            )
        lines.append(
            json.dumps(
                {
                    "model": r.model,
                    "language": r.language,
                    "accuracy": r.accuracy,
                    "samples": r.sample_count,
                },
                sort_keys=True,
            )
        )
        n = len(r.classes)
        lines.append(
            json.dumps(
                {
                    "model": r.model,
                    "language": r.language,
                    "macro_precision": sum(r.precision.values()) / n,
                    "macro_recall": sum(r.recall.values()) / n,
                    "macro_f1": sum(r.f1.values()) / n,
                },
                sort_keys=True,
            )
        )
    return lines


def validate_report_consistency(
    rows: list[tuple[float, float, float]], tolerance: float = 0.02
) -> list[bool]:
    """Flag rows whose printed F1 cannot follow from the printed P and R.

    Each input is assumed rounded to 2 decimals, so P and R carry a
    +/-0.005 halo; a row is flagged when the reported F1 is further than
    the tolerance from every F1 attainable inside that halo.
    """
    flags = []
    for p, r, f in rows:
        lo = _harmonic(max(p - 0.005, 0.0), max(r - 0.005, 0.0))
        hi = _harmonic(min(p + 0.005, 1.0), min(r + 0.005, 1.0))
        gap = max(lo - f, f - hi, 0.0)
        flags.append(gap > tolerance)
    return flags


def _harmonic(p: float, r: float) -> float:
    return _safe_div(2 * p * r, p + r)


def load_reference_table(path: str | Path) -> list[dict]:
    """Read a published-metrics CSV (language, model, class, precision,
    recall, f1) into one dict per row."""
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            {
                "language": row["language"],
                "model": row["model"],
                "class": row["class"],
                "precision": float(row["precision"]),
                "recall": float(row["recall"]),
                "f1": float(row["f1"]),
            }
            for row in csv.DictReader(fh)
        ]
