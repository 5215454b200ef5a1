"""Per-epoch metric records, their CSV serialization, and run summaries."""

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "EpochMetrics",
    "METHOD_COLUMNS",
    "supervision_precision",
    "summarize",
    "write_metrics_csv",
    "read_metrics_csv",
]

# Count semantics: n_selected for selection baselines is the per-epoch total
# over training batches; n_low_f / n_low_g come from the post-epoch evaluation
# pass. Loss columns are epoch means over training batches.
CSV_COMMENT = (
    "# n_selected: per-epoch total over training batches; n_low_*: post-epoch "
    "evaluation-pass counts; loss_*: epoch means over training batches"
)

_COMMON = (
    "epoch",
    "test_accuracy",
    "supervision_precision",
    "mean_entropy_correct",
    "mean_entropy_incorrect",
    "mean_entropy_all",
)
_CLC_LOSSES = ("loss_ce_low", "loss_ent_own", "loss_ce_high", "loss_total")

METHOD_COLUMNS = {
    "standard": _COMMON + ("loss_total",),
    "bootstrap": _COMMON + ("loss_total",),
    "forward": _COMMON + ("loss_total",),
    "co_distillation": _COMMON + ("loss_total",),
    "decouple": _COMMON + ("n_selected", "loss_total"),
    "self_paced": _COMMON + ("n_selected", "loss_total"),
    "co_teaching": _COMMON + ("n_selected", "loss_total"),
    "slc": _COMMON + ("n_low_f",) + _CLC_LOSSES,
    "clc": _COMMON + ("n_low_f", "n_low_g") + _CLC_LOSSES,
}

_INT_COLUMNS = {"epoch", "n_selected", "n_low_f", "n_low_g"}


@dataclass
class EpochMetrics:
    epoch: int
    test_accuracy: float
    supervision_precision: float
    mean_entropy_correct: Optional[float]
    mean_entropy_incorrect: Optional[float]
    mean_entropy_all: float
    n_selected: Optional[int] = None
    n_low_f: Optional[int] = None
    n_low_g: Optional[int] = None
    loss_ce_low: Optional[float] = None
    loss_ent_own: Optional[float] = None
    loss_ce_high: Optional[float] = None
    loss_total: Optional[float] = None


def supervision_precision(effective_targets, clean_labels) -> float:
    """Fraction of effective supervision labels that match the ground truth."""
    t = np.asarray(effective_targets, dtype=np.int64)
    y = np.asarray(clean_labels, dtype=np.int64)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError(f"supervision_precision: length mismatch {t.shape} vs {y.shape}")
    if t.size == 0:
        raise ValueError("supervision_precision: empty label arrays")
    return float(np.mean(t == y))


def summarize(history, last_k=10) -> dict:
    """Means of the headline metrics over the final last_k epochs."""
    if last_k < 1 or last_k > len(history):
        raise ValueError(f"last_k={last_k} outside [1, {len(history)}]")
    tail = history[-last_k:]

    def mean_of(field):
        vals = [getattr(m, field) for m in tail]
        if any(v is None for v in vals):
            return None
        return float(np.mean(vals))

    return {
        "last_k": int(last_k),
        "test_accuracy": mean_of("test_accuracy"),
        "supervision_precision": mean_of("supervision_precision"),
        "n_selected": mean_of("n_selected"),
        "n_low_f": mean_of("n_low_f"),
        "n_low_g": mean_of("n_low_g"),
    }


def _format_cell(column, value):
    if value is None:
        return "nan"
    if column in _INT_COLUMNS:
        return str(int(value))
    return f"{float(value):.6f}"


def write_metrics_csv(path, history, method):
    columns = METHOD_COLUMNS[method]
    with open(path, "w", newline="") as f:
        f.write(CSV_COMMENT + "\n")
        writer = csv.writer(f)
        writer.writerow(columns)
        for m in history:
            writer.writerow([_format_cell(c, getattr(m, c)) for c in columns])


def read_metrics_csv(path):
    """Parse an emitted metrics.csv back into (columns, EpochMetrics list)."""
    with open(path, newline="") as f:
        rows = [r for r in csv.reader(f) if r and not r[0].startswith("#")]
    columns = tuple(rows[0])
    history = []
    for row in rows[1:]:
        kwargs = {}
        for col, cell in zip(columns, row):
            if cell == "nan":
                kwargs[col] = None
            elif col in _INT_COLUMNS:
                kwargs[col] = int(cell)
            else:
                kwargs[col] = float(cell)
        history.append(EpochMetrics(**kwargs))
    return columns, history
