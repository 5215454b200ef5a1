"""Entropy thresholding: the trusted/untrusted split of a mini-batch.

Positions whose prediction entropy is at most the threshold are supervised by
the predictions themselves (soft rows by default); the rest keep their
original one-hot labels.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .net import MlpNetwork, forward

__all__ = [
    "BatchPartition",
    "GammaPolicy",
    "partition_by_entropy",
    "estimate_gamma",
    "EntropyGapStats",
    "entropy_gap_stats",
]


@dataclass(frozen=True)
class BatchPartition:
    low_indices: np.ndarray
    low_targets: np.ndarray  # row-stochastic supervision for the low set
    high_indices: np.ndarray
    high_targets: np.ndarray  # one-hot original labels for the high set

    @property
    def batch_size(self):
        return self.low_indices.size + self.high_indices.size


@dataclass(frozen=True)
class GammaPolicy:
    mode: str  # "auto" | "fixed"
    value: float = None

    def __post_init__(self):
        if self.mode not in ("auto", "fixed"):
            raise ValueError(f"gamma mode must be 'auto' or 'fixed', got {self.mode!r}")
        if self.mode == "fixed":
            if self.value is None or not np.isfinite(self.value):
                raise ValueError("fixed gamma requires a finite value")


def partition_by_entropy(probs, noisy_onehot, gamma, hard_targets=False) -> BatchPartition:
    """Split batch positions at H <= gamma (boundary inclusive on the low side)."""
    p = kernels.as_matrix(probs, "probs")
    y = kernels.as_matrix(noisy_onehot, "noisy_onehot")
    if p.shape != y.shape:
        raise ValueError(f"partition_by_entropy: shape mismatch {p.shape} vs {y.shape}")
    if not np.isfinite(gamma):
        raise ValueError("partition_by_entropy: gamma must be finite")
    h = kernels.shannon_entropy_rows(p)
    low_mask = h <= gamma
    low = np.flatnonzero(low_mask)
    high = np.flatnonzero(~low_mask)
    if hard_targets and low.size:
        low_targets = kernels.one_hot(kernels.argmax_rows(p[low]), p.shape[1])
    else:
        low_targets = p[low]
    return BatchPartition(low, low_targets, high, y[high])


def estimate_gamma(net: MlpNetwork, X, chunk=4096) -> float:
    """Mean prediction entropy of the network over all rows of X."""
    X = kernels.as_matrix(X, "X")
    if X.shape[0] < 1:
        raise ValueError("estimate_gamma: empty feature matrix")
    total = 0.0
    for start in range(0, X.shape[0], chunk):
        logits, _ = forward(net, X[start : start + chunk])
        total += kernels.shannon_entropy_rows(kernels.softmax_rows(logits)).sum()
    return float(total / X.shape[0])


@dataclass(frozen=True)
class EntropyGapStats:
    mean_correct: Optional[float]
    mean_incorrect: Optional[float]
    mean_all: float


def entropy_gap_stats(probs, clean_labels) -> EntropyGapStats:
    """Mean prediction entropy split by correctness against clean labels."""
    p = kernels.as_matrix(probs, "probs")
    y = np.asarray(clean_labels, dtype=np.int64)
    if y.ndim != 1 or y.size != p.shape[0]:
        raise ValueError(f"entropy_gap_stats: {p.shape[0]} rows vs {y.size} labels")
    h = kernels.shannon_entropy_rows(p)
    correct = kernels.argmax_rows(p) == y
    mean_correct = float(h[correct].mean()) if correct.any() else None
    mean_incorrect = float(h[~correct].mean()) if (~correct).any() else None
    return EntropyGapStats(mean_correct, mean_incorrect, float(h.mean()))
