"""Desk-scale datasets: synthetic generators and an IDX-format image loader.

Clean labels ride along for metrics only; training code goes through
`LabeledDataset.train_view()`, which exposes features and noisy labels but
not the ground truth.
"""

import struct
from dataclasses import dataclass, replace

import numpy as np

from .rng import SeededRng

__all__ = [
    "LabeledDataset",
    "TrainView",
    "IdxFormatError",
    "gen_gaussian_blobs",
    "gen_rings",
    "load_idx",
    "train_test_split",
]

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainView:
    """What trainers are allowed to see: no clean labels."""

    features: np.ndarray
    noisy_labels: np.ndarray
    n_classes: int

    @property
    def n(self):
        return self.features.shape[0]


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    clean_labels: np.ndarray  # metric-only; trainers never receive these
    noisy_labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ValueError("features must be 2-D")
        n = self.features.shape[0]
        if self.clean_labels.shape != (n,) or self.noisy_labels.shape != (n,):
            raise ValueError("label arrays must match the number of feature rows")
        for name, lab in (("clean", self.clean_labels), ("noisy", self.noisy_labels)):
            if lab.size and (lab.min() < 0 or lab.max() >= self.n_classes):
                raise ValueError(f"{name} labels outside [0, {self.n_classes})")
        if not np.isfinite(self.features).all():
            raise ValueError("features must be finite")

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def train_view(self) -> TrainView:
        return TrainView(self.features, self.noisy_labels, self.n_classes)

    def with_noisy_labels(self, noisy) -> "LabeledDataset":
        return replace(self, noisy_labels=np.asarray(noisy, dtype=np.int64))


def _standardize(X):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return (X - mean) / np.maximum(std, 1e-12)


def _clean_dataset(X, labels, n_classes):
    labels = labels.astype(np.int64)
    return LabeledDataset(X, labels, labels.copy(), n_classes)


def gen_gaussian_blobs(n_classes, n_per_class, dim, separation, rng: SeededRng) -> LabeledDataset:
    """Unit-variance Gaussian clusters with means on a circle in the first two
    dims, adjacent means `separation` apart; remaining dims are pure noise."""
    c, m, d = int(n_classes), int(n_per_class), int(dim)
    if c < 2 or d < 2 or m < 1:
        raise ValueError("gen_gaussian_blobs: need c >= 2, dim >= 2, n_per_class >= 1")
    radius = separation / (2.0 * np.sin(np.pi / c))
    angles = 2.0 * np.pi * np.arange(c) / c
    means = np.zeros((c, d))
    means[:, 0] = radius * np.cos(angles)
    means[:, 1] = radius * np.sin(angles)
    labels = np.repeat(np.arange(c), m)
    X = means[labels] + rng.normal((c * m, d))
    return _clean_dataset(_standardize(X), labels, c)


def gen_rings(n_classes, n_per_class, noise_std, rng: SeededRng) -> LabeledDataset:
    """Concentric 2-D rings (class k at radius k+1) with radial jitter."""
    c, m = int(n_classes), int(n_per_class)
    if c < 2 or m < 1:
        raise ValueError("gen_rings: need c >= 2, n_per_class >= 1")
    labels = np.repeat(np.arange(c), m)
    radius = (labels + 1.0) + noise_std * rng.normal(c * m)
    theta = 2.0 * np.pi * rng.uniform(c * m)
    X = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
    return _clean_dataset(_standardize(X), labels, c)


def _read_be32(f, path, what):
    raw = f.read(4)
    if len(raw) != 4:
        raise IdxFormatError(f"{path}: truncated {what}")
    return struct.unpack(">I", raw)[0]


def _read_idx_images(path):
    with open(path, "rb") as f:
        magic = _read_be32(f, path, "magic")
        if magic != IDX_IMAGE_MAGIC:
            raise IdxFormatError(f"{path}: bad image magic 0x{magic:08x}")
        count = _read_be32(f, path, "count")
        rows = _read_be32(f, path, "rows")
        cols = _read_be32(f, path, "cols")
        raw = f.read(count * rows * cols)
        if len(raw) != count * rows * cols:
            raise IdxFormatError(f"{path}: truncated pixel data ({len(raw)} bytes)")
        return np.frombuffer(raw, dtype=np.uint8).reshape(count, rows * cols)


def _read_idx_labels(path):
    with open(path, "rb") as f:
        magic = _read_be32(f, path, "magic")
        if magic != IDX_LABEL_MAGIC:
            raise IdxFormatError(f"{path}: bad label magic 0x{magic:08x}")
        count = _read_be32(f, path, "count")
        raw = f.read(count)
        if len(raw) != count:
            raise IdxFormatError(f"{path}: truncated label data ({len(raw)} bytes)")
        return np.frombuffer(raw, dtype=np.uint8)


def load_idx(images_path, labels_path, max_n=None) -> LabeledDataset:
    """Load an IDX image/label pair as a clean dataset, pixels scaled to [0,1]."""
    pixels = _read_idx_images(images_path)
    labels = _read_idx_labels(labels_path)
    if pixels.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"count mismatch: {pixels.shape[0]} images vs {labels.shape[0]} labels"
        )
    n_classes = int(labels.max()) + 1 if labels.size else 0
    if n_classes < 2:
        raise IdxFormatError(f"{labels_path}: fewer than 2 classes present")
    if max_n is not None:
        pixels = pixels[: int(max_n)]
        labels = labels[: int(max_n)]
    X = pixels.astype(np.float64) / 255.0
    return _clean_dataset(X, labels.astype(np.int64), n_classes)


def train_test_split(dataset: LabeledDataset, test_fraction, rng: SeededRng):
    """Class-stratified disjoint split, deterministic under the rng stream."""
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    test_idx = []
    for k in range(dataset.n_classes):
        members = np.flatnonzero(dataset.clean_labels == k)
        perm = members[rng.permutation(members.size)]
        n_test = int(round(test_fraction * members.size))
        test_idx.append(perm[:n_test])
    test_idx = np.sort(np.concatenate(test_idx))
    mask = np.zeros(dataset.n, dtype=bool)
    mask[test_idx] = True
    train_idx = np.flatnonzero(~mask)

    def take(idx):
        return LabeledDataset(
            dataset.features[idx],
            dataset.clean_labels[idx],
            dataset.noisy_labels[idx],
            dataset.n_classes,
        )

    return take(train_idx), take(test_idx)
