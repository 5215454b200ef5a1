"""Label-noise transition matrices, corruption, and confusion matrices."""

from dataclasses import dataclass

import numpy as np

from .rng import SeededRng

__all__ = [
    "NoiseSpec",
    "default_asymmetric_pairs",
    "build_transition",
    "inject_noise",
    "confusion_matrix",
    "row_normalize",
]

NOISE_KINDS = ("symmetric", "pairwise", "asymmetric")


def default_asymmetric_pairs(n_classes):
    """Confusable-pair default: each odd class flips toward its even neighbor."""
    return tuple((2 * k + 1, 2 * k) for k in range((n_classes) // 2))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    ratio: float
    pairs: tuple = None  # asymmetric only; (source, destination) pairs
    seed: int = None  # overrides the experiment seed for injection when set

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not (0.0 <= self.ratio < 1.0):
            raise ValueError(f"noise ratio must be in [0, 1), got {self.ratio}")
        if self.pairs is not None:
            if self.kind != "asymmetric":
                raise ValueError("pairs are only valid for asymmetric noise")
            pairs = tuple((int(s), int(d)) for s, d in self.pairs)
            sources = [s for s, _ in pairs]
            if len(set(sources)) != len(sources):
                raise ValueError("asymmetric pairs must have distinct sources")
            if any(s == d for s, d in pairs):
                raise ValueError("asymmetric pairs must flip to a different class")
            object.__setattr__(self, "pairs", pairs)


def build_transition(spec: NoiseSpec, n_classes: int) -> np.ndarray:
    """Row-stochastic c x c matrix T with T[i][j] = P(noisy=j | clean=i)."""
    c = int(n_classes)
    if c < 2:
        raise ValueError(f"build_transition: need >= 2 classes, got {c}")
    r = spec.ratio
    if spec.kind == "symmetric":
        t = np.full((c, c), r / (c - 1))
        np.fill_diagonal(t, 1.0 - r)
    elif spec.kind == "pairwise":
        t = np.zeros((c, c))
        for i in range(c):
            t[i, i] = 1.0 - r
            t[i, (i + 1) % c] = r
    else:  # asymmetric
        pairs = spec.pairs if spec.pairs is not None else default_asymmetric_pairs(c)
        t = np.eye(c)
        for s, d in pairs:
            if not (0 <= s < c and 0 <= d < c):
                raise ValueError(f"asymmetric pair ({s}, {d}) outside [0, {c})")
            t[s, s] = 1.0 - r
            t[s, d] = r
    return t


def inject_noise(clean_labels, transition, rng: SeededRng) -> np.ndarray:
    """Draw each noisy label from the transition row of its clean label."""
    y = np.asarray(clean_labels, dtype=np.int64)
    t = np.asarray(transition, dtype=np.float64)
    c = t.shape[0]
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError("inject_noise: transition must be square")
    if y.size and (y.min() < 0 or y.max() >= c):
        raise ValueError(f"inject_noise: labels outside [0, {c})")
    cum = np.cumsum(t, axis=1)
    u = rng.uniform(y.size)
    noisy = (cum[y] <= u[:, None]).sum(axis=1)
    return np.minimum(noisy, c - 1).astype(np.int64)


def confusion_matrix(labels_a, labels_b, n_classes) -> np.ndarray:
    """counts[i][j] = #{n : a_n = i and b_n = j}."""
    a = np.asarray(labels_a, dtype=np.int64)
    b = np.asarray(labels_b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"confusion_matrix: length mismatch {a.shape} vs {b.shape}")
    c = int(n_classes)
    for name, lab in (("labels_a", a), ("labels_b", b)):
        if lab.size and (lab.min() < 0 or lab.max() >= c):
            raise ValueError(f"confusion_matrix: {name} outside [0, {c})")
    return np.bincount(a * c + b, minlength=c * c).reshape(c, c)


def row_normalize(counts) -> np.ndarray:
    """Rows scaled to sum to 1; all-zero rows stay zero."""
    m = np.asarray(counts, dtype=np.float64)
    sums = m.sum(axis=1, keepdims=True)
    return np.divide(m, sums, out=np.zeros_like(m), where=sums > 0)
