import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from colabel import NoiseSpec, SeededRng, build_transition, gen_gaussian_blobs, inject_noise, train_test_split


def make_noisy_blobs(seed=7, classes=4, per_class=150, dim=8, separation=8.0,
                     noise_kind="symmetric", ratio=0.3):
    """Small separable dataset with injected label noise, split 3:1."""
    full = gen_gaussian_blobs(classes, per_class, dim, separation, SeededRng(seed, "data/gen"))
    train, test = train_test_split(full, 0.25, SeededRng(seed, "data/split"))
    if ratio > 0:
        t = build_transition(NoiseSpec(noise_kind, ratio), classes)
        noisy = inject_noise(train.clean_labels, t, SeededRng(seed, "noise/inject"))
        train = train.with_noisy_labels(noisy)
    return train, test


@pytest.fixture(scope="session")
def noisy_blobs():
    return make_noisy_blobs()


@pytest.fixture(scope="session")
def clean_blobs():
    # near-separable: a fresh Standard run reaches >= 0.99 test accuracy
    return make_noisy_blobs(ratio=0.0, dim=4, separation=10.0)
