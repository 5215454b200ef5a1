import numpy as np
import pytest

from colabel.noise import (
    NoiseSpec,
    build_transition,
    confusion_matrix,
    default_asymmetric_pairs,
    inject_noise,
    row_normalize,
)
from colabel.rng import SeededRng


class TestBuildTransition:
    def test_symmetric_values(self):
        t = build_transition(NoiseSpec("symmetric", 0.3), 3)
        expected = np.array([[0.7, 0.15, 0.15], [0.15, 0.7, 0.15], [0.15, 0.15, 0.7]])
        assert np.allclose(t, expected, atol=1e-15)

    def test_pairwise_values(self):
        t = build_transition(NoiseSpec("pairwise", 0.45), 3)
        expected = np.array([[0.55, 0.45, 0.0], [0.0, 0.55, 0.45], [0.45, 0.0, 0.55]])
        assert np.allclose(t, expected, atol=1e-15)

    def test_asymmetric_values(self):
        t = build_transition(NoiseSpec("asymmetric", 0.2, pairs=((1, 0), (3, 2))), 4)
        expected = np.array(
            [[1, 0, 0, 0], [0.2, 0.8, 0, 0], [0, 0, 1, 0], [0, 0, 0.2, 0.8]]
        )
        assert np.allclose(t, expected, atol=1e-15)

    def test_rows_stochastic(self):
        for spec in (
            NoiseSpec("symmetric", 0.5),
            NoiseSpec("pairwise", 0.45),
            NoiseSpec("asymmetric", 0.4),
        ):
            for c in (2, 3, 10):
                t = build_transition(spec, c)
                assert np.abs(t.sum(axis=1) - 1.0).max() <= 1e-12
                assert t.min() >= 0.0 and t.max() <= 1.0

    def test_default_pairs(self):
        assert default_asymmetric_pairs(4) == ((1, 0), (3, 2))
        assert default_asymmetric_pairs(5) == ((1, 0), (3, 2))

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            NoiseSpec("symmetric", 1.0)
        with pytest.raises(ValueError):
            NoiseSpec("typo", 0.2)
        with pytest.raises(ValueError):
            NoiseSpec("asymmetric", 0.2, pairs=((1, 1),))
        with pytest.raises(ValueError):
            NoiseSpec("asymmetric", 0.2, pairs=((1, 0), (1, 2)))
        with pytest.raises(ValueError):
            NoiseSpec("pairwise", 0.2, pairs=((1, 0),))
        with pytest.raises(ValueError):
            build_transition(NoiseSpec("symmetric", 0.2), 1)
        with pytest.raises(ValueError):
            build_transition(NoiseSpec("asymmetric", 0.2, pairs=((7, 0),)), 4)


class TestInjectNoise:
    def test_identity_is_noop(self):
        labels = SeededRng(0, "labels").integers(0, 5, 1000)
        noisy = inject_noise(labels, np.eye(5), SeededRng(1, "noise"))
        assert np.array_equal(noisy, labels)

    def test_deterministic(self):
        labels = SeededRng(0, "labels").integers(0, 5, 500)
        t = build_transition(NoiseSpec("symmetric", 0.4), 5)
        a = inject_noise(labels, t, SeededRng(9, "noise"))
        b = inject_noise(labels, t, SeededRng(9, "noise"))
        assert np.array_equal(a, b)

    def test_corruption_rate_within_3_sigma(self):
        n, r = 50000, 0.5
        labels = SeededRng(2, "labels").integers(0, 10, n)
        t = build_transition(NoiseSpec("symmetric", r), 10)
        noisy = inject_noise(labels, t, SeededRng(3, "noise"))
        corrupted = float(np.mean(noisy != labels))
        assert abs(corrupted - r) <= 0.01  # 3 sigma ~ 0.0067

    def test_empirical_confusion_matches_transition(self):
        n, c = 40000, 4
        labels = SeededRng(4, "labels").integers(0, c, n)
        t = build_transition(NoiseSpec("pairwise", 0.45), c)
        noisy = inject_noise(labels, t, SeededRng(5, "noise"))
        counts = confusion_matrix(labels, noisy, c)
        rows = counts.sum(axis=1)
        empirical = row_normalize(counts)
        sigma = np.sqrt(t * (1 - t) / rows[:, None])
        assert np.all(np.abs(empirical - t) <= 3 * sigma + 1e-12)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            inject_noise(np.array([5]), np.eye(3), SeededRng(0, "x"))


class TestConfusionMatrix:
    def test_identical_labels_diagonal(self):
        y = np.array([0, 1, 2, 1, 0])
        m = confusion_matrix(y, y, 3)
        assert np.array_equal(m, np.diag([2, 2, 1]))

    def test_total_count_conserved(self):
        a = SeededRng(6, "a").integers(0, 4, 333)
        b = SeededRng(7, "b").integers(0, 4, 333)
        assert confusion_matrix(a, b, 4).sum() == 333

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion_matrix(np.array([0, 1]), np.array([0]), 2)

    def test_row_normalize_zero_rows(self):
        m = np.array([[2, 2], [0, 0]])
        norm = row_normalize(m)
        assert np.allclose(norm[0], [0.5, 0.5])
        assert np.all(norm[1] == 0.0)
