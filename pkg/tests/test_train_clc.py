import math

import numpy as np
import pytest

from colabel import kernels
from colabel.net import backward, forward
from colabel.rng import SeededRng
from colabel.selection import GammaPolicy, partition_by_entropy
from colabel.train.baselines import BaselineConfig, train_standard
from colabel.train.clc import ClcConfig, _run, clc_batch_loss, train_clc, train_slc
from conftest import make_noisy_blobs
from gradcheck import numeric_logit_grad


def hand_case():
    """2-sample, 2-class batch with hand-set probabilities around gamma=0.6."""
    own = np.array([[0.9, 0.1], [0.6, 0.4]])
    partner = np.array([[0.8, 0.2], [0.55, 0.45]])
    onehot = np.array([[0.0, 1.0], [1.0, 0.0]])
    gamma = 0.6
    part_own = partition_by_entropy(own, onehot, gamma)
    part_partner = partition_by_entropy(partner, onehot, gamma)
    return own, partner, onehot, gamma, part_own, part_partner


class TestClcBatchLoss:
    def test_hand_computed_scalar_oracle(self):
        own, partner, onehot, gamma, part_own, part_partner = hand_case()
        # independent scalar evaluation: H(0.8,0.2)<=0.6 so partner row 0 is
        # low, row 1 high; same split for own probs
        assert part_partner.low_indices.tolist() == [0]
        assert part_own.low_indices.tolist() == [0]
        alpha, beta = 0.1, 0.5
        breakdown, grad = clc_batch_loss(own, part_partner, part_own, onehot, alpha, beta)
        ce_low = -(0.8 * math.log(0.9) + 0.2 * math.log(0.1))
        ent_own = -(0.9 * math.log(0.9) + 0.1 * math.log(0.1))
        ce_high = -math.log(0.6)
        assert abs(breakdown.ce_low - ce_low) <= 1e-12
        assert abs(breakdown.ent_own - ent_own) <= 1e-12
        assert abs(breakdown.ce_high - ce_high) <= 1e-12
        assert abs(breakdown.total - (ce_low + alpha * ent_own + beta * ce_high)) <= 1e-12
        assert grad.shape == (2, 2)

    def test_gradient_finite_difference(self):
        # partitions and their stored targets stay fixed while logits vary
        rng = SeededRng(0, "clc-fd")
        z = rng.normal((6, 3))
        probs0 = kernels.softmax_rows(z)
        onehot = kernels.one_hot(rng.integers(0, 3, 6), 3)
        gamma = 0.8
        part_own = partition_by_entropy(probs0, onehot, gamma)
        partner_probs = kernels.softmax_rows(rng.normal((6, 3)))
        part_partner = partition_by_entropy(partner_probs, onehot, gamma)
        alpha, beta = 0.1, 0.5

        def loss(zz):
            p = kernels.softmax_rows(zz)
            bd, _ = clc_batch_loss(p, part_partner, part_own, onehot, alpha, beta)
            return bd.total

        _, analytic = clc_batch_loss(probs0, part_partner, part_own, onehot, alpha, beta)
        numeric = numeric_logit_grad(loss, z)
        assert np.abs(analytic - numeric).max() <= 1e-6

    def test_empty_partner_low_degenerates_to_term3(self):
        rng = SeededRng(1, "clc-empty")
        p = kernels.softmax_rows(rng.normal((5, 4)))
        onehot = kernels.one_hot(rng.integers(0, 4, 5), 4)
        part = partition_by_entropy(p, onehot, -1.0)  # everything high
        beta = 0.5
        breakdown, grad = clc_batch_loss(p, part, part, onehot, 0.1, beta)
        assert breakdown.ce_low == 0.0
        assert breakdown.ent_own == 0.0
        assert abs(breakdown.total - beta * kernels.cross_entropy(onehot, p)) <= 1e-12
        expected = beta * kernels.softce_grad_logits(onehot, p)
        assert np.abs(grad - expected).max() <= 1e-12

    def test_one_hot_fixed_point(self):
        onehot = kernels.one_hot(np.array([0, 1, 2]), 3)
        part = partition_by_entropy(onehot, onehot, 0.5)
        assert part.low_indices.size == 3
        breakdown, grad = clc_batch_loss(onehot, part, part, onehot, 0.1, 0.5)
        assert breakdown.total == 0.0
        assert np.abs(grad).max() <= 1e-12

    def test_total_identity_random_batches(self):
        rng = SeededRng(2, "clc-identity")
        for _ in range(25):
            n, c = int(rng.integers(2, 20)), int(rng.integers(2, 6))
            p = kernels.softmax_rows(rng.normal((n, c)) * 2.0)
            q = kernels.softmax_rows(rng.normal((n, c)) * 2.0)
            onehot = kernels.one_hot(rng.integers(0, c, n), c)
            gamma = float(rng.uniform(1)[0]) * math.log(c)
            alpha, beta = float(rng.uniform(1)[0]), float(rng.uniform(1)[0])
            bd, _ = clc_batch_loss(
                p,
                partition_by_entropy(q, onehot, gamma),
                partition_by_entropy(p, onehot, gamma),
                onehot,
                alpha,
                beta,
            )
            assert abs(bd.total - (bd.ce_low + alpha * bd.ent_own + beta * bd.ce_high)) <= 1e-12

    def test_partition_size_mismatch(self):
        p = kernels.softmax_rows(np.zeros((3, 2)))
        onehot = kernels.one_hot(np.array([0, 1, 0]), 2)
        part = partition_by_entropy(p[:2], onehot[:2], 0.5)
        with pytest.raises(ValueError):
            clc_batch_loss(p, part, part, onehot, 0.1, 0.5)


class TestTrainClc:
    def test_deterministic_history(self, noisy_blobs):
        train, test = noisy_blobs
        cfg = ClcConfig(total_epochs=6, warm_up_epochs=2, seed=5, hidden_dims=(16,),
                        batch_size=64)
        h1, f1, g1 = train_clc(train, test, cfg)
        h2, f2, g2 = train_clc(train, test, cfg)
        assert [m.test_accuracy for m in h1] == [m.test_accuracy for m in h2]
        assert [m.n_low_f for m in h1] == [m.n_low_f for m in h2]
        for a, b in zip(f1.parameters() + g1.parameters(), f2.parameters() + g2.parameters()):
            assert np.array_equal(a, b)

    def test_exactly_one_correction_epoch(self, noisy_blobs):
        train, test = noisy_blobs
        cfg = ClcConfig(total_epochs=4, warm_up_epochs=3, seed=6, hidden_dims=(16,),
                        batch_size=64)
        history, _, _ = train_clc(train, test, cfg)
        assert [m.loss_ce_low is None for m in history] == [True, True, True, False]
        assert all(m.n_low_f == 0 for m in history[:3])

    def test_history_length_and_retention(self, noisy_blobs):
        train, test = noisy_blobs
        cfg = ClcConfig(total_epochs=5, warm_up_epochs=2, seed=7, hidden_dims=(16,),
                        batch_size=64)
        history, _, _ = train_clc(train, test, cfg)
        assert len(history) == 5
        # prediction selection retains every sample: low + high = n
        for m in history:
            assert 0 <= m.n_low_f <= train.n
            assert 0 <= m.n_low_g <= train.n

    def test_gamma_above_ln_c_alpha_zero_is_pure_codistillation(self, noisy_blobs):
        train, test = noisy_blobs
        gamma = math.log(train.n_classes) + 1.0
        cfg = ClcConfig(total_epochs=4, warm_up_epochs=1, seed=8, hidden_dims=(16,),
                        batch_size=64, alpha=0.0,
                        gamma_policy=GammaPolicy("fixed", gamma))
        history, _, _ = train_clc(train, test, cfg)
        post = history[1:]
        assert all(m.n_low_f == train.n and m.n_low_g == train.n for m in post)
        assert all(m.loss_ce_high == 0.0 for m in post)

    def test_stream_swap_symmetry(self, noisy_blobs):
        # exact f<->g swap needs a net-symmetric threshold, hence fixed gamma
        train, test = noisy_blobs
        cfg = ClcConfig(total_epochs=4, warm_up_epochs=1, seed=9, hidden_dims=(16,),
                        batch_size=64, gamma_policy=GammaPolicy("fixed", 0.7))
        state_a, _ = _run(train, test, cfg, dual=True, slots=("net0", "net1"))
        state_b, _ = _run(train, test, cfg, dual=True, slots=("net1", "net0"))
        for p, q in zip(state_a.f.parameters(), state_b.g.parameters()):
            assert np.array_equal(p, q)
        for p, q in zip(state_a.g.parameters(), state_b.f.parameters()):
            assert np.array_equal(p, q)

    def test_no_harm_on_clean_data(self, clean_blobs):
        train, test = clean_blobs
        ccfg = ClcConfig(total_epochs=50, warm_up_epochs=10, seed=10)
        bcfg = BaselineConfig(method="standard", epochs=50, warm_up_epochs=10, seed=10)
        clc_hist, _, _ = train_clc(train, test, ccfg)
        std_hist, _ = train_standard(train, test, bcfg)
        assert clc_hist[-1].test_accuracy >= std_hist[-1].test_accuracy - 0.01


class TestTrainSlc:
    def test_negative_gamma_matches_standard_argmax_trajectory(self, noisy_blobs):
        from colabel.train.common import predict_probs

        train, test = noisy_blobs
        # zero warm-up keeps Adam's history purely beta-scaled; mixed history
        # would break the scale invariance of m-hat / sqrt(v-hat)
        epochs, warm = 5, 0
        slc_cfg = ClcConfig(total_epochs=epochs, warm_up_epochs=warm, seed=11,
                            hidden_dims=(16,), batch_size=64,
                            gamma_policy=GammaPolicy("fixed", -1.0))
        std_cfg = BaselineConfig(method="standard", epochs=epochs, warm_up_epochs=warm,
                                 seed=11, hidden_dims=(16,), batch_size=64)

        slc_hist, slc_net = train_slc(train, test, slc_cfg)
        std_hist, std_net = train_standard(train, test, std_cfg)
        # beta-scaled CE leaves the Adam direction unchanged up to epsilon, so
        # the per-epoch accuracies and final hard predictions coincide
        assert [m.test_accuracy for m in slc_hist] == [m.test_accuracy for m in std_hist]
        assert np.array_equal(
            kernels.argmax_rows(predict_probs(slc_net, test.features)),
            kernels.argmax_rows(predict_probs(std_net, test.features)),
        )

    def test_slc_runs_and_reports_single_net_columns(self, noisy_blobs):
        train, test = noisy_blobs
        cfg = ClcConfig(total_epochs=4, warm_up_epochs=2, seed=12, hidden_dims=(16,),
                        batch_size=64)
        history, net = train_slc(train, test, cfg)
        assert history[-1].n_low_f is not None
        assert history[-1].n_low_g is None
        assert net.n_classes == train.n_classes
