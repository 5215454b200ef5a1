import math

import numpy as np
import pytest

from colabel import kernels
from colabel.net import init_network
from colabel.noise import NoiseSpec, build_transition
from colabel.rng import SeededRng
from colabel.train.baselines import (
    BaselineConfig,
    forward_loss_and_grad,
    train_bootstrap,
    train_codistillation,
    train_coteaching,
    train_decouple,
    train_forward,
    train_self_paced,
    train_standard,
)
from colabel.train.common import keep_fraction
from conftest import make_noisy_blobs
from gradcheck import numeric_logit_grad


def small_cfg(method, **kw):
    base = dict(epochs=5, seed=13, batch_size=64, hidden_dims=(16,), warm_up_epochs=1)
    base.update(kw)
    return BaselineConfig(method=method, **base)


def assert_same_trajectory(hist_a, hist_b, net_a, net_b):
    assert [m.test_accuracy for m in hist_a] == [m.test_accuracy for m in hist_b]
    for p, q in zip(net_a.parameters(), net_b.parameters()):
        assert np.array_equal(p, q)


class TestStandard:
    def test_clean_blobs_accuracy(self, clean_blobs):
        train, test = clean_blobs
        hist, _ = train_standard(train, test, small_cfg("standard", epochs=30,
                                                        hidden_dims=(64, 64)))
        assert hist[-1].test_accuracy >= 0.95

    def test_memorizes_noisy_labels(self):
        # training accuracy against the *noisy* labels approaches 1
        train, _ = make_noisy_blobs(seed=3, per_class=40, ratio=0.5, separation=10.0, dim=4)
        noisy_as_truth = type(train)(train.features, train.noisy_labels,
                                     train.noisy_labels, train.n_classes)
        cfg = small_cfg("standard", epochs=400, batch_size=128, hidden_dims=(64, 64))
        hist, _ = train_standard(train, noisy_as_truth, cfg)
        assert hist[-1].test_accuracy >= 0.99

    def test_deterministic(self, noisy_blobs):
        train, test = noisy_blobs
        h1, n1 = train_standard(train, test, small_cfg("standard"))
        h2, n2 = train_standard(train, test, small_cfg("standard"))
        assert_same_trajectory(h1, h2, n1, n2)


class TestBootstrap:
    def test_kappa_one_equals_standard(self, noisy_blobs):
        train, test = noisy_blobs
        hb, nb = train_bootstrap(train, test, small_cfg("bootstrap", bootstrap_kappa=1.0))
        hs, ns = train_standard(train, test, small_cfg("standard"))
        assert_same_trajectory(hb, hs, nb, ns)

    def test_kappa_zero_gradient_zero_iff_one_hot(self):
        # kappa=0 reduces the objective to the entropy of the own prediction
        one_hot = kernels.one_hot(np.array([1]), 3)
        assert np.abs(kernels.entropy_grad_logits(one_hot)).max() <= 1e-12
        soft = np.array([[0.6, 0.3, 0.1]])
        assert np.abs(kernels.entropy_grad_logits(soft)).max() > 1e-3

    def test_mixture_rows_stochastic(self):
        rng = SeededRng(4, "mix")
        probs = kernels.softmax_rows(rng.normal((10, 4)))
        y = kernels.one_hot(rng.integers(0, 4, 10), 4)
        for kappa in (0.0, 0.3, 0.95, 1.0):
            mix = kappa * y + (1 - kappa) * probs
            assert np.abs(mix.sum(axis=1) - 1.0).max() <= 1e-12
            assert mix.min() >= 0.0

    def test_runs_and_is_deterministic(self, noisy_blobs):
        train, test = noisy_blobs
        h1, n1 = train_bootstrap(train, test, small_cfg("bootstrap"))
        h2, n2 = train_bootstrap(train, test, small_cfg("bootstrap"))
        assert_same_trajectory(h1, h2, n1, n2)


class TestForward:
    def test_identity_equals_standard(self, noisy_blobs):
        train, test = noisy_blobs
        hf, nf = train_forward(train, test, small_cfg("forward"), np.eye(train.n_classes))
        hs, ns = train_standard(train, test, small_cfg("standard"))
        assert_same_trajectory(hf, hs, nf, ns)

    def test_pushed_probs_row_stochastic(self):
        rng = SeededRng(5, "fwd")
        probs = kernels.softmax_rows(rng.normal((20, 3)))
        t = build_transition(NoiseSpec("symmetric", 0.4), 3)
        q = probs @ t
        assert np.abs(q.sum(axis=1) - 1.0).max() <= 1e-12
        assert q.min() >= 0.0

    def test_two_class_scalar_oracle(self):
        # hand computation: q0 = 0.6*0.7 + 0.4*0.3 = 0.54, loss = -ln 0.54
        t = np.array([[0.7, 0.3], [0.3, 0.7]])
        probs = np.array([[0.6, 0.4]])
        loss, _ = forward_loss_and_grad(probs, np.array([0]), t)
        assert abs(loss - (-math.log(0.54))) <= 1e-12

    def test_gradient_finite_difference(self):
        rng = SeededRng(6, "fwd-fd")
        z = rng.normal((5, 3))
        labels = rng.integers(0, 3, 5)
        t = build_transition(NoiseSpec("pairwise", 0.3), 3)

        def loss(zz):
            return forward_loss_and_grad(kernels.softmax_rows(zz), labels, t)[0]

        _, analytic = forward_loss_and_grad(kernels.softmax_rows(z), labels, t)
        numeric = numeric_logit_grad(loss, z)
        assert np.abs(analytic - numeric).max() <= 1e-6

    def test_bad_transition_rejected(self, noisy_blobs):
        train, test = noisy_blobs
        with pytest.raises(ValueError):
            train_forward(train, test, small_cfg("forward"), np.ones((4, 4)))


class TestDecouple:
    def test_identical_nets_never_update(self, noisy_blobs):
        train, test = noisy_blobs
        net = init_network((train.dim, 16, train.n_classes), SeededRng(77, "shared-init"))
        cfg = small_cfg("decouple", warm_up_epochs=0, epochs=3)
        hist, (f, g) = train_decouple(train, test, cfg, initial_nets=(net, net))
        assert all(m.n_selected == 0 for m in hist)
        for p, q in zip(f.parameters(), net.parameters()):
            assert np.array_equal(p, q)

    def test_selected_counts_bounded(self, noisy_blobs):
        train, test = noisy_blobs
        hist, _ = train_decouple(train, test, small_cfg("decouple", epochs=4))
        for m in hist:
            assert 0 <= m.n_selected <= train.n

    def test_disagreement_shrinks_vs_warmup(self, noisy_blobs):
        train, test = noisy_blobs
        hist, _ = train_decouple(train, test, small_cfg("decouple", epochs=6))
        assert hist[0].n_selected == train.n  # warm-up uses everything
        assert hist[-1].n_selected < train.n


class TestSelfPaced:
    def test_schedule_values(self):
        # R(T) = 1 - r * min(T / T_k, 1) at T = 0, T_k/2, T_k for r = 0.45
        assert keep_fraction(0.45, 0, 10) == 1.0
        assert abs(keep_fraction(0.45, 5, 10) - 0.775) <= 1e-12
        assert abs(keep_fraction(0.45, 10, 10) - 0.55) <= 1e-12
        assert abs(keep_fraction(0.45, 25, 10) - 0.55) <= 1e-12

    def test_r_zero_equals_standard(self, noisy_blobs):
        train, test = noisy_blobs
        hp, np_ = train_self_paced(train, test, small_cfg("self_paced", noise_ratio=0.0))
        hs, ns = train_standard(train, test, small_cfg("standard"))
        assert_same_trajectory(hp, hs, np_, ns)

    def test_steady_state_keeps_1_minus_r(self, noisy_blobs):
        train, test = noisy_blobs
        r = 0.5
        cfg = small_cfg("self_paced", noise_ratio=r, epochs=8, warm_up_epochs=1,
                        schedule_epochs=3)
        hist, _ = train_self_paced(train, test, cfg)
        steady = hist[-1].n_selected
        # int truncation per batch, so allow a couple per batch
        n_batches = math.ceil(train.n / 64)
        assert abs(steady - (1 - r) * train.n) <= 2 * n_batches

    def test_requires_noise_ratio(self):
        with pytest.raises(ValueError):
            small_cfg("self_paced")


class TestCoTeaching:
    def test_r_zero_both_nets_standard_with_own_shuffles(self, noisy_blobs):
        train, test = noisy_blobs
        hc, (f, g) = train_coteaching(train, test, small_cfg("co_teaching", noise_ratio=0.0))
        hs0, n0 = train_standard(train, test, small_cfg("standard"), net_slot="net0")
        hs1, n1 = train_standard(train, test, small_cfg("standard"), net_slot="net1")
        assert_same_trajectory(hc, hs0, f, n0)
        for p, q in zip(g.parameters(), n1.parameters()):
            assert np.array_equal(p, q)

    def test_kept_count_follows_schedule(self, noisy_blobs):
        train, test = noisy_blobs
        r = 0.5
        cfg = small_cfg("co_teaching", noise_ratio=r, epochs=8, warm_up_epochs=1,
                        schedule_epochs=3)
        hist, _ = train_coteaching(train, test, cfg)
        assert hist[0].n_selected == train.n
        n_batches = math.ceil(train.n / 64)
        assert abs(hist[-1].n_selected - (1 - r) * train.n) <= 2 * n_batches

    def test_small_loss_selection_beats_random_precision(self):
        train, test = make_noisy_blobs(seed=23, per_class=200, ratio=0.45,
                                       separation=10.0, dim=4)
        cfg = BaselineConfig(method="co_teaching", epochs=12, seed=5, batch_size=128,
                             hidden_dims=(64, 64), warm_up_epochs=2, noise_ratio=0.45,
                             schedule_epochs=5)
        hist, _ = train_coteaching(train, test, cfg)
        assert hist[-1].supervision_precision > 1 - 0.45


class TestCoDistillation:
    def test_lambda_zero_equals_two_standards(self, noisy_blobs):
        train, test = noisy_blobs
        hc, (f, g) = train_codistillation(
            train, test, small_cfg("co_distillation", codistill_lambda=0.0)
        )
        hs0, n0 = train_standard(train, test, small_cfg("standard"), net_slot="net0")
        hs1, n1 = train_standard(train, test, small_cfg("standard"), net_slot="net1")
        assert_same_trajectory(hc, hs0, f, n0)
        for p, q in zip(g.parameters(), n1.parameters()):
            assert np.array_equal(p, q)

    def test_combined_gradient_finite_difference(self):
        rng = SeededRng(7, "cd-fd")
        z = rng.normal((5, 3))
        y = kernels.one_hot(rng.integers(0, 3, 5), 3)
        partner = kernels.softmax_rows(rng.normal((5, 3)))
        lam = 0.7

        def loss(zz):
            p = kernels.softmax_rows(zz)
            return kernels.cross_entropy(y, p) + lam * kernels.cross_entropy(partner, p)

        p0 = kernels.softmax_rows(z)
        analytic = kernels.softce_grad_logits(y, p0) + lam * kernels.softce_grad_logits(partner, p0)
        numeric = numeric_logit_grad(loss, z)
        assert np.abs(analytic - numeric).max() <= 1e-6

    def test_deterministic(self, noisy_blobs):
        train, test = noisy_blobs
        h1, (f1, g1) = train_codistillation(train, test, small_cfg("co_distillation"))
        h2, (f2, g2) = train_codistillation(train, test, small_cfg("co_distillation"))
        assert_same_trajectory(h1, h2, f1, f2)
        for p, q in zip(g1.parameters(), g2.parameters()):
            assert np.array_equal(p, q)


def test_no_method_harms_clean_data(clean_blobs):
    train, test = clean_blobs
    kw = dict(epochs=25, seed=17, batch_size=128, hidden_dims=(64, 64), warm_up_epochs=5)
    runs = {
        "standard": lambda: train_standard(train, test, BaselineConfig(method="standard", **kw)),
        "bootstrap": lambda: train_bootstrap(train, test, BaselineConfig(method="bootstrap", **kw)),
        "forward": lambda: train_forward(
            train, test, BaselineConfig(method="forward", **kw), np.eye(train.n_classes)
        ),
        "decouple": lambda: train_decouple(train, test, BaselineConfig(method="decouple", **kw)),
        "self_paced": lambda: train_self_paced(
            train, test, BaselineConfig(method="self_paced", noise_ratio=0.0, **kw)
        ),
        "co_teaching": lambda: train_coteaching(
            train, test, BaselineConfig(method="co_teaching", noise_ratio=0.0, **kw)
        ),
        "co_distillation": lambda: train_codistillation(
            train, test, BaselineConfig(method="co_distillation", **kw)
        ),
    }
    accs = {name: run()[0][-1].test_accuracy for name, run in runs.items()}
    for name, acc in accs.items():
        assert acc >= accs["standard"] - 0.02, f"{name}: {acc} vs {accs['standard']}"
