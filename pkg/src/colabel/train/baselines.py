"""The seven comparison methods, sharing the common training-loop skeleton.

Degenerate parameter settings collapse onto Standard as exact trajectory
equalities (same seed, same streams): bootstrap kappa=1, forward T=identity,
co-distillation lambda=0, self-paced r=0. Co-teaching and co-distillation keep
independent per-network batch streams; decouple runs both networks on one
shared batch so the disagreement set is well defined.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..data import LabeledDataset
from ..net import adam_step, backward, forward
from ..noise import row_normalize
from ..rng import SeededRng
from .common import (
    EpochTally,
    MetricsRecorder,
    batch_indices,
    ce_step,
    keep_fraction,
    make_net,
    per_sample_ce,
    predict_probs,
)

__all__ = [
    "BaselineConfig",
    "train_standard",
    "train_bootstrap",
    "train_forward",
    "train_decouple",
    "train_self_paced",
    "train_coteaching",
    "train_codistillation",
]

METHODS = (
    "standard",
    "bootstrap",
    "forward",
    "decouple",
    "self_paced",
    "co_teaching",
    "co_distillation",
)


@dataclass(frozen=True)
class BaselineConfig:
    method: str
    epochs: int
    seed: int = 0
    batch_size: int = 128
    learning_rate: float = 0.001
    warm_up_epochs: int = 10
    hidden_dims: tuple = (64, 64)
    bootstrap_kappa: float = 0.95
    codistill_lambda: float = 1.0
    noise_ratio: float = None  # side information for self_paced / co_teaching
    schedule_epochs: int = 10

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown baseline method {self.method!r}")
        if not (0 <= self.warm_up_epochs <= self.epochs):
            raise ValueError("need 0 <= warm_up_epochs <= epochs")
        if self.method in ("self_paced", "co_teaching"):
            if self.noise_ratio is None or not (0.0 <= self.noise_ratio < 1.0):
                raise ValueError(f"{self.method} requires noise_ratio in [0, 1)")
        if not (0.0 <= self.bootstrap_kappa <= 1.0):
            raise ValueError("bootstrap_kappa must be in [0, 1]")
        if self.codistill_lambda < 0:
            raise ValueError("codistill_lambda must be non-negative")


def _setup(dataset, test_set, cfg, slot="net0"):
    view = dataset.train_view()
    recorder = MetricsRecorder(dataset, test_set)
    onehot = kernels.one_hot(view.noisy_labels, view.n_classes)
    net, adam = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, slot)
    shuffle = SeededRng(cfg.seed, f"{slot}/shuffle")
    return view, recorder, onehot, net, adam, shuffle


def train_standard(dataset, test_set, cfg: BaselineConfig, net_slot="net0"):
    """Plain cross-entropy on the noisy labels."""
    view, recorder, onehot, net, adam, shuffle = _setup(dataset, test_set, cfg, net_slot)
    for epoch in range(1, cfg.epochs + 1):
        tally = EpochTally()
        for idx in batch_indices(shuffle.permutation(view.n), cfg.batch_size):
            loss, _ = ce_step(net, adam, view.features[idx], onehot[idx])
            tally.add_loss(loss)
        recorder.record_plain(epoch, net, tally)
    return recorder.history, net


def train_bootstrap(dataset, test_set, cfg: BaselineConfig):
    """Targets blend the given label with the model's own prediction:
    kappa * one_hot(y) + (1 - kappa) * probs, gradient flowing through probs."""
    view, recorder, onehot, net, adam, shuffle = _setup(dataset, test_set, cfg)
    kappa = cfg.bootstrap_kappa
    for epoch in range(1, cfg.epochs + 1):
        tally = EpochTally()
        for idx in batch_indices(shuffle.permutation(view.n), cfg.batch_size):
            X, Y = view.features[idx], onehot[idx]
            if epoch <= cfg.warm_up_epochs:
                loss, _ = ce_step(net, adam, X, Y)
            else:
                logits, cache = forward(net, X)
                probs = kernels.softmax_rows(logits)
                ent = kernels.shannon_entropy_rows(probs)
                loss = kappa * kernels.cross_entropy(Y, probs) + (1.0 - kappa) * float(
                    np.mean(ent)
                )
                grad = kappa * kernels.softce_grad_logits(Y, probs) + (
                    1.0 - kappa
                ) * kernels.entropy_grad_logits(probs)
                adam_step(net, backward(net, cache, grad), adam)
            tally.add_loss(loss)
        recorder.record_plain(epoch, net, tally)
    return recorder.history, net


def forward_loss_and_grad(probs, labels, transition):
    """Loss and logit gradient of CE(one_hot(y), probs @ T).

    Per sample with label l: dL/dz_k = p_k - p_k * T[k, l] / (pT)_l, averaged
    over the batch. Reduces bitwise to the plain CE gradient when T = I.
    """
    n = probs.shape[0]
    q = probs @ transition
    ql = np.maximum(q[np.arange(n), labels], kernels.LOG_EPS)
    loss = float(np.mean(-np.log(ql)))
    tcol = transition[:, labels].T
    grad = (probs - (probs * tcol) / ql[:, None]) / n
    return loss, grad


def train_forward(dataset, test_set, cfg: BaselineConfig, transition):
    """Predictions pushed through the noise transition matrix before the CE."""
    t = np.asarray(transition, dtype=np.float64)
    view, recorder, onehot, net, adam, shuffle = _setup(dataset, test_set, cfg)
    if t.shape != (view.n_classes, view.n_classes):
        raise ValueError(f"train_forward: transition shape {t.shape} != class count")
    if np.abs(t.sum(axis=1) - 1.0).max() > 1e-9:
        raise ValueError("train_forward: transition rows must sum to 1")
    for epoch in range(1, cfg.epochs + 1):
        tally = EpochTally()
        for idx in batch_indices(shuffle.permutation(view.n), cfg.batch_size):
            X, Y = view.features[idx], onehot[idx]
            if epoch <= cfg.warm_up_epochs:
                loss, _ = ce_step(net, adam, X, Y)
            else:
                logits, cache = forward(net, X)
                probs = kernels.softmax_rows(logits)
                loss, grad = forward_loss_and_grad(probs, view.noisy_labels[idx], t)
                adam_step(net, backward(net, cache, grad), adam)
            tally.add_loss(loss)
        recorder.record_plain(epoch, net, tally)
    return recorder.history, net


def train_decouple(dataset, test_set, cfg: BaselineConfig, initial_nets=None):
    """Update both networks only on samples where their predictions disagree."""
    view = dataset.train_view()
    recorder = MetricsRecorder(dataset, test_set)
    onehot = kernels.one_hot(view.noisy_labels, view.n_classes)
    f, adam_f = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, "net0")
    g, adam_g = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, "net1")
    if initial_nets is not None:
        f, g = initial_nets[0].copy(), initial_nets[1].copy()
    shuffle_f = SeededRng(cfg.seed, "net0/shuffle")
    shuffle_g = SeededRng(cfg.seed, "net1/shuffle")
    shuffle_shared = SeededRng(cfg.seed, "shared/shuffle")
    for epoch in range(1, cfg.epochs + 1):
        tally = EpochTally()
        if epoch <= cfg.warm_up_epochs:
            for idx in batch_indices(shuffle_f.permutation(view.n), cfg.batch_size):
                loss, _ = ce_step(f, adam_f, view.features[idx], onehot[idx])
                tally.add_loss(loss)
                tally.add_selected(idx)
            for idx in batch_indices(shuffle_g.permutation(view.n), cfg.batch_size):
                ce_step(g, adam_g, view.features[idx], onehot[idx])
        else:
            for idx in batch_indices(shuffle_shared.permutation(view.n), cfg.batch_size):
                X, Y = view.features[idx], onehot[idx]
                logits_f, cache_f = forward(f, X)
                logits_g, cache_g = forward(g, X)
                probs_f = kernels.softmax_rows(logits_f)
                probs_g = kernels.softmax_rows(logits_g)
                disagree = np.flatnonzero(
                    kernels.argmax_rows(probs_f) != kernels.argmax_rows(probs_g)
                )
                if disagree.size == 0:
                    continue
                sub_t = Y[disagree]
                grad_f = np.zeros_like(probs_f)
                grad_f[disagree] = kernels.softce_grad_logits(sub_t, probs_f[disagree])
                grad_g = np.zeros_like(probs_g)
                grad_g[disagree] = kernels.softce_grad_logits(sub_t, probs_g[disagree])
                loss = kernels.cross_entropy(sub_t, probs_f[disagree])
                adam_step(f, backward(f, cache_f, grad_f), adam_f)
                adam_step(g, backward(g, cache_g, grad_g), adam_g)
                tally.add_loss(loss)
                tally.add_selected(idx[disagree])
        recorder.record_selection(epoch, f, tally)
    return recorder.history, (f, g)


def _small_loss_keep(losses, rate):
    """Indices of the `rate` fraction with smallest loss, in batch order."""
    k = int(rate * losses.size)
    return np.sort(np.argsort(losses, kind="stable")[:k])


def train_self_paced(dataset, test_set, cfg: BaselineConfig):
    """Self-paced small-loss selection (the MentorNet variant used here):
    keep the R(T) lowest-loss fraction of each batch and step on it."""
    view, recorder, onehot, net, adam, shuffle = _setup(dataset, test_set, cfg)
    for epoch in range(1, cfg.epochs + 1):
        tally = EpochTally()
        rate = keep_fraction(
            cfg.noise_ratio, max(0, epoch - cfg.warm_up_epochs), cfg.schedule_epochs
        )
        for idx in batch_indices(shuffle.permutation(view.n), cfg.batch_size):
            X, Y = view.features[idx], onehot[idx]
            logits, cache = forward(net, X)
            probs = kernels.softmax_rows(logits)
            keep = _small_loss_keep(per_sample_ce(probs, view.noisy_labels[idx]), rate)
            if keep.size == 0:
                continue
            grad = np.zeros_like(probs)
            grad[keep] = kernels.softce_grad_logits(Y[keep], probs[keep])
            loss = kernels.cross_entropy(Y[keep], probs[keep])
            adam_step(net, backward(net, cache, grad), adam)
            tally.add_loss(loss)
            tally.add_selected(idx[keep])
        recorder.record_selection(epoch, net, tally)
    return recorder.history, net


def train_coteaching(dataset, test_set, cfg: BaselineConfig):
    """Each network steps on the small-loss samples picked by its partner
    (selection happens on the updating network's own batch)."""
    view = dataset.train_view()
    recorder = MetricsRecorder(dataset, test_set)
    onehot = kernels.one_hot(view.noisy_labels, view.n_classes)
    f, adam_f = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, "net0")
    g, adam_g = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, "net1")
    shuffle_f = SeededRng(cfg.seed, "net0/shuffle")
    shuffle_g = SeededRng(cfg.seed, "net1/shuffle")

    def partner_keep(partner, X, labels, rate):
        logits, _ = forward(partner, X)
        losses = per_sample_ce(kernels.softmax_rows(logits), labels)
        return _small_loss_keep(losses, rate)

    for epoch in range(1, cfg.epochs + 1):
        tally = EpochTally()
        rate = keep_fraction(
            cfg.noise_ratio, max(0, epoch - cfg.warm_up_epochs), cfg.schedule_epochs
        )
        perm_f = shuffle_f.permutation(view.n)
        perm_g = shuffle_g.permutation(view.n)
        for idx_f, idx_g in zip(
            batch_indices(perm_f, cfg.batch_size), batch_indices(perm_g, cfg.batch_size)
        ):
            Xf, Xg = view.features[idx_f], view.features[idx_g]
            # both selections from pre-update networks
            keep_f = partner_keep(g, Xf, view.noisy_labels[idx_f], rate)
            keep_g = partner_keep(f, Xg, view.noisy_labels[idx_g], rate)
            logits_f, cache_f = forward(f, Xf)
            probs_f = kernels.softmax_rows(logits_f)
            if keep_f.size:
                grad = np.zeros_like(probs_f)
                tgt = onehot[idx_f][keep_f]
                grad[keep_f] = kernels.softce_grad_logits(tgt, probs_f[keep_f])
                loss = kernels.cross_entropy(tgt, probs_f[keep_f])
                adam_step(f, backward(f, cache_f, grad), adam_f)
                tally.add_loss(loss)
                tally.add_selected(idx_f[keep_f])
            logits_g, cache_g = forward(g, Xg)
            probs_g = kernels.softmax_rows(logits_g)
            if keep_g.size:
                grad = np.zeros_like(probs_g)
                tgt = onehot[idx_g][keep_g]
                grad[keep_g] = kernels.softce_grad_logits(tgt, probs_g[keep_g])
                adam_step(g, backward(g, cache_g, grad), adam_g)
        recorder.record_selection(epoch, f, tally)
    return recorder.history, (f, g)


def train_codistillation(dataset, test_set, cfg: BaselineConfig):
    """After warm-up each network adds a soft CE toward its partner's
    predictions on its own batch: CE(y) + lambda * CE(partner probs)."""
    view = dataset.train_view()
    recorder = MetricsRecorder(dataset, test_set)
    onehot = kernels.one_hot(view.noisy_labels, view.n_classes)
    f, adam_f = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, "net0")
    g, adam_g = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, "net1")
    shuffle_f = SeededRng(cfg.seed, "net0/shuffle")
    shuffle_g = SeededRng(cfg.seed, "net1/shuffle")
    lam = cfg.codistill_lambda

    def distill_step(net, adam, partner_probs, X, Y):
        logits, cache = forward(net, X)
        probs = kernels.softmax_rows(logits)
        loss = kernels.cross_entropy(Y, probs) + lam * kernels.cross_entropy(
            partner_probs, probs
        )
        grad = kernels.softce_grad_logits(Y, probs) + lam * kernels.softce_grad_logits(
            partner_probs, probs
        )
        adam_step(net, backward(net, cache, grad), adam)
        return loss

    for epoch in range(1, cfg.epochs + 1):
        tally = EpochTally()
        perm_f = shuffle_f.permutation(view.n)
        perm_g = shuffle_g.permutation(view.n)
        for idx_f, idx_g in zip(
            batch_indices(perm_f, cfg.batch_size), batch_indices(perm_g, cfg.batch_size)
        ):
            Xf, Yf = view.features[idx_f], onehot[idx_f]
            Xg, Yg = view.features[idx_g], onehot[idx_g]
            if epoch <= cfg.warm_up_epochs:
                loss, _ = ce_step(f, adam_f, Xf, Yf)
                ce_step(g, adam_g, Xg, Yg)
            else:
                # teachers evaluated before either net updates
                teacher_for_f = predict_probs(g, Xf)
                teacher_for_g = predict_probs(f, Xg)
                loss = distill_step(f, adam_f, teacher_for_f, Xf, Yf)
                distill_step(g, adam_g, teacher_for_g, Xg, Yg)
            tally.add_loss(loss)
        recorder.record_plain(epoch, f, tally)
    return recorder.history, (f, g)
