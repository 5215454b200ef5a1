"""Collaborative Label Correction: two networks exchange their low-entropy
predictions as supervision, and its single-network ablation (SLC).

Per post-warm-up mini-batch, each network's objective is

    CE(own probs, partner's low-entropy predictions)          on the partner's low set
  + alpha * H(own probs)                                      on its own low set
  + beta  * CE(own probs, original one-hot labels)            on the partner's high set

with each term averaged over its own subset and empty subsets contributing 0.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import kernels
from ..data import LabeledDataset
from ..net import MlpNetwork, adam_step, backward, forward
from ..rng import SeededRng
from ..selection import BatchPartition, GammaPolicy, estimate_gamma, partition_by_entropy
from .common import EpochTally, MetricsRecorder, batch_indices, ce_step, make_net

__all__ = [
    "ClcConfig",
    "LossBreakdown",
    "TrainerState",
    "clc_batch_loss",
    "train_clc",
    "train_slc",
]


@dataclass(frozen=True)
class ClcConfig:
    total_epochs: int
    seed: int = 0
    alpha: float = 0.1
    beta: float = 0.5
    gamma_policy: GammaPolicy = GammaPolicy("auto")
    warm_up_epochs: int = 10
    batch_size: int = 128
    learning_rate: float = 0.001
    hidden_dims: tuple = (64, 64)
    hard_pseudo_labels: bool = False
    gamma_from_both: bool = False

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if not (0 <= self.warm_up_epochs < self.total_epochs):
            raise ValueError(
                f"need 0 <= warm_up_epochs < total_epochs, got "
                f"{self.warm_up_epochs} / {self.total_epochs}"
            )
        if self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("batch_size must be >= 1 and learning_rate positive")


@dataclass(frozen=True)
class LossBreakdown:
    ce_low: float  # CE against the partner's low-entropy predictions
    ent_own: float  # mean entropy on the network's own low set
    ce_high: float  # CE against original labels on the partner's high set
    total: float


@dataclass
class TrainerState:
    f: MlpNetwork
    g: Optional[MlpNetwork]
    epoch: int
    gamma: Optional[float]


def clc_batch_loss(own_probs, partner_partition: BatchPartition,
                   own_partition: BatchPartition, noisy_onehot, alpha, beta):
    """Loss terms and the assembled logit gradient for one network's update."""
    p = kernels.as_matrix(own_probs, "own_probs")
    y = kernels.as_matrix(noisy_onehot, "noisy_onehot")
    n = p.shape[0]
    if y.shape != p.shape:
        raise ValueError(f"clc_batch_loss: shape mismatch {p.shape} vs {y.shape}")
    if partner_partition.batch_size != n or own_partition.batch_size != n:
        raise ValueError("clc_batch_loss: partitions do not match the batch size")

    grad = np.zeros_like(p)
    ce_low = ent_own = ce_high = 0.0

    low = partner_partition.low_indices
    if low.size:
        sub = p[low]
        ce_low = kernels.cross_entropy(partner_partition.low_targets, sub)
        grad[low] += kernels.softce_grad_logits(partner_partition.low_targets, sub)

    own_low = own_partition.low_indices
    if own_low.size:
        sub = p[own_low]
        ent_own = float(np.mean(kernels.shannon_entropy_rows(sub)))
        grad[own_low] += alpha * kernels.entropy_grad_logits(sub)

    high = partner_partition.high_indices
    if high.size:
        sub = p[high]
        ce_high = kernels.cross_entropy(partner_partition.high_targets, sub)
        grad[high] += beta * kernels.softce_grad_logits(partner_partition.high_targets, sub)

    total = ce_low + alpha * ent_own + beta * ce_high
    return LossBreakdown(ce_low, ent_own, ce_high, total), grad


def _resolve_gamma(cfg: ClcConfig, f, g, X):
    if cfg.gamma_policy.mode == "fixed":
        return float(cfg.gamma_policy.value)
    gamma = estimate_gamma(f, X)
    if cfg.gamma_from_both and g is not None:
        gamma = 0.5 * (gamma + estimate_gamma(g, X))
    return gamma


def _run(dataset: LabeledDataset, test_set: LabeledDataset, cfg: ClcConfig, dual: bool,
         slots=("net0", "net1")):
    view = dataset.train_view()
    recorder = MetricsRecorder(dataset, test_set)
    onehot_all = kernels.one_hot(view.noisy_labels, view.n_classes)

    f, adam_f = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, slots[0])
    shuffle_f = SeededRng(cfg.seed, f"{slots[0]}/shuffle")
    if dual:
        g, adam_g = make_net(view, cfg.hidden_dims, cfg.learning_rate, cfg.seed, slots[1])
        shuffle_g = SeededRng(cfg.seed, f"{slots[1]}/shuffle")
        # slot-neutral stream: swapping the nets' streams must not reorder the
        # shared correction-phase batches
        shuffle_shared = SeededRng(cfg.seed, "shared/shuffle")
    else:
        g = adam_g = shuffle_g = None
        shuffle_shared = shuffle_f

    gamma = None
    for epoch in range(1, cfg.total_epochs + 1):
        tally = EpochTally()
        if epoch <= cfg.warm_up_epochs:
            # warm-up: plain CE on noisy labels, independent shuffles per net
            for idx in batch_indices(shuffle_f.permutation(view.n), cfg.batch_size):
                loss, _ = ce_step(f, adam_f, view.features[idx], onehot_all[idx])
                tally.add_loss(loss)
            if dual:
                for idx in batch_indices(shuffle_g.permutation(view.n), cfg.batch_size):
                    ce_step(g, adam_g, view.features[idx], onehot_all[idx])
        else:
            if gamma is None:
                gamma = _resolve_gamma(cfg, f, g, view.features)
            # one shared mini-batch per step so the partitions can be exchanged
            for idx in batch_indices(shuffle_shared.permutation(view.n), cfg.batch_size):
                X, Y = view.features[idx], onehot_all[idx]
                logits_f, cache_f = forward(f, X)
                probs_f = kernels.softmax_rows(logits_f)
                part_f = partition_by_entropy(probs_f, Y, gamma, cfg.hard_pseudo_labels)
                if dual:
                    logits_g, cache_g = forward(g, X)
                    probs_g = kernels.softmax_rows(logits_g)
                    part_g = partition_by_entropy(probs_g, Y, gamma, cfg.hard_pseudo_labels)
                else:
                    part_g = part_f
                # both partitions come from pre-update predictions
                breakdown, grad = clc_batch_loss(probs_f, part_g, part_f, Y, cfg.alpha, cfg.beta)
                adam_step(f, backward(f, cache_f, grad), adam_f)
                tally.add_breakdown(breakdown)
                if dual:
                    bd_g, grad_g = clc_batch_loss(probs_g, part_f, part_g, Y, cfg.alpha, cfg.beta)
                    adam_step(g, backward(g, cache_g, grad_g), adam_g)
        recorder.record_pseudo(epoch, f, g if dual else f, gamma, tally, dual=dual)
    return TrainerState(f, g, cfg.total_epochs, gamma), recorder


def train_clc(dataset, test_set, cfg: ClcConfig):
    """Dual-network label correction; returns (history, final f, final g)."""
    state, recorder = _run(dataset, test_set, cfg, dual=True)
    return recorder.history, state.f, state.g


def train_slc(dataset, test_set, cfg: ClcConfig):
    """Single-network ablation: the net corrects labels with its own
    low-entropy predictions; returns (history, final net)."""
    state, recorder = _run(dataset, test_set, cfg, dual=False)
    return recorder.history, state.f
