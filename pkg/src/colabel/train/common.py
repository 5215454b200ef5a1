"""Shared training-loop machinery: batch iteration, the canonical CE step,
evaluation passes, and the per-epoch metrics recorder.

The update path only ever touches a `TrainView`; clean labels live inside the
`MetricsRecorder`, which runs a fixed evaluation pass after each epoch.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..data import LabeledDataset, TrainView
from ..metrics import EpochMetrics, supervision_precision
from ..net import AdamState, MlpNetwork, adam_step, backward, forward, init_network
from ..rng import SeededRng
from ..selection import entropy_gap_stats

__all__ = [
    "EpochTally",
    "MetricsRecorder",
    "batch_indices",
    "ce_step",
    "scatter_ce_step",
    "per_sample_ce",
    "predict_probs",
    "make_net",
    "keep_fraction",
]


def make_net(view: TrainView, hidden_dims, learning_rate, seed, slot):
    """Network + Adam state for one training slot ("net0", "net1")."""
    dims = (view.features.shape[1], *hidden_dims, view.n_classes)
    net = init_network(dims, SeededRng(seed, f"{slot}/init"))
    return net, AdamState.for_network(net, learning_rate)


def batch_indices(perm, batch_size):
    for start in range(0, perm.size, batch_size):
        yield perm[start : start + batch_size]


def ce_step(net, adam, X, targets):
    """One cross-entropy step against row-stochastic targets; returns (loss, probs)."""
    logits, cache = forward(net, X)
    probs = kernels.softmax_rows(logits)
    loss = kernels.cross_entropy(targets, probs)
    adam_step(net, backward(net, cache, kernels.softce_grad_logits(targets, probs)), adam)
    return loss, probs


def scatter_ce_step(net, adam, X, onehot, keep):
    """CE step restricted to the `keep` rows of the batch (others get zero
    gradient); returns the mean loss over the kept rows."""
    logits, cache = forward(net, X)
    probs = kernels.softmax_rows(logits)
    grad = np.zeros_like(probs)
    sub = probs[keep]
    tgt = onehot[keep]
    grad[keep] = kernels.softce_grad_logits(tgt, sub)
    loss = kernels.cross_entropy(tgt, sub)
    adam_step(net, backward(net, cache, grad), adam)
    return loss


def per_sample_ce(probs, labels):
    """-log q_y per row, clamped like cross_entropy."""
    q = probs[np.arange(probs.shape[0]), labels]
    return -np.log(np.maximum(q, kernels.LOG_EPS))


def keep_fraction(noise_ratio, epochs_after_warmup, schedule_epochs):
    """Small-loss keep rate R(T) = 1 - r * min(T / T_k, 1)."""
    ramp = min(epochs_after_warmup / schedule_epochs, 1.0) if schedule_epochs > 0 else 1.0
    return 1.0 - noise_ratio * max(ramp, 0.0)


def predict_probs(net: MlpNetwork, X, chunk=4096):
    out = np.empty((X.shape[0], net.n_classes))
    for start in range(0, X.shape[0], chunk):
        logits, _ = forward(net, X[start : start + chunk])
        out[start : start + chunk] = kernels.softmax_rows(logits)
    return out


@dataclass
class EpochTally:
    """Training-time running sums handed to the recorder after each epoch."""

    batches: int = 0
    loss_total_sum: float = 0.0
    ce_low_sum: float = 0.0
    ent_own_sum: float = 0.0
    ce_high_sum: float = 0.0
    term_batches: int = 0
    selected: list = field(default_factory=list)  # dataset-level index arrays

    def add_loss(self, loss):
        self.batches += 1
        self.loss_total_sum += loss

    def add_breakdown(self, breakdown):
        self.batches += 1
        self.term_batches += 1
        self.loss_total_sum += breakdown.total
        self.ce_low_sum += breakdown.ce_low
        self.ent_own_sum += breakdown.ent_own
        self.ce_high_sum += breakdown.ce_high

    def add_selected(self, dataset_indices):
        self.selected.append(np.asarray(dataset_indices, dtype=np.int64))

    @property
    def mean_loss(self):
        return self.loss_total_sum / self.batches if self.batches else None

    def selected_indices(self):
        if not self.selected:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(self.selected)


class MetricsRecorder:
    """Builds one EpochMetrics row per epoch from a fixed evaluation pass.

    Owns the clean labels; trainers only hand over networks and tallies.
    """

    def __init__(self, train_ds: LabeledDataset, test_ds: LabeledDataset):
        self.train_features = train_ds.features
        self.clean = train_ds.clean_labels
        self.noisy = train_ds.noisy_labels
        self.test_features = test_ds.features
        self.test_labels = test_ds.clean_labels
        self.noisy_precision = supervision_precision(self.noisy, self.clean)
        self.history: list[EpochMetrics] = []

    def _base(self, epoch, net, tally):
        probs = predict_probs(net, self.train_features)
        test_pred = kernels.argmax_rows(predict_probs(net, self.test_features))
        gap = entropy_gap_stats(probs, self.clean)
        return probs, dict(
            epoch=epoch,
            test_accuracy=float(np.mean(test_pred == self.test_labels)),
            supervision_precision=self.noisy_precision,
            mean_entropy_correct=gap.mean_correct,
            mean_entropy_incorrect=gap.mean_incorrect,
            mean_entropy_all=gap.mean_all,
            loss_total=tally.mean_loss,
        )

    def record_plain(self, epoch, net, tally):
        """Methods whose supervision is the original noisy labels."""
        _, row = self._base(epoch, net, tally)
        self.history.append(EpochMetrics(**row))
        return self.history[-1]

    def record_selection(self, epoch, net, tally):
        """Selection baselines: precision over the epoch's selected samples."""
        _, row = self._base(epoch, net, tally)
        sel = tally.selected_indices()
        row["n_selected"] = int(sel.size)
        if sel.size:
            row["supervision_precision"] = supervision_precision(
                self.noisy[sel], self.clean[sel]
            )
        else:
            row["supervision_precision"] = float("nan")
        self.history.append(EpochMetrics(**row))
        return self.history[-1]

    def record_pseudo(self, epoch, net, partner, gamma, tally, dual):
        """Label-correction methods: supervision for `net` comes from the
        partner's low-entropy predictions (its own for the single-net case)."""
        probs_f, row = self._base(epoch, net, tally)
        if tally.term_batches:
            row["loss_ce_low"] = tally.ce_low_sum / tally.term_batches
            row["loss_ent_own"] = tally.ent_own_sum / tally.term_batches
            row["loss_ce_high"] = tally.ce_high_sum / tally.term_batches
        if gamma is None:
            # warm-up: nothing is in the low set yet, original labels supervise
            row["n_low_f"] = 0
            if dual:
                row["n_low_g"] = 0
            self.history.append(EpochMetrics(**row))
            return self.history[-1]
        probs_g = probs_f if partner is net else predict_probs(partner, self.train_features)
        h_f = kernels.shannon_entropy_rows(probs_f)
        row["n_low_f"] = int(np.sum(h_f <= gamma))
        if dual:
            h_g = kernels.shannon_entropy_rows(probs_g)
            row["n_low_g"] = int(np.sum(h_g <= gamma))
            low_partner = h_g <= gamma
        else:
            low_partner = h_f <= gamma
        effective = np.where(
            low_partner, kernels.argmax_rows(probs_g), self.noisy
        )
        row["supervision_precision"] = supervision_precision(effective, self.clean)
        self.history.append(EpochMetrics(**row))
        return self.history[-1]

    def corrected_labels(self, net, partner, gamma):
        """Final effective supervision labels for `net` under threshold gamma."""
        probs_g = predict_probs(partner, self.train_features)
        low = kernels.shannon_entropy_rows(probs_g) <= gamma
        return np.where(low, kernels.argmax_rows(probs_g), self.noisy)
