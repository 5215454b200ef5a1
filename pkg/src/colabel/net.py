"""Fully-connected classifier with manual backpropagation and Adam.

Hidden layers use rectified-linear activations, the last layer emits raw
logits. Weights are He-initialized; the forward pass keeps a cache so one
backward call yields exact gradients for any supplied logit gradient.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .rng import SeededRng

__all__ = [
    "MlpNetwork",
    "ForwardCache",
    "Gradients",
    "AdamState",
    "init_network",
    "forward",
    "backward",
    "adam_step",
]


class MlpNetwork:
    def __init__(self, layer_dims, weights, biases):
        self.layer_dims = tuple(int(d) for d in layer_dims)
        self.weights = weights
        self.biases = biases

    @property
    def n_layers(self):
        return len(self.weights)

    @property
    def input_dim(self):
        return self.layer_dims[0]

    @property
    def n_classes(self):
        return self.layer_dims[-1]

    def copy(self):
        return MlpNetwork(
            self.layer_dims,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def parameters(self):
        """Flat list of parameter arrays, weights then bias per layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out


@dataclass
class ForwardCache:
    inputs: np.ndarray
    preacts: list  # z per layer
    acts: list  # relu(z) per hidden layer

    @property
    def batch_size(self):
        return self.inputs.shape[0]


@dataclass
class Gradients:
    weights: list
    biases: list

    def parameters(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out


def init_network(layer_dims, rng: SeededRng) -> MlpNetwork:
    """He-initialized network: W ~ N(0, 2/fan_in), biases zero."""
    dims = tuple(int(d) for d in layer_dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ValueError(f"init_network: need >= 2 positive layer dims, got {dims}")
    weights, biases = [], []
    for din, dout in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal((din, dout)) * np.sqrt(2.0 / din))
        biases.append(np.zeros(dout))
    return MlpNetwork(dims, weights, biases)


def forward(net: MlpNetwork, X):
    """Batch forward pass; returns (logits, cache for backward)."""
    X = kernels.as_matrix(X, "X")
    if X.shape[1] != net.input_dim:
        raise ValueError(f"forward: input dim {X.shape[1]} != network dim {net.input_dim}")
    preacts, acts = [], []
    a = X
    last = net.n_layers - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        preacts.append(z)
        if l < last:
            a = kernels.relu(z)
            acts.append(a)
    return preacts[-1], ForwardCache(X, preacts, acts)


def backward(net: MlpNetwork, cache: ForwardCache, grad_logits) -> Gradients:
    """Exact parameter gradients for the loss whose logit gradient is given."""
    g = kernels.as_matrix(grad_logits, "grad_logits")
    if g.shape != (cache.batch_size, net.n_classes):
        raise ValueError(
            f"backward: grad_logits shape {g.shape} does not match cache "
            f"({cache.batch_size}, {net.n_classes})"
        )
    if len(cache.preacts) != net.n_layers:
        raise ValueError("backward: cache does not match this network")
    gw = [None] * net.n_layers
    gb = [None] * net.n_layers
    for l in range(net.n_layers - 1, -1, -1):
        a_prev = cache.acts[l - 1] if l > 0 else cache.inputs
        gw[l] = a_prev.T @ g
        gb[l] = g.sum(axis=0)
        if l > 0:
            g = kernels.relu_backward(g @ net.weights[l].T, cache.preacts[l - 1])
    return Gradients(gw, gb)


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_network(cls, net: MlpNetwork, learning_rate: float) -> "AdamState":
        state = cls(learning_rate=float(learning_rate))
        for p in net.parameters():
            state.m.append(np.zeros_like(p))
            state.v.append(np.zeros_like(p))
        return state


def adam_step(net: MlpNetwork, grads: Gradients, state: AdamState):
    """Bias-corrected Adam update applied in place; bumps the step counter."""
    params = net.parameters()
    gparams = grads.parameters()
    if len(params) != len(state.m):
        raise ValueError("adam_step: state does not match network")
    state.step += 1
    bc1 = 1.0 - state.beta1**state.step
    bc2 = 1.0 - state.beta2**state.step
    for p, g, m, v in zip(params, gparams, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"adam_step: gradient shape {g.shape} != parameter {p.shape}")
        kernels.adam_update(
            p.reshape(-1),
            np.ascontiguousarray(g, dtype=np.float64).reshape(-1),
            m.reshape(-1),
            v.reshape(-1),
            state.learning_rate,
            state.beta1,
            state.beta2,
            state.eps,
            bc1,
            bc2,
        )
