"""Finite-difference oracles used across the gradient tests."""

import numpy as np


def numeric_logit_grad(loss_of_logits, logits, h=1e-5):
    """Central-difference gradient of a scalar loss w.r.t. each logit entry."""
    z = logits.copy()
    grad = np.zeros_like(z)
    flat, gflat = z.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        lp = loss_of_logits(z)
        flat[i] = orig - h
        lm = loss_of_logits(z)
        flat[i] = orig
        gflat[i] = (lp - lm) / (2.0 * h)
    return grad


def numeric_param_grad(net, loss_fn, h=1e-5):
    """Central-difference gradient of loss_fn() w.r.t. every network parameter.

    loss_fn reads the network's current parameters; entries are perturbed in
    place and restored.
    """
    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp = loss_fn()
            flat[i] = orig - h
            lm = loss_fn()
            flat[i] = orig
            gflat[i] = (lp - lm) / (2.0 * h)
        grads.append(g)
    return grads


def rel_error(analytic, numeric):
    """Norm-based relative error between two gradient collections."""
    a = np.concatenate([np.ravel(x) for x in analytic])
    n = np.concatenate([np.ravel(x) for x in numeric])
    denom = max(np.linalg.norm(a), np.linalg.norm(n), 1e-12)
    return float(np.linalg.norm(a - n) / denom)
