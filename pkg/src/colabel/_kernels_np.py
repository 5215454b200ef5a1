"""Pure-numpy implementations of the hot per-batch kernels.

Mirrors the compiled extension `colabel._kernels` operation for operation so
either backend can serve `colabel.kernels`. Inputs are validated by the
dispatching wrappers, not here.
"""

import numpy as np

LOG_EPS = 1e-12


def softmax_rows(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def entropy_rows(probs):
    logp = np.log(np.maximum(probs, LOG_EPS))
    return -(probs * logp).sum(axis=1)


def cross_entropy_mean(targets, probs):
    logq = np.log(np.maximum(probs, LOG_EPS))
    return float(-(targets * logq).sum() / targets.shape[0])


def softce_grad(targets, probs):
    return (probs - targets) / targets.shape[0]


def entropy_grad(probs):
    logq = np.log(np.maximum(probs, LOG_EPS))
    h = -(probs * logq).sum(axis=1)
    return (-probs) * (logq + h[:, None]) / probs.shape[0]


def relu(x):
    return np.maximum(x, 0.0)


def relu_backward(grad_out, preact):
    return grad_out * (preact > 0.0)


def adam_update(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * (grad * grad)
    mhat = m / bc1
    vhat = v / bc2
    param -= (lr * mhat) / (np.sqrt(vhat) + eps)
