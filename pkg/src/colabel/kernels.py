"""Core numeric operations over dense float64 matrices.

Dispatches to the compiled extension when it is installed, otherwise to the
pure-numpy fallback. Force a backend with COLABEL_BACKEND=compiled|python.
All probability/entropy math uses natural logarithms (nats).
"""

import os

import numpy as np

from . import _kernels_np

__all__ = [
    "BACKEND",
    "LOG_EPS",
    "softmax_rows",
    "shannon_entropy_rows",
    "cross_entropy",
    "softce_grad_logits",
    "entropy_grad_logits",
    "argmax_rows",
    "one_hot",
    "relu",
    "relu_backward",
    "adam_update",
    "as_matrix",
]

LOG_EPS = _kernels_np.LOG_EPS

_requested = os.environ.get("COLABEL_BACKEND", "auto").strip().lower()
if _requested in ("auto", "compiled"):
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "COLABEL_BACKEND=compiled but the colabel._kernels extension is not built"
            )
        _impl = _kernels_np
        BACKEND = "python"
elif _requested == "python":
    _impl = _kernels_np
    BACKEND = "python"
else:
    raise ValueError(f"unrecognized COLABEL_BACKEND={_requested!r} (use compiled|python)")


def as_matrix(a, name="matrix"):
    """Coerce to a C-contiguous float64 2-D array with at least one row/col."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name}: expected a non-empty 2-D matrix, got shape {np.shape(a)}")
    return m


def softmax_rows(logits):
    """Row-wise softmax, stabilized by per-row max subtraction."""
    m = as_matrix(logits, "logits")
    if not np.isfinite(m).all():
        raise ValueError("softmax_rows: logits contain non-finite values")
    return _impl.softmax_rows(m)


def shannon_entropy_rows(probs):
    """Per-row Shannon entropy in nats, with the 0*log(0) = 0 convention."""
    p = as_matrix(probs, "probs")
    if p.min() < 0.0:
        raise ValueError("shannon_entropy_rows: negative probability")
    sums = p.sum(axis=1)
    if np.abs(sums - 1.0).max() > 1e-9:
        raise ValueError("shannon_entropy_rows: rows must sum to 1 within 1e-9")
    return _impl.entropy_rows(p)


def cross_entropy(targets, probs):
    """Mean over rows of -sum_i t_i * log(q_i), q clamped below at LOG_EPS."""
    t = as_matrix(targets, "targets")
    q = as_matrix(probs, "probs")
    if t.shape != q.shape:
        raise ValueError(f"cross_entropy: shape mismatch {t.shape} vs {q.shape}")
    return _impl.cross_entropy_mean(t, q)


def softce_grad_logits(targets, probs):
    """Gradient of mean soft-target cross-entropy w.r.t. logits: (q - t) / n."""
    t = as_matrix(targets, "targets")
    q = as_matrix(probs, "probs")
    if t.shape != q.shape:
        raise ValueError(f"softce_grad_logits: shape mismatch {t.shape} vs {q.shape}")
    return _impl.softce_grad(t, q)


def entropy_grad_logits(probs):
    """Gradient of mean row entropy w.r.t. logits: -q_k (log q_k + H(q)) / n."""
    q = as_matrix(probs, "probs")
    return _impl.entropy_grad(q)


def argmax_rows(m):
    """Index of the maximal entry per row; ties break toward the lowest index."""
    a = as_matrix(m, "matrix")
    return np.argmax(a, axis=1)


def one_hot(labels, n_classes):
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1:
        raise ValueError("one_hot: labels must be 1-D")
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"one_hot: labels outside [0, {n_classes})")
    out = np.zeros((y.size, n_classes), dtype=np.float64)
    out[np.arange(y.size), y] = 1.0
    return out


def relu(x):
    return _impl.relu(as_matrix(x, "x"))


def relu_backward(grad_out, preact):
    g = as_matrix(grad_out, "grad_out")
    z = as_matrix(preact, "preact")
    if g.shape != z.shape:
        raise ValueError(f"relu_backward: shape mismatch {g.shape} vs {z.shape}")
    return _impl.relu_backward(g, z)


def adam_update(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    """In-place fused Adam update on flat float64 views."""
    _impl.adam_update(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2)
