# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled hot kernels: fused row softmax/entropy, cross-entropy terms, Adam.

Same surface as `colabel._kernels_np`; matmuls stay on BLAS in both backends,
these cover the per-batch elementwise and row-reduction work.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt

cnp.import_array()

cdef double LOG_EPS = 1e-12


def softmax_rows(double[:, ::1] logits):
    cdef Py_ssize_t n = logits.shape[0]
    cdef Py_ssize_t c = logits.shape[1]
    out_arr = np.empty((n, c), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double mx, s, e
    with nogil:
        for i in range(n):
            mx = logits[i, 0]
            for j in range(1, c):
                if logits[i, j] > mx:
                    mx = logits[i, j]
            s = 0.0
            for j in range(c):
                e = exp(logits[i, j] - mx)
                out[i, j] = e
                s += e
            for j in range(c):
                out[i, j] /= s
    return out_arr


def entropy_rows(double[:, ::1] probs):
    cdef Py_ssize_t n = probs.shape[0]
    cdef Py_ssize_t c = probs.shape[1]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double h, p
    with nogil:
        for i in range(n):
            h = 0.0
            for j in range(c):
                p = probs[i, j]
                h -= p * log(p if p > LOG_EPS else LOG_EPS)
            out[i] = h
    return out_arr


def cross_entropy_mean(double[:, ::1] targets, double[:, ::1] probs):
    cdef Py_ssize_t n = targets.shape[0]
    cdef Py_ssize_t c = targets.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    cdef double q
    with nogil:
        for i in range(n):
            for j in range(c):
                q = probs[i, j]
                acc -= targets[i, j] * log(q if q > LOG_EPS else LOG_EPS)
    return acc / n


def softce_grad(double[:, ::1] targets, double[:, ::1] probs):
    cdef Py_ssize_t n = targets.shape[0]
    cdef Py_ssize_t c = targets.shape[1]
    out_arr = np.empty((n, c), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double dn = <double> n
    with nogil:
        for i in range(n):
            for j in range(c):
                out[i, j] = (probs[i, j] - targets[i, j]) / dn
    return out_arr


def entropy_grad(double[:, ::1] probs):
    cdef Py_ssize_t n = probs.shape[0]
    cdef Py_ssize_t c = probs.shape[1]
    out_arr = np.empty((n, c), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double h, p, lq
    cdef double dn = <double> n
    with nogil:
        for i in range(n):
            h = 0.0
            for j in range(c):
                p = probs[i, j]
                h -= p * log(p if p > LOG_EPS else LOG_EPS)
            for j in range(c):
                p = probs[i, j]
                lq = log(p if p > LOG_EPS else LOG_EPS)
                out[i, j] = ((-p) * (lq + h)) / dn
    return out_arr


def relu(double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t c = x.shape[1]
    out_arr = np.empty((n, c), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(c):
                # branchless: gate with the comparison result
                out[i, j] = x[i, j] * <double> (x[i, j] > 0.0)
    return out_arr


def relu_backward(double[:, ::1] grad_out, double[:, ::1] preact):
    cdef Py_ssize_t n = grad_out.shape[0]
    cdef Py_ssize_t c = grad_out.shape[1]
    out_arr = np.empty((n, c), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(c):
                out[i, j] = grad_out[i, j] * <double> (preact[i, j] > 0.0)
    return out_arr


def adam_update(double[::1] param, double[::1] grad, double[::1] m, double[::1] v,
                double lr, double beta1, double beta2, double eps,
                double bc1, double bc2):
    cdef Py_ssize_t n = param.shape[0]
    cdef Py_ssize_t i
    cdef double g, mhat, vhat
    with nogil:
        for i in range(n):
            g = grad[i]
            m[i] = beta1 * m[i] + (1.0 - beta1) * g
            v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g)
            mhat = m[i] / bc1
            vhat = v[i] / bc2
            param[i] = param[i] - (lr * mhat) / (sqrt(vhat) + eps)
