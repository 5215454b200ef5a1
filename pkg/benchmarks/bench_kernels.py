#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure-numpy fallback.

Micro-benchmarks cover the per-batch hot kernels at training shapes; --train
times a short end-to-end run per backend in subprocesses (backend choice is
an import-time decision).

Usage: python benchmarks/bench_kernels.py [--train]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from colabel import _kernels_np
from colabel.rng import SeededRng

try:
    from colabel import _kernels as ext
except ImportError:
    ext = None


def timeit(fn, repeats=2000):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_micro():
    rng = SeededRng(0, "bench")
    batch_logits = rng.normal((128, 10)) * 3.0
    batch_probs = _kernels_np.softmax_rows(batch_logits)
    batch_targets = _kernels_np.softmax_rows(rng.normal((128, 10)))
    hidden = rng.normal((128, 256))
    w = rng.normal((784, 256)).reshape(-1)
    wg = rng.normal((784, 256)).reshape(-1)
    m = np.zeros(w.size)
    v = np.zeros(w.size)

    cases = [
        ("softmax_rows 128x10", lambda k: k.softmax_rows(batch_logits)),
        ("entropy_rows 128x10", lambda k: k.entropy_rows(batch_probs)),
        ("cross_entropy 128x10", lambda k: k.cross_entropy_mean(batch_targets, batch_probs)),
        ("softce_grad 128x10", lambda k: k.softce_grad(batch_targets, batch_probs)),
        ("entropy_grad 128x10", lambda k: k.entropy_grad(batch_probs)),
        ("relu 128x256", lambda k: k.relu(hidden)),
        ("relu_backward 128x256", lambda k: k.relu_backward(hidden, hidden)),
        (
            "adam_update 784x256",
            lambda k: k.adam_update(w, wg, m, v, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001),
        ),
    ]
    print(f"{'kernel':<24} {'numpy':>12} {'compiled':>12} {'speedup':>8}")
    for name, call in cases:
        t_np = timeit(lambda: call(_kernels_np))
        if ext is None:
            print(f"{name:<24} {t_np * 1e6:>10.1f}us {'n/a':>12} {'n/a':>8}")
            continue
        t_c = timeit(lambda: call(ext))
        print(f"{name:<24} {t_np * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us {t_np / t_c:>7.1f}x")


_TRAIN_SNIPPET = """
import time
import numpy as np
from colabel import kernels, NoiseSpec, SeededRng, build_transition, inject_noise
from colabel import gen_gaussian_blobs, train_test_split
from colabel.train.clc import ClcConfig, train_clc

full = gen_gaussian_blobs(10, 300, 64, 8.0, SeededRng(0, "data/gen"))
train, test = train_test_split(full, 0.25, SeededRng(0, "data/split"))
t = build_transition(NoiseSpec("symmetric", 0.5), 10)
train = train.with_noisy_labels(inject_noise(train.clean_labels, t, SeededRng(0, "noise")))
cfg = ClcConfig(total_epochs=15, warm_up_epochs=5, seed=1, hidden_dims=(128,))
start = time.perf_counter()
train_clc(train, test, cfg)
print(f"{kernels.BACKEND}: {time.perf_counter() - start:.2f}s for 15 dual-net epochs")
"""


def bench_train():
    for backend in ("python", "compiled"):
        if backend == "compiled" and ext is None:
            print("compiled: extension not built, skipping")
            continue
        env = dict(os.environ, COLABEL_BACKEND=backend)
        subprocess.run([sys.executable, "-c", _TRAIN_SNIPPET], env=env, check=True)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train", action="store_true", help="also time end-to-end training")
    args = parser.parse_args()
    if ext is None:
        print("note: compiled extension not available, micro-bench shows numpy only")
    bench_micro()
    if args.train:
        print()
        bench_train()
