#!/usr/bin/env python3
"""Benchmark the forest kernels: numba backend vs the pure-numpy fallback.

Workloads mirror the pipeline's hot loop (bagged entropy trees over binary
blocking features).  The first numba call includes JIT compilation, so each
backend gets an untimed warmup before measurement.

Usage: python benchmarks/bench_forest.py [--repeats N]
"""

import argparse
import json
import time

import numpy as np

from adtomo.forest import ForestParams, Sample, kernels, predict_batch, train_forest


def make_samples(n, f, positive_rate, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, size=(n, f))
    y = rng.random(n) < positive_rate
    return [Sample(tuple(int(v) for v in row), bool(label), f"p{i % (n // 8):03d}")
            for i, (row, label) in enumerate(zip(X, y))]


WORKLOADS = [
    # (name, samples, features, trees, max_depth)
    ("ci-scale train", 512, 6, 100, None),
    ("desk-scale train", 4096, 10, 100, None),
    ("shallow grid point", 512, 6, 200, 3),
]


def run_backend(backend, samples_by_name, params_by_name, repeats):
    kernels.set_backend(backend)
    results = {}
    for name, _, _, _, _ in WORKLOADS:
        samples = samples_by_name[name]
        params = params_by_name[name]
        train_forest(samples, params, seed=1)  # warmup (JIT compile on numba)
        best = float("inf")
        for r in range(repeats):
            t0 = time.perf_counter()
            model = train_forest(samples, params, seed=2 + r)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, model)
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    samples_by_name = {}
    params_by_name = {}
    for name, n, f, trees, depth in WORKLOADS:
        samples_by_name[name] = make_samples(n, f, 0.4, seed=hash(name) % 2**16)
        params_by_name[name] = ForestParams(n_trees=trees, max_depth=depth,
                                            features_per_split="sqrt", min_leaf=1)

    available = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    timings = {b: run_backend(b, samples_by_name, params_by_name, args.repeats)
               for b in available}

    print(f"{'workload':<22} " + " ".join(f"{b + ' (s)':>12}" for b in available)
          + ("      speedup" if len(available) == 2 else ""))
    for name, *_ in WORKLOADS:
        row = f"{name:<22} "
        row += " ".join(f"{timings[b][name][0]:>12.4f}" for b in available)
        if len(available) == 2:
            row += f"{timings['numpy'][name][0] / timings['numba'][name][0]:>11.1f}x"
        print(row)

    if len(available) == 2:
        X = np.random.default_rng(0).integers(0, 2, (256, 6)).astype(np.uint8)
        agree = True
        for name, *_ in WORKLOADS[:1]:
            m_np = timings["numpy"][name][1]
            m_nb = timings["numba"][name][1]
            agree &= json.dumps(m_np.to_dict()) == json.dumps(m_nb.to_dict())
            kernels.set_backend("numpy")
            p_np = predict_batch(m_np, X)
            kernels.set_backend("numba")
            p_nb = predict_batch(m_nb, X)
            agree &= bool(np.array_equal(p_np, p_nb))
        print(f"\nbackends bit-identical: {agree}")


if __name__ == "__main__":
    main()
