#!/usr/bin/env python3
"""Benchmark the compression pipeline and its suppression kernels.

Times the end-to-end pipeline at the large LLaVA-NeXT-like shape
(T=2880, D=1024, N=160) with BLAS pinned to one thread, then compares the
compiled greedy-suppression kernel against the pure-Python fallback on the
same similarity blocks.

Usage:
    python benchmarks/bench_compress.py [--tokens 2880] [--dim 1024]
        [--budget 160] [--repeat 5]
"""

import argparse
import statistics
import time

import numpy as np
from threadpoolctl import threadpool_limits

from prunesid import compress, has_compiled_kernel, kernel_backend, psca_group
from prunesid._kernels import _nms_py
from prunesid.pruning import _normalize_with_count, _mean_similarity_from_normalized, nms_threshold

try:
    from prunesid._kernels import _nms_cy
except ImportError:
    _nms_cy = None


def time_fn(fn, repeat: int) -> list[float]:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return times


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tokens", type=int, default=2880)
    parser.add_argument("--dim", type=int, default=1024)
    parser.add_argument("--budget", type=int, default=160)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    X = rng.standard_normal((args.tokens, args.dim)).astype(np.float32)

    print(f"active kernel backend: {kernel_backend} "
          f"(compiled available: {has_compiled_kernel})")
    print(f"shape T={args.tokens} D={args.dim} N={args.budget}, "
          f"single BLAS thread, {args.repeat} runs")

    with threadpool_limits(limits=1):
        compress(X, args.budget, seed=args.seed)  # warm-up
        times = time_fn(lambda: compress(X, args.budget, seed=args.seed), args.repeat)
        best = min(times)
        result = compress(X, args.budget, seed=args.seed)
        print(f"\nend-to-end compress: best {best * 1e3:.1f} ms, "
              f"median {statistics.median(times) * 1e3:.1f} ms")
        for stage, us in sorted(result.timing_us.items()):
            print(f"  {stage:>16}: {us / 1000:.1f} ms")

        # kernel comparison on the real blocks of this instance
        assignment = psca_group(X, result.K, seed=args.seed, svd_iters=2)
        xn, nonzero = _normalize_with_count(np.asarray(X, dtype=np.float64))
        rho = _mean_similarity_from_normalized(xn, nonzero)
        tau, _ = nms_threshold(rho, args.budget)
        blocks = []
        for g in assignment.groups():
            if g.size == 0:
                continue
            block = np.ascontiguousarray(xn[g] @ xn[g].T)
            order = np.lexsort((g, -assignment.scores[g]))
            blocks.append((block, order))

        def sweep(kernel):
            for block, order in blocks:
                kernel(block, order, tau)

        impls = [("python", _nms_py.greedy_nms_block)]
        if _nms_cy is not None:
            impls.append(("compiled", _nms_cy.greedy_nms_block))
        print(f"\ngreedy suppression sweep over {len(blocks)} groups "
              f"(tau={tau:.4f}):")
        baseline = None
        for name, kernel in impls:
            sweep(kernel)  # warm-up
            t = min(time_fn(lambda: sweep(kernel), args.repeat))
            note = ""
            if baseline is None:
                baseline = t
            else:
                note = f"  ({baseline / t:.1f}x vs python)"
            print(f"  {name:>9}: {t * 1e3:.2f} ms{note}")

        if _nms_cy is not None:
            for block, order in blocks:
                a = _nms_py.greedy_nms_block(block, order, tau)
                b = _nms_cy.greedy_nms_block(block, order, tau)
                assert np.array_equal(a, b), "kernel outputs diverged"
            print("  survivor sets identical across kernels")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
