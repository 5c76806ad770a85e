"""Time the numba kernels against the pure-numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py [--ball 200] [--batch 200000]

With DIFFNET_DISABLE_NUMBA=1 only the numpy column is produced.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from diffnet import _kernels as K
from diffnet.geometry import sample_haar_unitary


def _timeit(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ball", type=int, default=200,
                    help="points in the triple/commutator scans (cost ~K^3)")
    ap.add_argument("--batch", type=int, default=200_000,
                    help="matrices in the batched kernels")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    batch = np.stack([sample_haar_unitary(2, rng) for _ in range(512)])
    big = batch[rng.integers(0, 512, size=args.batch)].copy()
    ball = np.stack([sample_haar_unitary(2, rng) for _ in range(args.ball)])
    # pull the ball toward the identity so the scans have survivors
    ball = 0.97 * np.eye(2) + 0.03 * ball
    u, _, vh = np.linalg.svd(ball)
    ball = np.ascontiguousarray(u @ vh)

    cases = [
        ("pair_products (512x512)", K.pair_products_numpy,
         getattr(K, "pair_products", None), (batch, batch)),
        (f"su2_vectors ({args.batch})", K.su2_vectors_numpy,
         getattr(K, "su2_vectors", None), (big,)),
        (f"unity_distances ({args.batch})", K.unity_distances_numpy,
         getattr(K, "unity_distances", None), (big,)),
        (f"target_distances ({args.batch})", K.target_distances_numpy,
         getattr(K, "target_distances", None), (batch[0], big)),
        (f"triple_scan (K={args.ball})", K.triple_scan_numpy,
         getattr(K, "triple_scan", None), (ball, 0.3)),
        (f"commutator_scan (K={args.ball})", K.commutator_scan_numpy,
         getattr(K, "commutator_scan", None), (ball, 0.3)),
    ]

    print(f"active backend: {K.backend_name()}")
    header = f"{'kernel':34s} {'numpy [s]':>12s}"
    if K.USE_NUMBA:
        header += f" {'numba [s]':>12s} {'speedup':>9s}"
    print(header)
    for name, np_fn, active_fn, fn_args in cases:
        t_np, out_np = _timeit(np_fn, *fn_args)
        line = f"{name:34s} {t_np:12.4f}"
        if K.USE_NUMBA:
            active_fn(*fn_args)  # JIT warm-up outside the timed region
            t_nb, out_nb = _timeit(active_fn, *fn_args)
            if out_np.shape != out_nb.shape or not np.allclose(
                    out_np, out_nb, atol=1e-12):
                raise AssertionError(f"backend mismatch in {name}")
            line += f" {t_nb:12.4f} {t_np / t_nb:8.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
