"""Timing comparison of the numpy and numba kernel twins.

Run as a script; no arguments.  Each kernel is timed on a realistic
workload after a warmup call (the warmup also absorbs numba's JIT
compilation), and the table reports per-call wall time plus speedup.
"""

from __future__ import annotations

import time

import numpy as np

from projbalance.kernels import _numpy as knp

try:
    from projbalance.kernels import _numba as knb
except ImportError:
    knb = None


def _time(fn, *args, repeats: int = 5) -> float:
    fn(*args)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads():
    rng = np.random.default_rng(0)

    g = rng.standard_normal((2000, 100, 10))
    yield "mgs_columns (2000, d=100, k=10)", "mgs_columns", (g,)

    mats = knp.mgs_columns(rng.standard_normal((2000, 100, 10))).transpose(0, 2, 1)
    mats = np.ascontiguousarray(mats)
    vecs = rng.standard_normal((45, 100))
    sqn = np.einsum("md,md->m", vecs, vecs)
    yield (
        "frame_pair_stats (2000 frames, 45 pairs, d=100)",
        "frame_pair_stats",
        (mats, vecs, sqn, 10.0, False),
    )

    probes = knp.mgs_columns(rng.standard_normal((500, 30, 5))).transpose(0, 2, 1)
    cands = knp.mgs_columns(rng.standard_normal((400, 30, 5))).transpose(0, 2, 1)
    yield (
        "cross_min_frobenius (500 probes x 400 candidates, G_{5,30})",
        "cross_min_frobenius",
        (np.ascontiguousarray(probes), np.ascontiguousarray(cands)),
    )

    q = knp.mgs_columns(rng.standard_normal((20000, 50, 2)))
    cy = np.array([1.5, 0.0])
    cz = np.array([0.5, 1.0])
    ks = np.arange(1, 50, dtype=np.int64)
    yield (
        "moment_profile (20000 frames, d=50, 49 ranks)",
        "moment_profile",
        (q, cy, cz, ks),
    )


def main() -> None:
    if knb is None:
        print("numba backend unavailable; timing numpy only")
    header = f"{'kernel / workload':<52} {'numpy':>10} {'numba':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, name, args in _workloads():
        t_np = _time(getattr(knp, name), *args)
        if knb is not None:
            t_nb = _time(getattr(knb, name), *args)
            ratio = t_np / t_nb if t_nb > 0 else float("inf")
            print(f"{label:<52} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {ratio:>7.2f}x")
        else:
            print(f"{label:<52} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
