"""Numba kernel implementations (jit-compiled loops).

Same contracts as ``_numpy.py``; see that module's docstring.  Loops are
written cache-friendly (innermost index contiguous) and compiled with
fastmath so the reductions vectorize.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def _mgs_columns_impl(q):
    s, d, c = q.shape
    for t in range(s):
        for j in range(c):
            for i in range(j):
                coef = 0.0
                for a in range(d):
                    coef += q[t, a, i] * q[t, a, j]
                for a in range(d):
                    q[t, a, j] -= coef * q[t, a, i]
            norm = 0.0
            for a in range(d):
                norm += q[t, a, j] * q[t, a, j]
            inv = 1.0 / np.sqrt(norm)
            for a in range(d):
                q[t, a, j] *= inv


def mgs_columns(g: np.ndarray) -> np.ndarray:
    q = np.ascontiguousarray(g, dtype=np.float64).copy()
    _mgs_columns_impl(q)
    return q


@njit(cache=True, fastmath=True)
def _frame_pair_stats_impl(mats, vecs, sq_norms, scale, complement, out):
    s, w, n = mats.shape
    m = vecs.shape[0]
    for t in range(s):
        total = 0.0
        r_sum = 0.0
        r_sq_sum = 0.0
        r_min = np.inf
        r_max = -np.inf
        for a in range(m):
            q = 0.0
            for j in range(w):
                dot = 0.0
                for c in range(n):
                    dot += mats[t, j, c] * vecs[a, c]
                q += dot * dot
            if complement:
                q = sq_norms[a] - q
            total += q
            r = scale * q / sq_norms[a]
            r_sum += r
            r_sq_sum += r * r
            if r < r_min:
                r_min = r
            if r > r_max:
                r_max = r
        out[t, 0] = total
        out[t, 1] = r_sum / m
        out[t, 2] = r_sq_sum / m
        out[t, 3] = r_min
        out[t, 4] = r_max


def frame_pair_stats(
    mats: np.ndarray,
    vecs: np.ndarray,
    sq_norms: np.ndarray,
    scale: float,
    complement: bool,
) -> np.ndarray:
    mats = np.ascontiguousarray(mats, dtype=np.float64)
    vecs = np.ascontiguousarray(vecs, dtype=np.float64)
    sq_norms = np.ascontiguousarray(sq_norms, dtype=np.float64)
    out = np.empty((mats.shape[0], 5))
    _frame_pair_stats_impl(mats, vecs, sq_norms, float(scale), complement, out)
    return out


@njit(cache=True, fastmath=True)
def _cross_min_frobenius_impl(probes, cands, out):
    s, k, d = probes.shape
    l = cands.shape[0]
    for t in range(s):
        best = np.inf
        for c in range(l):
            gram_sq = 0.0
            for i in range(k):
                for j in range(k):
                    dot = 0.0
                    for a in range(d):
                        dot += probes[t, i, a] * cands[c, j, a]
                    gram_sq += dot * dot
            d_sq = 2.0 * k - 2.0 * gram_sq
            if d_sq < 0.0:
                d_sq = 0.0
            if d_sq < best:
                best = d_sq
        out[t] = np.sqrt(best)


def cross_min_frobenius(probes: np.ndarray, cands: np.ndarray) -> np.ndarray:
    probes = np.ascontiguousarray(probes, dtype=np.float64)
    cands = np.ascontiguousarray(cands, dtype=np.float64)
    out = np.empty(probes.shape[0])
    _cross_min_frobenius_impl(probes, cands, out)
    return out


@njit(cache=True, fastmath=True)
def _moment_profile_impl(q, cy, cz, idx, sums):
    s, d, r = q.shape
    kk = idx.shape[0]
    for t in range(s):
        g11 = 0.0
        g12 = 0.0
        g22 = 0.0
        pos = 0
        for a in range(d):
            q0 = q[t, a, 0]
            g11 += q0 * q0
            if r == 2:
                q1 = q[t, a, 1]
                g12 += q0 * q1
                g22 += q1 * q1
            while pos < kk and idx[pos] == a:
                if r == 2:
                    u = (
                        cy[0] * cy[0] * g11
                        + 2.0 * cy[0] * cy[1] * g12
                        + cy[1] * cy[1] * g22
                    )
                    v = (
                        cz[0] * cz[0] * g11
                        + 2.0 * cz[0] * cz[1] * g12
                        + cz[1] * cz[1] * g22
                    )
                else:
                    u = cy[0] * cy[0] * g11
                    v = cz[0] * cz[0] * g11
                sums[pos, 0] += u
                sums[pos, 1] += u * v
                pos += 1
            if pos == kk:
                break


def moment_profile(
    q: np.ndarray, cy: np.ndarray, cz: np.ndarray, ks: np.ndarray
) -> np.ndarray:
    q = np.ascontiguousarray(q, dtype=np.float64)
    cy = np.ascontiguousarray(cy, dtype=np.float64)
    cz = np.ascontiguousarray(cz, dtype=np.float64)
    idx = np.asarray(ks, dtype=np.int64) - 1
    sums = np.zeros((idx.shape[0], 2))
    _moment_profile_impl(q, cy, cz, idx, sums)
    return sums
