"""Pure-numpy kernel implementations (batched BLAS, chunked temporaries).

Contracts shared with the numba twin in ``_numba.py``:

mgs_columns(g)
    Orthonormalize the columns of every matrix in a (S, d, c) stack by
    modified Gram-Schmidt, c <= d.  Returns a new (S, d, c) array.  With
    Gaussian input this realizes thin QR with the positive-diagonal-R
    convention, so the output columns are uniform on the Stiefel manifold.

frame_pair_stats(mats, vecs, sq_norms, scale, complement)
    For every matrix A_s in the (S, w, n) stack and every row v_a of the
    (M, n) array, let q_a = ||A_s v_a||^2, complemented to
    sq_norms[a] - q_a when ``complement`` is true, and
    r_a = scale * q_a / sq_norms[a].  Returns (S, 5) columns:
    sum_a q_a, mean_a r_a, mean_a r_a^2, min_a r_a, max_a r_a.

cross_min_frobenius(probes, cands)
    probes (S, k, d), cands (L, k, d), all with orthonormal rows.  Returns
    (S,) of min_l sqrt(max(2k - 2 ||probe_s cand_l^T||_F^2, 0)), the
    smallest Frobenius distance between the induced projectors.

moment_profile(q, cy, cz, ks)
    q (S, d, r) with orthonormal columns, r in {1, 2}; cy, cz (r,);
    ks (K,) strictly increasing ints in [1, d].  With B_s(k) the Gram
    matrix of the first k rows of q_s, accumulates over samples
    u = cy^T B_s(k) cy and v = cz^T B_s(k) cz.  Returns (K, 2) columns:
    sum_s u, sum_s u*v.
"""

from __future__ import annotations

import numpy as np

# Soft cap on the largest temporary, in float64 elements (~64 MB).
_CHUNK_ELEMS = 8_000_000


def mgs_columns(g: np.ndarray) -> np.ndarray:
    q = np.array(g, dtype=np.float64, copy=True)
    s, d, c = q.shape
    for j in range(c):
        col = q[:, :, j]
        for i in range(j):
            prev = q[:, :, i]
            coef = np.einsum("sd,sd->s", prev, col)
            col -= coef[:, None] * prev
        norm = np.sqrt(np.einsum("sd,sd->s", col, col))
        col /= norm[:, None]
    return q


def frame_pair_stats(
    mats: np.ndarray,
    vecs: np.ndarray,
    sq_norms: np.ndarray,
    scale: float,
    complement: bool,
) -> np.ndarray:
    s, w, n = mats.shape
    m = vecs.shape[0]
    out = np.empty((s, 5))
    vt = np.ascontiguousarray(vecs.T)
    inv_sq = 1.0 / sq_norms
    step = max(1, _CHUNK_ELEMS // max(m * w, 1))
    for lo in range(0, s, step):
        hi = min(lo + step, s)
        block = mats[lo:hi].reshape((hi - lo) * w, n)
        proj = (block @ vt).reshape(hi - lo, w, m)
        proj_sq = np.einsum("cwa,cwa->ca", proj, proj)
        if complement:
            proj_sq = sq_norms[None, :] - proj_sq
        out[lo:hi, 0] = proj_sq.sum(axis=1)
        ratios = proj_sq * (scale * inv_sq)[None, :]
        out[lo:hi, 1] = ratios.mean(axis=1)
        out[lo:hi, 2] = np.einsum("ca,ca->c", ratios, ratios) / m
        out[lo:hi, 3] = ratios.min(axis=1)
        out[lo:hi, 4] = ratios.max(axis=1)
    return out


def cross_min_frobenius(probes: np.ndarray, cands: np.ndarray) -> np.ndarray:
    s, k, d = probes.shape
    l = cands.shape[0]
    ct = np.ascontiguousarray(cands.reshape(l * k, d).T)
    out = np.empty(s)
    step = max(1, _CHUNK_ELEMS // max(l * k * k, 1))
    for lo in range(0, s, step):
        hi = min(lo + step, s)
        g = probes[lo:hi].reshape((hi - lo) * k, d) @ ct
        g *= g
        gram_sq = g.reshape(hi - lo, k, l, k).sum(axis=(1, 3))
        d_sq = np.maximum(2.0 * k - 2.0 * gram_sq, 0.0)
        out[lo:hi] = np.sqrt(d_sq.min(axis=1))
    return out


def moment_profile(
    q: np.ndarray, cy: np.ndarray, cz: np.ndarray, ks: np.ndarray
) -> np.ndarray:
    s, d, r = q.shape
    idx = np.asarray(ks, dtype=np.int64) - 1
    sums = np.zeros((idx.shape[0], 2))
    step = max(1, _CHUNK_ELEMS // max(3 * d, 1))
    for lo in range(0, s, step):
        hi = min(lo + step, s)
        q0 = q[lo:hi, :, 0]
        g11 = np.cumsum(q0 * q0, axis=1)[:, idx]
        if r == 2:
            q1 = q[lo:hi, :, 1]
            g12 = np.cumsum(q0 * q1, axis=1)[:, idx]
            g22 = np.cumsum(q1 * q1, axis=1)[:, idx]
            u = cy[0] * cy[0] * g11 + 2.0 * cy[0] * cy[1] * g12 + cy[1] * cy[1] * g22
            v = cz[0] * cz[0] * g11 + 2.0 * cz[0] * cz[1] * g12 + cz[1] * cz[1] * g22
        else:
            u = cy[0] * cy[0] * g11
            v = cz[0] * cz[0] * g11
        sums[:, 0] += u.sum(axis=0)
        sums[:, 1] += np.einsum("ck,ck->k", u, v)
    return sums
