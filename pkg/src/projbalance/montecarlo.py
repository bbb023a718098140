"""Monte Carlo sampling of pair statistics under the invariant measure.

For a cloud x and rank k, each draw P ~ lambda_{k,d} yields the triple
(tvar(Px), M(P,x), V(P,x)) plus the extreme scaled distortions.  Two
exact reparametrizations keep this affordable:

* complement sampling: I - P' with P' ~ lambda_{d-k,d} has the law of
  P ~ lambda_{k,d}, and ||P y||^2 = ||y||^2 - ||P' y||^2, so only rank
  k_eff = min(k, d-k) is ever sampled;

* subspace reduction: the pair differences span an r-dimensional
  subspace with orthonormal basis W (r <= min(m-1, d)), and the
  restriction B = W^T P W satisfies B = R^{-T} A1 R^{-1} in distribution,
  where A1 ~ Wishart_r(k_eff) and A2 ~ Wishart_r(d - k_eff) are
  independent and R^T R = A1 + A2 is the Cholesky factorization.  (Thin
  QR of a d x r Gaussian G gives a uniform frame Q; W^T P W equals
  Q^T diag(I_k, 0) Q in law, which is R^{-T} G1^T G1 R^{-1} with
  G^T G = A1 + A2.)  Wishart factors come from Bartlett decompositions
  when the degrees of freedom reach r, else from explicit Gaussians.
  Then ||P y_a||^2 = c_a^T B c_a for the reduced coordinates c_a, and no
  d-dimensional object is sampled at all.

The engine is chosen per call by a flop/draw cost model ("auto"), or
forced with engine="direct" / engine="reduced".  Both engines consume
the numpy Generator in a fixed order, so results are reproducible per
(seed, engine, backend); the two engines agree in distribution, not
draw by draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError
from .grassmann import PointCloud, as_generator

# Target float64 elements per sampling chunk (~32 MB); fixed so the
# random stream does not depend on the backend.
_CHUNK_ELEMS = 4_000_000

# One random draw costs roughly this many kernel flops (measured: ~50M
# normals/s against ~5-20 GFLOP/s kernels).
_RV_WEIGHT = 100.0

# Relative singular-value cutoff for the numerical rank of the pair span.
_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class HaarPairStats:
    """Per-draw pair statistics over n independent invariant projectors."""

    tvar: np.ndarray
    mean_rel: np.ndarray
    var_rel: np.ndarray
    min_rel: np.ndarray
    max_rel: np.ndarray
    engine: str


def subspace_coords(diffs: np.ndarray) -> np.ndarray:
    """Coordinates of the rows of ``diffs`` in an orthonormal basis of their span.

    Returns (n_pairs, r) with r the numerical rank; row norms are
    preserved, so downstream quadratic forms are unchanged.
    """
    u, s, _ = np.linalg.svd(diffs, full_matrices=False)
    r = int(np.count_nonzero(s > s[0] * _RANK_RTOL)) if s.size else 0
    if r == 0:
        raise DimensionError("pair differences span a zero-dimensional space")
    return u[:, :r] * s[:r]


def _engine_costs(m_pairs: int, d: int, k_eff: int, r: int) -> tuple[float, float]:
    gauss_direct = d * k_eff
    flops_direct = 2.0 * d * k_eff * k_eff + 2.0 * m_pairs * d * k_eff
    cost_direct = flops_direct + _RV_WEIGHT * gauss_direct

    w1 = min(k_eff, r)
    w2 = min(d - k_eff, r)
    draws = (r * (r - 1) // 2 + r if k_eff >= r else k_eff * r) + (
        r * (r - 1) // 2 + r if d - k_eff >= r else (d - k_eff) * r
    )
    flops_reduced = (
        2.0 * r * r * (w1 + w2)  # form A1 + A2
        + r**3  # Cholesky and triangular solve
        + m_pairs * (r * r + 2.0 * r * w1)  # per-pair quadratic forms
    )
    cost_reduced = flops_reduced + _RV_WEIGHT * draws
    return cost_direct, cost_reduced


def _wishart_factor(
    rng: np.random.Generator, n_chunk: int, r: int, dof: int
) -> np.ndarray:
    """(n_chunk, r, w) stack F with F F^T ~ Wishart_r(dof, I)."""
    if dof >= r:
        t = np.zeros((n_chunk, r, r))
        lo = np.tril_indices(r, -1)
        if lo[0].size:
            t[:, lo[0], lo[1]] = rng.standard_normal((n_chunk, lo[0].size))
        dofs = dof - np.arange(r)
        ar = np.arange(r)
        t[:, ar, ar] = np.sqrt(rng.chisquare(dofs, (n_chunk, r)))
        return t
    g = rng.standard_normal((n_chunk, dof, r))
    return g.transpose(0, 2, 1)


def pair_stats_over_haar(
    x: PointCloud,
    k: int,
    n_samples: int,
    seed: int | np.random.Generator | None,
    engine: str = "auto",
) -> HaarPairStats:
    """Sample (tvar(Px), M, V, min/max distortion) over n_samples draws."""
    d = x.d
    if not 1 <= k <= d:
        raise DimensionError(f"need 1 <= k <= d={d}, got k={k}")
    if n_samples < 1:
        raise DimensionError(f"need n_samples >= 1, got {n_samples}")
    if engine not in ("auto", "direct", "reduced"):
        raise ValueError(f"unknown engine {engine!r}")
    x.require_distinct()

    m_pairs = x.n_pairs
    sqn = x.pair_sq_dists
    tvar_x = float(sqn.sum()) / (x.m * (x.m - 1))

    if k == d:
        ones = np.ones(n_samples)
        return HaarPairStats(
            tvar=np.full(n_samples, tvar_x),
            mean_rel=ones,
            var_rel=np.zeros(n_samples),
            min_rel=ones.copy(),
            max_rel=ones.copy(),
            engine="identity",
        )

    k_eff = min(k, d - k)
    complement = k_eff != k
    scale = d / k

    coords = None
    if engine != "direct":
        coords = subspace_coords(x.pair_diffs)
        r = coords.shape[1]
        if engine == "auto":
            cost_direct, cost_reduced = _engine_costs(m_pairs, d, k_eff, r)
            engine = "reduced" if cost_reduced < cost_direct else "direct"
        else:
            engine = "reduced"

    rng = as_generator(seed)
    out = np.empty((n_samples, 5))

    if engine == "direct":
        per_sample = max(d * k_eff, 1)
        step = max(1, min(n_samples, _CHUNK_ELEMS // per_sample))
        for lo in range(0, n_samples, step):
            hi = min(lo + step, n_samples)
            g = rng.standard_normal((hi - lo, d, k_eff))
            q = kernels.mgs_columns(g)
            mats = q.transpose(0, 2, 1)
            out[lo:hi] = kernels.frame_pair_stats(
                mats, x.pair_diffs, sqn, scale, complement
            )
    else:
        r = coords.shape[1]
        per_sample = max(4 * r * r + r * (min(k_eff, r) + min(d - k_eff, r)), 1)
        step = max(1, min(n_samples, _CHUNK_ELEMS // per_sample))
        for lo in range(0, n_samples, step):
            hi = min(lo + step, n_samples)
            c = hi - lo
            f1 = _wishart_factor(rng, c, r, k_eff)
            f2 = _wishart_factor(rng, c, r, d - k_eff)
            a = f1 @ f1.transpose(0, 2, 1) + f2 @ f2.transpose(0, 2, 1)
            l_fac = np.linalg.cholesky(a)
            mats = np.linalg.solve(l_fac, f1).transpose(0, 2, 1)
            out[lo:hi] = kernels.frame_pair_stats(
                mats, coords, sqn, scale, complement
            )

    mean_rel = out[:, 1]
    var_rel = np.maximum(out[:, 2] - mean_rel * mean_rel, 0.0)
    return HaarPairStats(
        tvar=out[:, 0] / (x.m * (x.m - 1)),
        mean_rel=mean_rel.copy(),
        var_rel=var_rel,
        min_rel=out[:, 3].copy(),
        max_rel=out[:, 4].copy(),
        engine=engine,
    )
