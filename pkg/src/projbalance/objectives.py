"""Distortion and variance objectives for projected point clouds.

For a cloud x = (x_1, ..., x_m) in R^d the total variance is

    tvar(x) = (1/(m-1)) sum_i ||x_i - mean(x)||^2
            = (1/(m(m-1))) sum_{i != j} ||x_i - x_j||^2,

and for a rank-k projector p the scaled pairwise distortions are

    r_ij = (d/k) ||p(x_i - x_j)||^2 / ||x_i - x_j||^2,

whose mean M(p, x) and uncorrected variance V(p, x) over the m(m-1)/2
unordered pairs summarize how faithfully p preserves the cloud's shape:
M near 1 means distances are preserved on average, small V means they
are preserved uniformly.  Random-projection guarantees connect these to
the embedding dimension: k >= 4 ln(m) / (eps^2/2 - eps^3/3) admits a
projection with all |r_ij - 1| <= eps after rescaling by d/k, and a
rank-k projector within Frobenius distance rho of one that eps-embeds
the cloud embeds it with distortion at most
delta = eps + 2 rho sqrt((1+eps) d/k) + (d/k) rho^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError
from .grassmann import PointCloud, Projector, StiefelFrame


@dataclass(frozen=True)
class ProjectionSummary:
    """The triple (tvar(px), M(p,x), V(p,x)) for one projector and cloud."""

    tvar: float
    mean_rel: float
    var_rel: float

    def to_json_dict(self) -> dict:
        return {"tvar": self.tvar, "M": self.mean_rel, "V": self.var_rel}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ProjectionSummary":
        return cls(float(obj["tvar"]), float(obj["M"]), float(obj["V"]))


@dataclass(frozen=True)
class JLParams:
    """A target dimension k_min certified for (m, epsilon, tau).

    With k >= k_min, a random rank-k projector scaled by d/k preserves
    all pairwise distances of any m points to within a factor 1 +- eps
    with probability at least 1 - 1/m^tau + 1/m^(tau+1).
    """

    epsilon: float
    tau: float
    m: int
    k_min: int


def _check_epsilon(epsilon: float) -> float:
    eps = float(epsilon)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps!r}")
    return eps


def total_variance(x: PointCloud) -> float:
    """tvar(x), computed from deviations around the mean."""
    centered = x.points - x.mean()
    return float(np.einsum("id,id->", centered, centered)) / (x.m - 1)


def _pair_ratio_data(x: PointCloud, p: Projector | StiefelFrame):
    """(proj_sq, sq_dists, d, k) for the pair differences of x under p."""
    x.require_distinct()
    diffs = x.pair_diffs
    if isinstance(p, StiefelFrame):
        if p.d != x.d:
            raise DimensionError(f"ambient dimensions differ: {p.d} vs {x.d}")
        proj = diffs @ p.rows.T
        proj_sq = np.einsum("ak,ak->a", proj, proj)
        return proj_sq, x.pair_sq_dists, p.d, p.k
    if p.d != x.d:
        raise DimensionError(f"ambient dimensions differ: {p.d} vs {x.d}")
    proj_sq = np.einsum("ai,ij,aj->a", diffs, p.matrix, diffs, optimize=True)
    return proj_sq, x.pair_sq_dists, p.d, p.k


def relative_distortions(x: PointCloud, p: Projector | StiefelFrame) -> np.ndarray:
    """Scaled distortions (d/k) ||p(x_i - x_j)||^2 / ||x_i - x_j||^2.

    Ordered over pairs i < j lexicographically, matching
    ``PointCloud.pair_diffs``.
    """
    proj_sq, sq_dists, d, k = _pair_ratio_data(x, p)
    return (d / k) * proj_sq / sq_dists


def summarize(x: PointCloud, p: Projector | StiefelFrame) -> ProjectionSummary:
    """Compute (tvar(px), M(p,x), V(p,x)) for one projector."""
    proj_sq, sq_dists, d, k = _pair_ratio_data(x, p)
    ratios = (d / k) * proj_sq / sq_dists
    mean_rel = float(ratios.mean())
    dev = ratios - mean_rel
    var_rel = float(np.einsum("a,a->", dev, dev)) / ratios.size
    tvar_p = float(proj_sq.sum()) / (x.m * (x.m - 1))
    return ProjectionSummary(tvar=tvar_p, mean_rel=mean_rel, var_rel=var_rel)


def summarize_frames(x: PointCloud, frames: np.ndarray) -> np.ndarray:
    """Summaries for a stack of frames at once.

    ``frames`` is (L, k, d) with orthonormal rows per frame.  Returns an
    (L, 3) array with columns (tvar, M, V), matching ``summarize`` on
    each frame's projector to floating-point accuracy.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 3:
        raise DimensionError(f"frames must be (L, k, d), got shape {frames.shape}")
    l, k, d = frames.shape
    if d != x.d:
        raise DimensionError(f"ambient dimensions differ: {d} vs {x.d}")
    x.require_distinct()
    raw = kernels.frame_pair_stats(
        frames, x.pair_diffs, x.pair_sq_dists, d / k, False
    )
    out = np.empty((l, 3))
    out[:, 0] = raw[:, 0] / (x.m * (x.m - 1))
    out[:, 1] = raw[:, 1]
    out[:, 2] = np.maximum(raw[:, 2] - raw[:, 1] ** 2, 0.0)
    return out


def jl_min_dimension(m: int, epsilon: float) -> int:
    """Smallest k with k >= 4 ln(m) / (eps^2/2 - eps^3/3)."""
    eps = _check_epsilon(epsilon)
    if m < 2:
        raise ValueError(f"need m >= 2 points, got {m}")
    return math.ceil(4.0 * math.log(m) / (eps * eps / 2.0 - eps**3 / 3.0))


def jl_theorem_params(m: int, epsilon: float, tau: float) -> JLParams:
    """Dimension certified to embed m points with failure rate ~ m^-tau.

    k_min = ceil((2 + tau) * 2 ln(m) / (eps^2/2 - eps^3/3)); the success
    probability is at least 1 - 1/m^tau + 1/m^(tau+1).
    """
    eps = _check_epsilon(epsilon)
    if m < 2:
        raise ValueError(f"need m >= 2 points, got {m}")
    tau = float(tau)
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    k_min = math.ceil(
        (2.0 + tau) * 2.0 * math.log(m) / (eps * eps / 2.0 - eps**3 / 3.0)
    )
    return JLParams(epsilon=eps, tau=tau, m=m, k_min=k_min)


def jl_satisfied(x: PointCloud, p: Projector | StiefelFrame, epsilon: float) -> bool:
    """Whether every scaled distortion lies in [1 - eps, 1 + eps]."""
    eps = _check_epsilon(epsilon)
    ratios = relative_distortions(x, p)
    return bool(ratios.min() >= 1.0 - eps and ratios.max() <= 1.0 + eps)


def gjl_delta(epsilon: float, rho: float, k: int, d: int) -> float:
    """Distortion certified for any projector within rho of an eps-embedding.

    delta = eps + 2 rho sqrt((1 + eps) d / k) + (d / k) rho^2, where rho
    bounds the Frobenius distance between the two rank-k projectors.
    """
    eps = _check_epsilon(epsilon)
    rho = float(rho)
    if rho < 0.0:
        raise ValueError(f"rho must be nonnegative, got {rho!r}")
    if not 1 <= k <= d:
        raise DimensionError(f"need 1 <= k <= d, got k={k}, d={d}")
    ratio = d / k
    return eps + 2.0 * rho * math.sqrt((1.0 + eps) * ratio) + ratio * rho * rho
