"""Closed-form moments of projection statistics over random subspaces.

For P drawn from the invariant measure on rank-k projectors of R^d and
a fixed nonzero vector y, the first two mixed moments of the squared
projected norms have closed forms:

    E ||Py||^2            = (k/d) ||y||^2
    E ||Py||^2 ||Pz||^2   = (alpha_1 ||y||^2 ||z||^2 + alpha_2 <y,z>^2) / q

with q = (d-1) d (d+2), alpha_1 = (d+1)k^2 - 2k, alpha_2 = 2k(d-k).
From these, every first and second moment of the pair statistics
(tvar(Px), M(P,x)) of a cloud x follows exactly.  Writing
Delta_a for the pair differences, u_a = Delta_a / ||Delta_a||,
M_p = m(m-1)/2, and a = a_{k,d} = 2d(d-k) / (k(d-1)(d+2)):

    E tvar(Px) = (k/d) tvar(x)
    E M(P,x)   = 1
    E V(P,x)   = a (1 - S_uu / M_p^2)
    Var tvar   = (k^2 a / (4 d^2 M_p^2)) (S_yy - T^2 / d)
    Var M      = (a / M_p^2) (S_uu - M_p^2 / d)
    Cov(M,tvar)= (k a / (2 d M_p^2)) (S_yu - M_p T / d)

where T = sum_a ||Delta_a||^2 and S_yy, S_uu, S_yu are the double sums
of squared inner products over pairs of pairs.  Those double sums are
computed here through d x d scatter matrices,
sum_{a,b} <y_a, z_b>^2 = tr[(sum_a y_a y_a^T)(sum_b z_b z_b^T)],
which needs O(M_p d^2 + d^3) work instead of O(M_p^2 d).

The correlation of (M, tvar) is scale free and admits the lower bound

    corr >= min_sq / max_sq - (M_p / d) max_sq / min_sq

over the extreme squared pair distances, meaningful when d >= M_p.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DegenerateDataError, DimensionError, UndefinedFitError
from .grassmann import PointCloud, as_generator

# Below this, a variance is treated as zero and the correlation as undefined.
DEGENERATE_VARIANCE_FLOOR = 1e-14

# Floor for relative-error denominators in identity verification reports.
_REL_ERR_FLOOR = 1e-14


@dataclass(frozen=True)
class ClosedFormMoments:
    """Exact first and second moments of (tvar(Px), M(P,x)) for one cloud."""

    e_tvar: float
    e_M: float
    e_V: float
    var_tvar: float
    var_M: float
    cov_M_tvar: float
    corr_M_tvar: float | None
    a_kd: float

    def to_json_dict(self) -> dict:
        return {
            "e_tvar": self.e_tvar,
            "e_M": self.e_M,
            "e_V": self.e_V,
            "var_tvar": self.var_tvar,
            "var_M": self.var_M,
            "cov_M_tvar": self.cov_M_tvar,
            "corr_M_tvar": self.corr_M_tvar,
            "a_kd": self.a_kd,
        }


class CorrelationBound(NamedTuple):
    """Lower bound on corr(M, tvar); hypothesis_met records d >= m(m-1)/2."""

    value: float
    hypothesis_met: bool


@dataclass(frozen=True)
class LsqFit:
    """Population least-squares line tvar ~ slope * M + intercept."""

    slope: float
    intercept: float


@dataclass(frozen=True)
class MomentIdentityReport:
    """One Monte Carlo check of a closed-form moment identity."""

    k: int
    n_samples: int
    lhs: float
    rhs: float
    rel_err: float


def _check_dims(k: int, d: int) -> None:
    if d < 2:
        raise DimensionError(
            f"ambient dimension d={d} is unsupported; the moment formulas need d >= 2"
        )
    if not 1 <= k <= d:
        raise DimensionError(f"need 1 <= k <= d={d}, got k={k}")


def variance_factor(k: int, d: int) -> float:
    """a_{k,d} = 2d(d-k) / (k(d-1)(d+2)); zero exactly when k = d."""
    _check_dims(k, d)
    return 2.0 * d * (d - k) / (k * (d - 1) * (d + 2))


def expected_v_bound(k: int, d: int) -> float:
    """Upper bound a_{k,d} on E V(P,x) over all clouds (not attained)."""
    return variance_factor(k, d)


def closed_form_moments(
    x: PointCloud, k: int, floor: float = DEGENERATE_VARIANCE_FLOOR
) -> ClosedFormMoments:
    """All eight closed-form moment quantities for the cloud and rank k.

    The correlation is reported as None (undefined) when either variance
    falls below ``floor``, e.g. at k = d or for a single-pair cloud whose
    statistics are perfectly dependent.
    """
    d = x.d
    _check_dims(k, d)
    x.require_distinct()

    diffs = x.pair_diffs
    sqn = x.pair_sq_dists
    # M averages over the retained pairs; tvar is normalized by the full
    # pair count (a dropped coincident pair contributes zero anyway).
    n_def = x.n_pairs
    n_all = x.n_pairs_total
    t_sum = float(sqn.sum())
    tvar_x = t_sum / (x.m * (x.m - 1))

    units = diffs / np.sqrt(sqn)[:, None]
    s_y = diffs.T @ diffs
    s_u = units.T @ units
    s_yy = float(np.einsum("ij,ij->", s_y, s_y))
    s_uu = float(np.einsum("ij,ij->", s_u, s_u))
    s_yu = float(np.einsum("ij,ij->", s_y, s_u))

    a = variance_factor(k, d)
    e_tvar = (k / d) * tvar_x
    e_v = a * (1.0 - s_uu / n_def**2)
    var_tvar = (k * k * a / (4.0 * d * d * n_all**2)) * (s_yy - t_sum * t_sum / d)
    var_m = (a / n_def**2) * (s_uu - n_def**2 / d)
    cov = (k * a / (2.0 * d * n_def * n_all)) * (s_yu - n_def * t_sum / d)

    e_v = max(e_v, 0.0)
    var_tvar = max(var_tvar, 0.0)
    var_m = max(var_m, 0.0)
    if var_tvar <= floor or var_m <= floor:
        corr = None
    else:
        corr = cov / np.sqrt(var_tvar * var_m)
        corr = float(np.clip(corr, -1.0, 1.0))

    return ClosedFormMoments(
        e_tvar=e_tvar,
        e_M=1.0,
        e_V=e_v,
        var_tvar=var_tvar,
        var_M=var_m,
        cov_M_tvar=cov,
        corr_M_tvar=corr,
        a_kd=a,
    )


def correlation_lower_bound(x: PointCloud) -> CorrelationBound:
    """Scale-free lower bound on corr(M(P,x), tvar(Px)), any rank.

    value = min_sq/max_sq - (M_p/d) max_sq/min_sq over the extreme
    squared pair distances.  The bound is a true guarantee when
    d >= m(m-1)/2 (hypothesis_met); the value is returned either way.
    """
    x.require_distinct()
    sqn = x.pair_sq_dists
    min_sq = float(sqn.min())
    max_sq = float(sqn.max())
    m_p = x.n_pairs
    value = min_sq / max_sq - (m_p / x.d) * (max_sq / min_sq)
    return CorrelationBound(value=value, hypothesis_met=x.d >= m_p)


def lsq_fit(x: PointCloud, k: int) -> LsqFit:
    """Population regression line of tvar(Px) on M(P,x).

    slope = Cov(M, tvar) / Var(M); intercept = E tvar - slope * E M.
    Undefined (raises) when Var(M) is below the degenerate floor, e.g.
    at k = d where both statistics are constant.
    """
    mom = closed_form_moments(x, k)
    if mom.var_M <= DEGENERATE_VARIANCE_FLOOR:
        raise UndefinedFitError(
            f"Var(M) = {mom.var_M:.3e} is below the degenerate floor; "
            "the regression of tvar on M is undefined"
        )
    slope = mom.cov_M_tvar / mom.var_M
    intercept = mom.e_tvar - slope * mom.e_M
    return LsqFit(slope=slope, intercept=intercept)


def _plane_coordinates(y: np.ndarray, z: np.ndarray):
    """Orthonormal coordinates of (y, z) inside their span (rank 1 or 2)."""
    ny = float(np.linalg.norm(y))
    nz = float(np.linalg.norm(z))
    if ny == 0.0 or nz == 0.0:
        raise DegenerateDataError("moment identities need nonzero vectors")
    e1 = y / ny
    z1 = float(e1 @ z)
    z_perp = z - z1 * e1
    n_perp = float(np.linalg.norm(z_perp))
    if n_perp > 1e-12 * nz:
        cy = np.array([ny, 0.0])
        cz = np.array([z1, n_perp])
    else:
        cy = np.array([ny])
        cz = np.array([z1])
    return cy, cz


def moment_identity_profile(
    y,
    z,
    ks,
    n_samples: int,
    seed: int | np.random.Generator | None,
) -> list[tuple[MomentIdentityReport, MomentIdentityReport]]:
    """Monte Carlo checks of both moment identities for several ranks at once.

    All ranks share one stream of invariant frames: for each draw, the
    restriction of P to span{y, z} is evaluated at every k from the
    cumulative Gram matrices of the frame rows, so the per-k estimates
    are correlated (a shared-stream variance reduction) but each is
    exactly distributed as an n_samples average.  ``ks`` must be strictly
    increasing ranks in [1, d].  Returns one (first-moment report,
    second-moment report) pair per k.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    z = np.asarray(z, dtype=np.float64).ravel()
    d = y.size
    if z.size != d:
        raise DimensionError(f"vector lengths differ: {y.size} vs {z.size}")
    if d < 2:
        raise DimensionError(f"ambient dimension d={d} is unsupported; need d >= 2")
    ks_arr = np.asarray(list(ks), dtype=np.int64)
    if ks_arr.size == 0:
        raise ValueError("ks must contain at least one rank")
    if np.any(np.diff(ks_arr) <= 0):
        raise ValueError("ks must be strictly increasing")
    if ks_arr[0] < 1 or ks_arr[-1] > d:
        raise DimensionError(f"ranks must lie in [1, {d}], got {ks_arr.tolist()}")
    if n_samples < 1:
        raise ValueError(f"need n_samples >= 1, got {n_samples}")

    cy, cz = _plane_coordinates(y, z)
    r = cy.size
    rng = as_generator(seed)
    sums = np.zeros((ks_arr.size, 2))
    step = max(1, min(n_samples, 4_000_000 // (d * r)))
    for lo in range(0, n_samples, step):
        hi = min(lo + step, n_samples)
        g = rng.standard_normal((hi - lo, d, r))
        q = kernels.mgs_columns(g)
        sums += kernels.moment_profile(q, cy, cz, ks_arr)

    sq_y = float(y @ y)
    sq_z = float(z @ z)
    dot_yz = float(y @ z)
    q_denom = (d - 1) * d * (d + 2)

    out = []
    for t, k in enumerate(ks_arr.tolist()):
        rhs1 = (k / d) * sq_y
        alpha1 = (d + 1) * k * k - 2 * k
        alpha2 = 2 * k * (d - k)
        rhs2 = (alpha1 * sq_y * sq_z + alpha2 * dot_yz * dot_yz) / q_denom
        lhs1 = sums[t, 0] / n_samples
        lhs2 = sums[t, 1] / n_samples
        rep1 = MomentIdentityReport(
            k=k,
            n_samples=n_samples,
            lhs=lhs1,
            rhs=rhs1,
            rel_err=abs(lhs1 - rhs1) / max(abs(rhs1), _REL_ERR_FLOOR),
        )
        rep2 = MomentIdentityReport(
            k=k,
            n_samples=n_samples,
            lhs=lhs2,
            rhs=rhs2,
            rel_err=abs(lhs2 - rhs2) / max(abs(rhs2), _REL_ERR_FLOOR),
        )
        out.append((rep1, rep2))
    return out


def verify_moment_identities(
    y,
    z,
    k: int,
    n_samples: int,
    seed: int | np.random.Generator | None,
) -> tuple[MomentIdentityReport, MomentIdentityReport]:
    """Monte Carlo check of both moment identities at a single rank.

    Estimates E ||Py||^2 and E ||Py||^2 ||Pz||^2 over n_samples invariant
    draws and reports each against its closed form, with relative errors.
    """
    (pair,) = moment_identity_profile(y, z, [int(k)], n_samples, seed)
    return pair
