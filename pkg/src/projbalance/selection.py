"""Rules for picking one projector out of a candidate set.

Every candidate l gets the summary triple (tvar(p_l x), M_l, V_l); the
rules then formalize different trade-offs between shrinking the cloud
(small tvar) and preserving pairwise shape (M near 1):

* ``cross``: closest to the ideal point (M, tvar) = (1, E tvar) in the
  normalized plane (M - 1, (tvar - E tvar) / tvar(x));
* ``diamond``: largest tvar among candidates with |M - 1| <= m_tol;
* ``square``: smallest tvar in the same band;
* ``circle``: largest M among candidates whose tvar is within a relative
  tolerance of the diamond's tvar;
* ``star``: smallest tvar overall;
* ``pca_star``: largest tvar overall (the within-set proxy for the
  principal-component projector, which maximizes retained variance).

m_tol defaults to the 10th percentile of |M_l - 1| over the set, so the
band adapts to how concentrated the candidates are.  Ties break to the
lowest candidate index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .designs import CandidateSet
from .errors import EmptyBandError
from .grassmann import PointCloud
from .objectives import ProjectionSummary, summarize_frames, total_variance

RULES = ("cross", "diamond", "square", "circle", "star", "pca_star")

# Relative tvar half-width of the circle rule's band around the diamond.
DEFAULT_TVAR_TOL = 0.01


@dataclass(frozen=True)
class SelectionResult:
    """Chosen candidate index, the rule that chose it, and its summary."""

    index: int
    rule: str
    summary: ProjectionSummary

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "rule": self.rule,
            "summary": self.summary.to_json_dict(),
        }


def pareto_scan(x: PointCloud, cands: CandidateSet) -> np.ndarray:
    """Summaries of every candidate: (L, 3) columns (tvar, M, V)."""
    return summarize_frames(x, cands.frames)


def _band_indices(m_col: np.ndarray, m_tol: float | None) -> tuple[np.ndarray, float]:
    m_dev = np.abs(m_col - 1.0)
    if m_tol is None:
        m_tol = float(np.percentile(m_dev, 10.0))
    idx = np.flatnonzero(m_dev <= m_tol)
    if idx.size == 0:
        raise EmptyBandError(
            f"no candidate has |M - 1| <= {m_tol:.3e} "
            f"(smallest deviation is {m_dev.min():.3e}); pass a larger m_tol"
        )
    return idx, m_tol


def select(
    x: PointCloud,
    cands: CandidateSet,
    rule: str,
    m_tol: float | None = None,
    tvar_tol: float = DEFAULT_TVAR_TOL,
) -> SelectionResult:
    """Apply one selection rule to the candidate set.

    ``m_tol`` is the band half-width on |M - 1| for the diamond, square,
    and circle rules (default: 10th percentile of the set's deviations).
    ``tvar_tol`` is the circle rule's relative tvar tolerance.
    """
    rule = rule.replace("-", "_").strip().lower()
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {RULES}")
    summaries = pareto_scan(x, cands)
    tv = summaries[:, 0]
    m_col = summaries[:, 1]

    if rule == "cross":
        tvar_x = total_variance(x)
        target = (cands.k / cands.d) * tvar_x
        dist_sq = (m_col - 1.0) ** 2 + ((tv - target) / tvar_x) ** 2
        chosen = int(np.argmin(dist_sq))
    elif rule == "diamond":
        idx, _ = _band_indices(m_col, m_tol)
        chosen = int(idx[np.argmax(tv[idx])])
    elif rule == "square":
        idx, _ = _band_indices(m_col, m_tol)
        chosen = int(idx[np.argmin(tv[idx])])
    elif rule == "circle":
        idx, _ = _band_indices(m_col, m_tol)
        diamond = int(idx[np.argmax(tv[idx])])
        near = np.flatnonzero(np.abs(tv - tv[diamond]) <= tvar_tol * abs(tv[diamond]))
        chosen = int(near[np.argmax(m_col[near])])
    elif rule == "star":
        chosen = int(np.argmin(tv))
    else:  # pca_star
        chosen = int(np.argmax(tv))

    summary = ProjectionSummary(
        tvar=float(tv[chosen]),
        mean_rel=float(m_col[chosen]),
        var_rel=float(summaries[chosen, 2]),
    )
    return SelectionResult(index=chosen, rule=rule, summary=summary)
