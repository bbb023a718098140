"""Rank-k orthogonal projectors of R^d and their frame representations.

A point of the Grassmannian G_{k,d} is represented either as a
``Projector`` (the d x d matrix p with p^2 = p, p^T = p, tr p = k) or as
a ``StiefelFrame`` (a k x d matrix q with orthonormal rows spanning the
range of p, so p = q^T q).  Frames are cheaper to store and to sample;
projectors are what the distortion formulas consume.  The invariant
measure lambda_{k,d} is realized by QR-orthonormalizing a Gaussian
matrix with the positive-diagonal-R sign convention.

Distances are Frobenius distances between projectors.  For frames the
identity ||p1 - p2||_F^2 = 2k - 2 ||q1 q2^T||_F^2 avoids forming the
d x d matrices.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    CSVFormatError,
    DegenerateDataError,
    DimensionError,
    SubspaceTieWarning,
)

# Default validation tolerances (entrywise max-abs deviations).
FRAME_ORTHONORMALITY_TOL = 1e-10
PROJECTOR_TOL = 1e-9

# Relative eigenvalue gap under which the retained PCA subspace is
# reported as non-unique.
_PCA_TIE_RTOL = 1e-9


def as_generator(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Return ``seed`` itself if it is a Generator, else a fresh seeded one."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _as_float_matrix(arr, name: str) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D array, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


@dataclass(frozen=True)
class StiefelFrame:
    """k x d matrix with orthonormal rows; row span determines a projector."""

    rows: np.ndarray
    tol: float = field(default=FRAME_ORTHONORMALITY_TOL, compare=False)

    def __post_init__(self) -> None:
        rows = _as_float_matrix(self.rows, "frame rows")
        k, d = rows.shape
        if not 1 <= k <= d:
            raise DimensionError(f"need 1 <= k <= d, got k={k}, d={d}")
        gram = rows @ rows.T
        dev = np.max(np.abs(gram - np.eye(k)))
        if dev > self.tol:
            raise DimensionError(
                f"rows are not orthonormal: max |q q^T - I| = {dev:.3e} > {self.tol:.1e}"
            )
        rows = rows.copy()
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def k(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def projector(self) -> "Projector":
        return Projector(self.rows.T @ self.rows, self.k)


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector onto a k-dimensional subspace of R^d."""

    matrix: np.ndarray
    k: int

    def __post_init__(self) -> None:
        mat = _as_float_matrix(self.matrix, "projector matrix")
        if mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"projector must be square, got {mat.shape}")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, matrix, tol: float = PROJECTOR_TOL) -> "Projector":
        """Validate symmetry, idempotence, and integer trace, then wrap.

        The stored matrix is exactly symmetrized; ``tol`` bounds the
        allowed entrywise deviation of the input from a true projector.
        """
        mat = _as_float_matrix(matrix, "projector matrix")
        if mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"projector must be square, got {mat.shape}")
        sym_dev = np.max(np.abs(mat - mat.T))
        if sym_dev > tol:
            raise DimensionError(f"matrix is not symmetric: max dev {sym_dev:.3e}")
        mat = (mat + mat.T) / 2.0
        idem_dev = np.max(np.abs(mat @ mat - mat))
        if idem_dev > tol:
            raise DimensionError(f"matrix is not idempotent: max dev {idem_dev:.3e}")
        tr = float(np.trace(mat))
        k = round(tr)
        if abs(tr - k) > max(tol, tol * mat.shape[0]):
            raise DimensionError(f"trace {tr!r} is not within tolerance of an integer")
        if not 1 <= k <= mat.shape[0]:
            raise DimensionError(f"rank {k} out of range for d={mat.shape[0]}")
        return cls(mat, k)


COINCIDENT_FLOOR = 1e-24


class PointCloud:
    """Finite list of m >= 2 points in R^d with cached pairwise data.

    ``on_coincident`` decides what the pair caches do when two points
    coincide (squared distance <= 1e-24).  The default "error" keeps
    every pair and lets ``require_distinct`` reject the cloud; "drop"
    removes coincident pairs so the per-pair ratio statistics stay well
    defined.  Sums of squared (projected) differences are identical
    under both policies because a zero difference contributes nothing.
    """

    def __init__(self, points, on_coincident: str = "error") -> None:
        pts = _as_float_matrix(points, "points")
        if pts.shape[0] < 2:
            raise DimensionError(f"need at least 2 points, got {pts.shape[0]}")
        if pts.shape[1] < 1:
            raise DimensionError("points must have at least one coordinate")
        if on_coincident not in ("error", "drop"):
            raise ValueError(
                f"on_coincident must be 'error' or 'drop', got {on_coincident!r}"
            )
        pts = pts.copy()
        pts.setflags(write=False)
        self.points = pts
        self.on_coincident = on_coincident

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n_pairs_total(self) -> int:
        """All m(m-1)/2 pairs, coincident ones included."""
        return self.m * (self.m - 1) // 2

    @property
    def n_pairs(self) -> int:
        """Pairs retained by the coincidence policy."""
        return self.pair_sq_dists.shape[0]

    @cached_property
    def _pair_data(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        i, j = np.triu_indices(self.m, k=1)
        diffs = self.points[i] - self.points[j]
        sq = np.einsum("ad,ad->a", diffs, diffs)
        if self.on_coincident == "drop":
            keep = sq > COINCIDENT_FLOOR
            if not keep.all():
                i, j, diffs, sq = i[keep], j[keep], diffs[keep], sq[keep]
        diffs.setflags(write=False)
        sq.setflags(write=False)
        return i, j, diffs, sq

    @property
    def pair_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Retained pair (i, j) indices, i ascending then j."""
        return self._pair_data[0], self._pair_data[1]

    @property
    def pair_diffs(self) -> np.ndarray:
        """(n_pairs, d) array of x_i - x_j over retained pairs i < j."""
        return self._pair_data[2]

    @property
    def pair_sq_dists(self) -> np.ndarray:
        return self._pair_data[3]

    def require_distinct(self, floor: float = COINCIDENT_FLOOR) -> None:
        """Raise unless the retained pairs support ratio statistics.

        Under the "error" policy every pairwise squared distance must
        exceed ``floor``; under "drop" only a cloud whose points all
        coincide is rejected.
        """
        from .errors import DistinctPointsError

        if self.on_coincident == "drop":
            if self.n_pairs == 0:
                raise DistinctPointsError(
                    "all points coincide; no distinct pairs remain"
                )
            return
        if self.pair_sq_dists.min() <= floor:
            a = int(np.argmin(self.pair_sq_dists))
            i, j = self.pair_indices
            raise DistinctPointsError(
                f"points {i[a]} and {j[a]} coincide "
                f"(squared distance {self.pair_sq_dists[a]:.3e} <= {floor:.1e})"
            )

    def mean(self) -> np.ndarray:
        return self.points.mean(axis=0)


def sample_frames(
    k: int, d: int, n: int, seed: int | np.random.Generator | None
) -> np.ndarray:
    """Draw n independent frames from the invariant measure on G_{k,d}.

    Returns an (n, k, d) array of orthonormal rows.  Each frame is the
    transposed Q factor of a d x k standard Gaussian matrix, with column
    signs fixed so the R factor has positive diagonal; that convention
    makes the law exactly invariant rather than merely close to it.
    """
    if not 1 <= k <= d:
        raise DimensionError(f"need 1 <= k <= d, got k={k}, d={d}")
    if n < 1:
        raise DimensionError(f"need n >= 1, got n={n}")
    rng = as_generator(seed)
    g = rng.standard_normal((n, d, k))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=1, axis2=2)
    signs = np.where(diag < 0.0, -1.0, 1.0)
    q = q * signs[:, None, :]
    return q.transpose(0, 2, 1)


def haar_sample(k: int, d: int, seed: int | np.random.Generator | None) -> StiefelFrame:
    """Draw one frame from the invariant measure on G_{k,d}."""
    return StiefelFrame(sample_frames(k, d, 1, seed)[0])


def frame_to_projector(frame: StiefelFrame) -> Projector:
    """p = q^T q; exactly symmetric, idempotent to within the frame tolerance."""
    return frame.projector()


def frobenius_distance(p1: Projector, p2: Projector) -> float:
    if p1.d != p2.d:
        raise DimensionError(f"ambient dimensions differ: {p1.d} vs {p2.d}")
    return float(np.linalg.norm(p1.matrix - p2.matrix, "fro"))


def frame_frobenius_distance(f1: StiefelFrame, f2: StiefelFrame) -> float:
    """Frobenius distance between the induced projectors, via the k x k Gram."""
    if f1.d != f2.d:
        raise DimensionError(f"ambient dimensions differ: {f1.d} vs {f2.d}")
    cross = f1.rows @ f2.rows.T
    d_sq = 2.0 * f1.k - 2.0 * float(np.einsum("ij,ij->", cross, cross))
    return math.sqrt(max(d_sq, 0.0))


def pca_frame(x: PointCloud, k: int) -> StiefelFrame:
    """Frame of the top-k principal directions of the cloud.

    Eigenvectors of the sample covariance (denominator m - 1), ordered by
    descending eigenvalue.  Each direction is sign-normalized so its first
    nonzero component is positive.  Warns when the k-th and (k+1)-th
    eigenvalues are within relative gap 1e-9 of each other, since the
    retained subspace is then not unique.
    """
    if not 1 <= k <= x.d:
        raise DimensionError(f"need 1 <= k <= d={x.d}, got k={k}")
    centered = x.points - x.mean()
    cov = centered.T @ centered / (x.m - 1)
    evals, evecs = np.linalg.eigh(cov)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    total = float(evals.sum())
    if total <= 0.0 or not np.isfinite(total):
        raise DegenerateDataError("cloud has zero total variance; no principal axes")
    if k < x.d:
        gap = evals[k - 1] - evals[k]
        if gap <= _PCA_TIE_RTOL * max(abs(evals[0]), 1e-300):
            warnings.warn(
                f"eigenvalues {k} and {k + 1} are tied to within relative gap "
                f"{_PCA_TIE_RTOL:.1e}; the retained subspace is not unique",
                SubspaceTieWarning,
                stacklevel=2,
            )
    rows = np.array(evecs[:, :k].T)
    for row in rows:
        nz = np.flatnonzero(np.abs(row) > 1e-12 * np.abs(row).max())
        if nz.size and row[nz[0]] < 0.0:
            row *= -1.0
    return StiefelFrame(rows)


def pca_projector(x: PointCloud, k: int) -> Projector:
    """Projector onto the span of the top-k principal directions."""
    return pca_frame(x, k).projector()


def project_affine(x: PointCloud, p: Projector) -> PointCloud:
    """Project the cloud onto the affine subspace through its mean.

    Each point maps to mean + p (x_i - mean); the result stays in R^d.
    """
    if p.d != x.d:
        raise DimensionError(f"ambient dimensions differ: {p.d} vs {x.d}")
    mu = x.mean()
    return PointCloud(mu + (x.points - mu) @ p.matrix.T)


# ---------------------------------------------------------------------------
# Serialization.  Frames go to JSON objects {"k":, "d":, "rows":} or to CSV
# (one frame row per line); clouds go to CSV (one point per line, optional
# header).  Floats are written with 17 significant digits so round-trips are
# exact.


def frame_to_json_dict(frame: StiefelFrame) -> dict:
    return {
        "k": frame.k,
        "d": frame.d,
        "rows": [[float(v) for v in row] for row in frame.rows],
    }


def frame_from_json_dict(obj: dict, tol: float = FRAME_ORTHONORMALITY_TOL) -> StiefelFrame:
    try:
        rows = np.asarray(obj["rows"], dtype=np.float64)
        k = int(obj["k"])
        d = int(obj["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionError(f"malformed frame object: {exc}") from exc
    if rows.ndim != 2 or rows.shape != (k, d):
        raise DimensionError(
            f"frame rows have shape {rows.shape}, expected ({k}, {d})"
        )
    return StiefelFrame(rows, tol=tol)


def save_frame_json(frame: StiefelFrame, path) -> None:
    from .serialize import dump_json

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(frame_to_json_dict(frame)))
        fh.write("\n")


def load_frame_json(path) -> StiefelFrame:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise DimensionError("frame file must hold a single JSON object")
    return frame_from_json_dict(obj)


def save_frame_csv(frame: StiefelFrame, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in frame.rows:
            writer.writerow([f"{v:.17g}" for v in row])


def load_frame_csv(path, tol: float = FRAME_ORTHONORMALITY_TOL) -> StiefelFrame:
    rows = _read_numeric_csv(path, allow_header=False)
    return StiefelFrame(rows, tol=tol)


def save_cloud_csv(x: PointCloud, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for pt in x.points:
            writer.writerow([f"{v:.17g}" for v in pt])


def load_cloud_csv(path) -> PointCloud:
    """Parse a CSV of points (rows) into a cloud.

    A single leading header row of non-numeric labels is skipped.  Ragged
    rows and unparseable cells raise CSVFormatError naming the offending
    row and column (1-based, counting the header).
    """
    return PointCloud(_read_numeric_csv(path, allow_header=True))


def _read_numeric_csv(path, allow_header: bool) -> np.ndarray:
    rows: list[list[float]] = []
    width: int | None = None
    header_skipped = False
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, record in enumerate(reader, start=1):
            cells = [c.strip() for c in record]
            if not cells or all(c == "" for c in cells):
                continue
            try:
                values = [float(c) for c in cells]
            except ValueError as exc:
                if allow_header and not rows and not header_skipped:
                    header_skipped = True
                    continue
                bad = next(
                    i for i, c in enumerate(cells, start=1) if not _is_float(c)
                )
                raise CSVFormatError(
                    f"{path}: row {line_no}, column {bad}: "
                    f"cannot parse {cells[bad - 1]!r} as a number"
                ) from exc
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise CSVFormatError(
                    f"{path}: row {line_no} has {len(values)} columns, expected {width}"
                )
            rows.append(values)
    if not rows:
        raise CSVFormatError(f"{path}: no numeric rows found")
    return np.asarray(rows, dtype=np.float64)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True
