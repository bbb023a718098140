"""Finite candidate sets on G_{k,d}: coverage and cubature quality.

A finite set {p_1, ..., p_L} of rank-k projectors covers the manifold to
radius rho when every projector lies within Frobenius distance rho of
the set; the covering radius is estimated here by probing with random
draws and taking the largest distance to the set.  The set is a
cubature of strength s when set averages of polynomials of degree <= s
in the projector entries match the invariant-measure averages.  Both
moment identities have closed forms (see ``moments``), so strength is
testable: strength 1 requires

    (1/L) sum_l ||q_l y||^2 = (k/d) ||y||^2   for all y,

and strength 2 additionally requires the second-moment identity

    (1/L) sum_l ||q_l y||^2 ||q_l z||^2
        = (alpha_1 ||y||^2 ||z||^2 + alpha_2 <y,z>^2) / q   for all y, z.

Random probe vectors detect violations almost surely, since both sides
are polynomials in (y, z).

On G_{1,2}, n >= 3 equiangular lines (angles j pi / n) form a strength-2
set; the n = 5 instance ships with the package.  Good low-coherence
designs for larger (k, d) are not generally available in closed form, so
a seeded batch of invariant draws serves as the documented substitute
candidate set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import kernels
from .errors import DesignFileError, DimensionError
from .grassmann import (
    FRAME_ORTHONORMALITY_TOL,
    StiefelFrame,
    as_generator,
    frame_from_json_dict,
    frame_to_json_dict,
    sample_frames,
)

_BUILTIN_DESIGNS = {"equiangular-g12-n5": "equiangular_g12_n5.json"}


def _validate_frame_stack(frames: np.ndarray, tol: float) -> None:
    l, k, d = frames.shape
    if not 1 <= k <= d:
        raise DimensionError(f"need 1 <= k <= d, got k={k}, d={d}")
    gram = frames @ frames.transpose(0, 2, 1)
    dev = np.abs(gram - np.eye(k)).reshape(l, -1).max(axis=1)
    bad = np.flatnonzero(dev > tol)
    if bad.size:
        raise DimensionError(
            f"frame {bad[0]} is not orthonormal: max |q q^T - I| = "
            f"{dev[bad[0]]:.3e} > {tol:.1e}"
        )


@dataclass(frozen=True)
class CandidateSet:
    """Stack of L frames on a common G_{k,d}, with provenance."""

    frames: np.ndarray
    source: str = "memory"
    tol: float = field(default=FRAME_ORTHONORMALITY_TOL, compare=False)

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3:
            raise DimensionError(
                f"frames must be a (L, k, d) stack, got shape {frames.shape}"
            )
        if frames.shape[0] < 1:
            raise DimensionError("candidate set must contain at least one frame")
        if not np.all(np.isfinite(frames)):
            raise DimensionError("frames contain non-finite entries")
        _validate_frame_stack(frames, self.tol)
        frames = frames.copy()
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def k(self) -> int:
        return self.frames.shape[1]

    @property
    def d(self) -> int:
        return self.frames.shape[2]

    def frame(self, index: int) -> StiefelFrame:
        return StiefelFrame(self.frames[index], tol=self.tol)


def haar_candidate_set(
    k: int, d: int, n: int, seed: int | np.random.Generator | None
) -> CandidateSet:
    """Seeded batch of invariant draws, the stand-in for curated designs."""
    frames = sample_frames(k, d, n, seed)
    return CandidateSet(frames, source=f"haar(k={k}, d={d}, n={n})")


def equiangular_lines_design(n: int) -> CandidateSet:
    """n equiangular lines in the plane: angles j pi / n, j = 0..n-1.

    For n >= 3 the set is a strength-2 cubature on G_{1,2}: averages of
    degree <= 2 polynomials in the projector entries match the invariant
    measure (trigonometric moments through cos(4 theta) vanish).
    """
    if n < 3:
        raise DimensionError(f"need n >= 3 lines for a strength-2 set, got {n}")
    angles = np.arange(n) * math.pi / n
    frames = np.stack([np.cos(angles), np.sin(angles)], axis=1)[:, None, :]
    return CandidateSet(frames, source=f"equiangular-lines(n={n})")


def _haar_g24_substitute() -> CandidateSet:
    # Deterministic stand-in for curated high-strength designs on G_{2,4}:
    # large enough that sample averages track the invariant measure closely,
    # cheap enough to regenerate instead of shipping a frame file.
    return haar_candidate_set(2, 4, 10_000, seed=0)


def builtin_names() -> list[str]:
    """Names accepted by builtin_design."""
    return sorted(set(_BUILTIN_DESIGNS) | {"haar-g24-n10000"})


def builtin_design(name: str = "equiangular-g12-n5") -> CandidateSet:
    """Load or regenerate a candidate set shipped with the package."""
    if name == "haar-g24-n10000":
        return _haar_g24_substitute()
    try:
        fname = _BUILTIN_DESIGNS[name]
    except KeyError:
        raise KeyError(
            f"unknown builtin design {name!r}; available: {builtin_names()}"
        ) from None
    ref = resources.files("projbalance").joinpath("data", fname)
    with resources.as_file(ref) as path:
        return load_design(path)


def load_design(path) -> CandidateSet:
    """Read a JSON array of frame objects; all must share one (k, d)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DesignFileError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, list) or not obj:
        raise DesignFileError(f"{path}: expected a nonempty JSON array of frames")
    frames = []
    shape = None
    for i, entry in enumerate(obj):
        if not isinstance(entry, dict):
            raise DesignFileError(f"{path}: frame {i} is not a JSON object")
        try:
            frame = frame_from_json_dict(entry)
        except (DimensionError, ValueError) as exc:
            raise DesignFileError(f"{path}: frame {i}: {exc}") from exc
        if shape is None:
            shape = (frame.k, frame.d)
        elif (frame.k, frame.d) != shape:
            raise DesignFileError(
                f"{path}: frame {i} has (k, d) = {(frame.k, frame.d)}, "
                f"expected {shape}"
            )
        frames.append(frame.rows)
    return CandidateSet(np.stack(frames), source=str(path))


def save_design(cands: CandidateSet, path) -> None:
    from .serialize import dump_json

    payload = [
        frame_to_json_dict(StiefelFrame(rows, tol=cands.tol)) for rows in cands.frames
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(payload))
        fh.write("\n")


def covering_radius_estimate(
    cands: CandidateSet,
    n_probes: int,
    seed: int | np.random.Generator | None,
    probes: np.ndarray | None = None,
) -> float:
    """Largest distance from a probe projector to the set (a lower bound
    on the true covering radius, tightening as n_probes grows).

    Probes default to invariant draws on the set's G_{k,d}; an explicit
    (n, k, d) stack of probe frames overrides the sampling (passing the
    set's own frames returns 0).
    """
    if probes is None:
        if n_probes < 1:
            raise DimensionError(f"need n_probes >= 1, got {n_probes}")
        probes = sample_frames(cands.k, cands.d, n_probes, seed)
    else:
        probes = np.asarray(probes, dtype=np.float64)
        if probes.ndim != 3 or probes.shape[1:] != (cands.k, cands.d):
            raise DimensionError(
                f"probes must be (n, {cands.k}, {cands.d}), got {probes.shape}"
            )
    dists = kernels.cross_min_frobenius(probes, cands.frames)
    return float(dists.max())


def cubature_strength_test(
    cands: CandidateSet,
    strength: int,
    n_trials: int,
    seed: int | np.random.Generator | None,
    tol: float = 1e-8,
) -> tuple[bool, float]:
    """Probe whether set averages match invariant-measure moments.

    Draws n_trials independent Gaussian vector pairs (y, z) and compares
    the set average of ||q_l y||^2 (strength >= 1) and of
    ||q_l y||^2 ||q_l z||^2 (strength >= 2) against the closed forms.
    Returns (all deviations <= tol, max relative deviation).  A strength
    that actually holds gives deviations at rounding level; Monte Carlo
    substitutes fail any tolerance much below 1/sqrt(L).
    """
    if strength not in (1, 2):
        raise ValueError(f"strength must be 1 or 2, got {strength}")
    if n_trials < 1:
        raise ValueError(f"need n_trials >= 1, got {n_trials}")
    k, d = cands.k, cands.d
    rng = as_generator(seed)
    q_denom = (d - 1) * d * (d + 2) if d >= 2 else 1
    alpha1 = (d + 1) * k * k - 2 * k
    alpha2 = 2 * k * (d - k)
    max_dev = 0.0
    for _ in range(n_trials):
        y = rng.standard_normal(d)
        z = rng.standard_normal(d)
        py = cands.frames @ y
        proj_y = np.einsum("lk,lk->l", py, py)
        mean1 = float(proj_y.mean())
        rhs1 = (k / d) * float(y @ y)
        max_dev = max(max_dev, abs(mean1 - rhs1) / abs(rhs1))
        if strength == 2:
            if d < 2:
                raise DimensionError(
                    "strength-2 testing needs ambient dimension d >= 2"
                )
            pz = cands.frames @ z
            proj_z = np.einsum("lk,lk->l", pz, pz)
            mean2 = float((proj_y * proj_z).mean())
            sq_y = float(y @ y)
            sq_z = float(z @ z)
            dot = float(y @ z)
            rhs2 = (alpha1 * sq_y * sq_z + alpha2 * dot * dot) / q_denom
            max_dev = max(max_dev, abs(mean2 - rhs2) / abs(rhs2))
    return max_dev <= tol, max_dev
