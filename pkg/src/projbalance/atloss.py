"""Augmented-target losses: base loss plus projected feature penalties.

Given feature transforms T_1, ..., T_n with a common output length t,
stack their outputs on a target vector y as the rows of T(y), an n x t
matrix.  For a rank-k projector p acting on the stack index, the
augmented loss of a batch (y_i, yhat_i), i = 1..m, is

    L_p = L_base(y, yhat) + alpha * (1/m) sum_i ||p T(y_i) - p T(yhat_i)||_F^2.

With p the identity and one weight per transform this reduces to the
classical weighted sum of per-feature losses

    sum_j alpha_j * (1/m) sum_i ||T_j(y_i) - T_j(yhat_i)||^2,

so that variant is accepted too (vector alpha, identity policy; the
transforms may then have differing output lengths).  The projector can
be fixed, resampled from the invariant measure per loss/gradient pair,
or fitted by PCA to the stacked target features.

Gradients flow through transpose-Jacobian (adjoint) maps: with
W_i = p (T(yhat_i) - T(y_i)), using p^T p = p,

    dL_p/dyhat_i = dL_base/dyhat_i + (2 alpha / m) sum_j J_{T_j}(yhat_i)^T W_i[j].

Built-in transforms cover the linear/identity cases and three image
filters (a horizontal Prewitt derivative, a mean-subtracted Laplacian of
Gaussian, and an FFT Gaussian highpass); all carry exact adjoints, with
reflect padding for the spatial kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, TransformError
from .grassmann import (
    PointCloud,
    Projector,
    StiefelFrame,
    haar_sample,
    pca_projector,
)

_CE_CLAMP = 1e-12


# ---------------------------------------------------------------------------
# Transforms and stacks


@dataclass(frozen=True)
class FeatureTransform:
    """A map R^in_dim -> R^out_dim with its transpose-Jacobian action.

    ``forward(y)`` evaluates the transform; ``adjoint(y, w)`` returns
    J(y)^T w for a cotangent w of length out_dim (linear transforms
    ignore the point y).  ``descriptor`` is set on built-ins so stacks
    can be serialized; hand-built transforms may leave it None.
    """

    name: str
    in_dim: int
    out_dim: int
    forward: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray, np.ndarray], np.ndarray]
    descriptor: dict | None = field(default=None, compare=False)


class FeatureStack:
    """Ordered transforms applied to a common input vector."""

    def __init__(self, transforms: Sequence[FeatureTransform]) -> None:
        transforms = list(transforms)
        for tr in transforms:
            if not isinstance(tr, FeatureTransform):
                raise TransformError(f"not a FeatureTransform: {tr!r}")
        if transforms:
            in_dims = {tr.in_dim for tr in transforms}
            if len(in_dims) > 1:
                raise TransformError(
                    f"transforms disagree on input length: {sorted(in_dims)}"
                )
        self.transforms = transforms

    def __len__(self) -> int:
        return len(self.transforms)

    @property
    def in_dim(self) -> int | None:
        return self.transforms[0].in_dim if self.transforms else None

    @property
    def uniform_out_dim(self) -> int | None:
        """Common output length, or None when the transforms disagree."""
        dims = {tr.out_dim for tr in self.transforms}
        return dims.pop() if len(dims) == 1 else None

    def apply(self, y: np.ndarray) -> np.ndarray:
        """T(y): stack the transform outputs as rows of an (n, t) matrix."""
        t = self.uniform_out_dim
        if t is None:
            raise TransformError(
                "stacking requires a common output length; "
                f"got {[tr.out_dim for tr in self.transforms]}"
            )
        return np.stack([tr.forward(y) for tr in self.transforms])

    def to_descriptors(self) -> list[dict]:
        out = []
        for tr in self.transforms:
            if tr.descriptor is None:
                raise TransformError(
                    f"transform {tr.name!r} carries no descriptor and cannot "
                    "be serialized"
                )
            out.append(dict(tr.descriptor))
        return out


# ---------------------------------------------------------------------------
# Projector policies


class IdentityPolicy:
    """No projection: the feature term uses the raw stacked differences."""

    kind = "identity"

    def resolve(self, target_stack: np.ndarray, draw: bool) -> Projector | None:
        return None

    def to_json_dict(self) -> dict:
        return {"kind": self.kind}


class FixedProjector:
    """Always the same projector, supplied up front."""

    kind = "fixed"

    def __init__(self, projector: Projector) -> None:
        self.projector = projector

    def resolve(self, target_stack: np.ndarray, draw: bool) -> Projector:
        n_t = target_stack.shape[1]
        if self.projector.d != n_t:
            raise TransformError(
                f"fixed projector acts on R^{self.projector.d} but the stack "
                f"has {n_t} transforms"
            )
        return self.projector

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.projector.k,
            "matrix": [[float(v) for v in row] for row in self.projector.matrix],
        }


class ResamplePerCall:
    """A fresh invariant draw per loss/gradient pair.

    ``loss`` (and ``loss_and_gradient``) draw a new projector;
    ``loss_gradient`` reuses the most recent draw so a value/gradient
    pair sees one projector, drawing only if none exists yet.
    """

    kind = "resample_per_call"

    def __init__(self, k: int, seed: int) -> None:
        if k < 1:
            raise DimensionError(f"need k >= 1, got k={k}")
        self.k = int(k)
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._last: Projector | None = None

    def resolve(self, target_stack: np.ndarray, draw: bool) -> Projector:
        n_t = target_stack.shape[1]
        if self.k > n_t:
            raise DimensionError(
                f"policy rank k={self.k} exceeds the stack size {n_t}"
            )
        if draw or self._last is None or self._last.d != n_t:
            self._last = haar_sample(self.k, n_t, self._rng).projector()
        return self._last

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k, "seed": self.seed}


class PCAOnTargets:
    """Projector fitted to the stacked target features of the batch.

    The columns of all T(y_i) are pooled as m*t vectors in R^n (one per
    feature coordinate) and the top-k principal directions of that cloud
    define the projector.
    """

    kind = "pca_on_targets"

    def __init__(self, k: int) -> None:
        if k < 1:
            raise DimensionError(f"need k >= 1, got k={k}")
        self.k = int(k)

    def resolve(self, target_stack: np.ndarray, draw: bool) -> Projector:
        m, n_t, t = target_stack.shape
        if self.k > n_t:
            raise DimensionError(
                f"policy rank k={self.k} exceeds the stack size {n_t}"
            )
        cols = target_stack.transpose(0, 2, 1).reshape(m * t, n_t)
        return pca_projector(PointCloud(cols), self.k)

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k}


def policy_from_json_dict(obj: dict):
    kind = obj.get("kind")
    if kind == "identity":
        return IdentityPolicy()
    if kind == "fixed":
        return FixedProjector(Projector.from_matrix(np.asarray(obj["matrix"])))
    if kind == "resample_per_call":
        return ResamplePerCall(int(obj["k"]), int(obj["seed"]))
    if kind == "pca_on_targets":
        return PCAOnTargets(int(obj["k"]))
    raise TransformError(f"unknown projector policy kind {kind!r}")


# ---------------------------------------------------------------------------
# Loss specification


@dataclass(frozen=True)
class ATLossSpec:
    """Base loss, feature weight(s), and projector policy.

    ``alpha`` is a nonnegative scalar, or one weight per transform (the
    identity-policy variant only).
    """

    base_loss: str
    alpha: float | tuple[float, ...]
    policy: object = field(default_factory=IdentityPolicy)

    def __post_init__(self) -> None:
        if self.base_loss not in ("mse", "cross_entropy"):
            raise TransformError(
                f"base_loss must be 'mse' or 'cross_entropy', got {self.base_loss!r}"
            )
        if isinstance(self.alpha, (list, tuple, np.ndarray)):
            weights = tuple(float(a) for a in self.alpha)
            if any(a < 0.0 for a in weights):
                raise TransformError(f"alpha weights must be nonnegative: {weights}")
            if not isinstance(self.policy, IdentityPolicy):
                raise TransformError(
                    "per-transform alpha weights require the identity policy"
                )
            object.__setattr__(self, "alpha", weights)
        else:
            alpha = float(self.alpha)
            if alpha < 0.0:
                raise TransformError(f"alpha must be nonnegative, got {alpha!r}")
            object.__setattr__(self, "alpha", alpha)

    def to_json_dict(self) -> dict:
        alpha = list(self.alpha) if isinstance(self.alpha, tuple) else self.alpha
        return {
            "base_loss": self.base_loss,
            "alpha": alpha,
            "policy": self.policy.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ATLossSpec":
        alpha = obj["alpha"]
        if isinstance(alpha, list):
            alpha = tuple(float(a) for a in alpha)
        return cls(
            base_loss=obj["base_loss"],
            alpha=alpha,
            policy=policy_from_json_dict(obj["policy"]),
        )


# ---------------------------------------------------------------------------
# Evaluation


def _check_batch(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.ndim != 2:
        raise DimensionError(f"targets must be (m, s) arrays, got shape {y.shape}")
    if y.shape != yhat.shape:
        raise DimensionError(f"shape mismatch: targets {y.shape} vs {yhat.shape}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(yhat))):
        raise ValueError("targets contain non-finite entries")
    return y, yhat


def _base_value(kind: str, y: np.ndarray, yhat: np.ndarray) -> float:
    m = y.shape[0]
    if kind == "mse":
        diff = yhat - y
        return float(np.einsum("ms,ms->", diff, diff)) / m
    clamped = np.maximum(yhat, _CE_CLAMP)
    return float(-(y * np.log(clamped)).sum()) / m


def _base_grad(kind: str, y: np.ndarray, yhat: np.ndarray) -> np.ndarray:
    m = y.shape[0]
    if kind == "mse":
        return (2.0 / m) * (yhat - y)
    grad = np.zeros_like(yhat)
    active = yhat > _CE_CLAMP
    grad[active] = -y[active] / yhat[active]
    return grad / m


def _stack_batch(stack: FeatureStack, batch: np.ndarray) -> np.ndarray:
    return np.stack([stack.apply(row) for row in batch])


def _evaluate(
    spec: ATLossSpec,
    stack: FeatureStack,
    y: np.ndarray,
    yhat: np.ndarray,
    need_grad: bool,
    draw: bool,
):
    y, yhat = _check_batch(y, yhat)
    if stack.in_dim is not None and stack.in_dim != y.shape[1]:
        raise DimensionError(
            f"stack expects vectors of length {stack.in_dim}, data has {y.shape[1]}"
        )
    value = _base_value(spec.base_loss, y, yhat)
    grad = _base_grad(spec.base_loss, y, yhat) if need_grad else None

    per_transform = isinstance(spec.alpha, tuple)
    if per_transform and len(spec.alpha) != len(stack):
        raise TransformError(
            f"{len(spec.alpha)} alpha weights for {len(stack)} transforms"
        )
    if not per_transform and spec.alpha == 0.0:
        return value, grad
    if len(stack) == 0:
        raise TransformError("feature term requested (alpha > 0) but the stack is empty")

    m = y.shape[0]
    unprojected = per_transform or getattr(spec.policy, "kind", None) == "identity"
    if unprojected:
        # No projector mixes the transform outputs, so the penalty is a
        # plain weighted sum and the output lengths may differ.
        weights = spec.alpha if per_transform else (spec.alpha,) * len(stack)
        for alpha_j, tr in zip(weights, stack.transforms):
            if alpha_j == 0.0:
                continue
            for i in range(m):
                diff = tr.forward(yhat[i]) - tr.forward(y[i])
                value += alpha_j * float(diff @ diff) / m
                if need_grad:
                    grad[i] += (2.0 * alpha_j / m) * tr.adjoint(yhat[i], diff)
        return value, grad

    target_stack = _stack_batch(stack, y)
    pred_stack = _stack_batch(stack, yhat)
    diff = pred_stack - target_stack
    p = spec.policy.resolve(target_stack, draw=draw)
    if p is not None:
        diff = np.einsum("ab,mbt->mat", p.matrix, diff)
    value += spec.alpha * float(np.einsum("mat,mat->", diff, diff)) / m
    if need_grad:
        coef = 2.0 * spec.alpha / m
        for i in range(m):
            for j, tr in enumerate(stack.transforms):
                grad[i] += coef * tr.adjoint(yhat[i], diff[i, j])
    return value, grad


def loss(spec: ATLossSpec, stack: FeatureStack, y, yhat) -> float:
    """Augmented loss of the batch; resampling policies draw here."""
    value, _ = _evaluate(spec, stack, y, yhat, need_grad=False, draw=True)
    return value


def loss_gradient(spec: ATLossSpec, stack: FeatureStack, y, yhat) -> np.ndarray:
    """Gradient wrt yhat, shape (m, s); reuses a resampling policy's last draw."""
    _, grad = _evaluate(spec, stack, y, yhat, need_grad=True, draw=False)
    return grad


def loss_and_gradient(
    spec: ATLossSpec, stack: FeatureStack, y, yhat
) -> tuple[float, np.ndarray]:
    """Value and gradient under one shared projector draw."""
    return _evaluate(spec, stack, y, yhat, need_grad=True, draw=True)


# ---------------------------------------------------------------------------
# Built-in transforms


def identity_transform(dim: int) -> FeatureTransform:
    dim = int(dim)
    return FeatureTransform(
        name="identity",
        in_dim=dim,
        out_dim=dim,
        forward=lambda y: np.asarray(y, dtype=np.float64).copy(),
        adjoint=lambda y, w: np.asarray(w, dtype=np.float64).copy(),
        descriptor={"kind": "identity", "dim": dim},
    )


def linear_transform(matrix, name: str = "linear") -> FeatureTransform:
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2:
        raise TransformError(f"linear transform needs a matrix, got shape {mat.shape}")
    return FeatureTransform(
        name=name,
        in_dim=mat.shape[1],
        out_dim=mat.shape[0],
        forward=lambda y: mat @ y,
        adjoint=lambda y, w: mat.T @ w,
        descriptor={"kind": "linear", "matrix": [[float(v) for v in r] for r in mat]},
    )


def _check_shape(shape, min_side: int) -> tuple[int, int]:
    try:
        h, w = (int(v) for v in shape)
    except (TypeError, ValueError):
        raise TransformError(f"image shape must be (H, W), got {shape!r}") from None
    if h < min_side or w < min_side:
        raise TransformError(
            f"image shape {(h, w)} too small; each side must be >= {min_side}"
        )
    return h, w


def _reflect_index(n: int, radius: int) -> np.ndarray:
    return np.pad(np.arange(n), radius, mode="reflect")


def _correlate_image(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Cross-correlation with reflect padding; output matches the input size."""
    r = kernel.shape[0] // 2
    padded = np.pad(img, r, mode="reflect")
    windows = np.lib.stride_tricks.sliding_window_view(padded, kernel.shape)
    return np.einsum("ijab,ab->ij", windows, kernel)


def _correlate_adjoint(grad: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Exact transpose of ``_correlate_image`` for the same kernel."""
    h, w = grad.shape
    r = kernel.shape[0] // 2
    padded = np.zeros((h + 2 * r, w + 2 * r))
    for a in range(kernel.shape[0]):
        for b in range(kernel.shape[1]):
            padded[a : a + h, b : b + w] += kernel[a, b] * grad
    rows = _reflect_index(h, r)
    cols = _reflect_index(w, r)
    folded = np.zeros((h, w + 2 * r))
    np.add.at(folded, rows, padded)
    out = np.zeros((w, h))
    np.add.at(out, cols, folded.T)
    return out.T


def _kernel_transform(name: str, shape, kernel: np.ndarray, descriptor: dict) -> FeatureTransform:
    h, w = _check_shape(shape, kernel.shape[0] // 2 + 1)
    size = h * w

    def forward(y: np.ndarray) -> np.ndarray:
        return _correlate_image(np.asarray(y, dtype=np.float64).reshape(h, w), kernel).ravel()

    def adjoint(y: np.ndarray, cot: np.ndarray) -> np.ndarray:
        return _correlate_adjoint(np.asarray(cot, dtype=np.float64).reshape(h, w), kernel).ravel()

    return FeatureTransform(
        name=name, in_dim=size, out_dim=size, forward=forward, adjoint=adjoint,
        descriptor=descriptor,
    )


def prewitt_transform(shape) -> FeatureTransform:
    """Horizontal derivative filter (3 x 3, zero-sum) on H x W images."""
    kernel = np.array(
        [[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]
    )
    h, w = _check_shape(shape, 2)
    return _kernel_transform(
        "prewitt", (h, w), kernel, {"kind": "prewitt", "shape": [h, w]}
    )


def log_transform(shape, sigma: float = 1.4, size: int = 9) -> FeatureTransform:
    """Laplacian-of-Gaussian filter, sampled and mean-subtracted to zero sum."""
    sigma = float(sigma)
    size = int(size)
    if size % 2 != 1 or size < 3:
        raise TransformError(f"kernel size must be odd and >= 3, got {size}")
    if sigma <= 0.0:
        raise TransformError(f"sigma must be positive, got {sigma}")
    half = size // 2
    grid = np.arange(-half, half + 1, dtype=np.float64)
    r_sq = grid[:, None] ** 2 + grid[None, :] ** 2
    kernel = (r_sq - 2.0 * sigma**2) / sigma**4 * np.exp(-r_sq / (2.0 * sigma**2))
    kernel -= kernel.mean()
    h, w = _check_shape(shape, half + 1)
    return _kernel_transform(
        "log", (h, w), kernel,
        {"kind": "log", "shape": [h, w], "sigma": sigma, "size": size},
    )


def gaussian_highpass_transform(shape, cutoff: float, name: str = "gauss_highpass") -> FeatureTransform:
    """FFT highpass 1 - exp(-D^2 / (2 c^2)), D in frequency-bin units.

    The filter is real and even in frequency, so the operator is
    symmetric and serves as its own adjoint.
    """
    cutoff = float(cutoff)
    if cutoff <= 0.0:
        raise TransformError(f"cutoff must be positive, got {cutoff}")
    h, w = _check_shape(shape, 1)
    fy = np.fft.fftfreq(h) * h
    fx = np.fft.fftfreq(w) * w
    d_sq = fy[:, None] ** 2 + fx[None, :] ** 2
    filt = 1.0 - np.exp(-d_sq / (2.0 * cutoff**2))
    size = h * w

    def forward(y: np.ndarray) -> np.ndarray:
        img = np.asarray(y, dtype=np.float64).reshape(h, w)
        return np.real(np.fft.ifft2(np.fft.fft2(img) * filt)).ravel()

    def adjoint(y: np.ndarray, cot: np.ndarray) -> np.ndarray:
        return forward(cot)

    return FeatureTransform(
        name=name, in_dim=size, out_dim=size, forward=forward, adjoint=adjoint,
        descriptor={"kind": name, "shape": [h, w]}
        if name in ("gauss40", "gauss100")
        else {"kind": "gauss_highpass", "shape": [h, w], "cutoff": cutoff},
    )


def builtin_transforms() -> dict[str, Callable[..., FeatureTransform]]:
    """Factories for the built-in transforms, keyed by preset name."""
    return {
        "identity": identity_transform,
        "linear": linear_transform,
        "prewitt": prewitt_transform,
        "log": log_transform,
        "gauss_highpass": gaussian_highpass_transform,
        "gauss40": lambda shape: gaussian_highpass_transform(shape, 40.0, name="gauss40"),
        "gauss100": lambda shape: gaussian_highpass_transform(shape, 100.0, name="gauss100"),
    }


def stack_from_descriptors(descriptors: Sequence[dict]) -> FeatureStack:
    """Rebuild a stack from descriptor dicts (the serialized form)."""
    transforms = []
    for i, desc in enumerate(descriptors):
        kind = desc.get("kind")
        try:
            if kind == "identity":
                transforms.append(identity_transform(desc["dim"]))
            elif kind == "linear":
                transforms.append(linear_transform(desc["matrix"]))
            elif kind == "prewitt":
                transforms.append(prewitt_transform(desc["shape"]))
            elif kind == "log":
                transforms.append(
                    log_transform(
                        desc["shape"],
                        sigma=desc.get("sigma", 1.4),
                        size=desc.get("size", 9),
                    )
                )
            elif kind == "gauss_highpass":
                transforms.append(
                    gaussian_highpass_transform(desc["shape"], desc["cutoff"])
                )
            elif kind in ("gauss40", "gauss100"):
                transforms.append(builtin_transforms()[kind](desc["shape"]))
            else:
                raise TransformError(f"unknown transform kind {kind!r}")
        except KeyError as exc:
            raise TransformError(f"transform {i}: missing field {exc}") from exc
    return FeatureStack(transforms)
