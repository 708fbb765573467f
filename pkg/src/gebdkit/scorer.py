"""Toy dual-head boundary scorer trained on soft-label targets.

Two 1-D convolutions (kernel 5, ReLU) over per-bin feature vectors feed a
pair of per-bin linear heads: one produces logits for a positive-weighted
BCE loss, the other raw values for an MSE loss. Predictions average the
sigmoid of the first head with the [0,1]-clamped output of the second.
All gradients are written out by hand and checked against central finite
differences (see grad_check).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ScoreCurve, SoftTarget

_LOG_EPS = 1e-12


@dataclass(frozen=True)
class FeatureSequence:
    """Per-bin feature vectors for one video, shape (num_bins, feature_dim)."""

    video_id: str
    rows: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.rows, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError("rows must be a 2-D matrix (bins x features)")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite feature for {self.video_id!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "rows", arr)


@dataclass(frozen=True)
class ScorerParams:
    """All weights of the scorer; conv weights are (out, in, kernel)."""

    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    head_bce_w: np.ndarray
    head_bce_b: float
    head_mse_w: np.ndarray
    head_mse_b: float

    @property
    def feature_dim(self) -> int:
        return self.conv1_w.shape[1]

    @property
    def hidden(self) -> int:
        return self.conv1_w.shape[0]

    @property
    def kernel(self) -> int:
        return self.conv1_w.shape[2]


@dataclass(frozen=True)
class LossConfig:
    pos_weight: float = 8.0
    mse_weight: float = 1.0
    learning_rate: float = 0.5
    epochs: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pos_weight <= 0:
            raise ValueError("pos_weight must be > 0")
        if self.mse_weight < 0:
            raise ValueError("mse_weight must be >= 0")


def init_params(
    feature_dim: int = 16, hidden: int = 32, kernel: int = 5, seed: int = 0
) -> ScorerParams:
    """Seeded init: every tensor uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]."""
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    return ScorerParams(
        conv1_w=uniform((hidden, feature_dim, kernel), feature_dim * kernel),
        conv1_b=uniform((hidden,), feature_dim * kernel),
        conv2_w=uniform((hidden, hidden, kernel), hidden * kernel),
        conv2_b=uniform((hidden,), hidden * kernel),
        head_bce_w=uniform((hidden,), hidden),
        head_bce_b=float(uniform((), hidden)),
        head_mse_w=uniform((hidden,), hidden),
        head_mse_b=float(uniform((), hidden)),
    )


def _conv_cols(x: np.ndarray, kernel: int) -> np.ndarray:
    """Window view for same-length zero-padded convolution.

    x is (..., T, C); the result is (..., T, C, kernel) with
    cols[..., t, c, k] = xpad[..., t + k, c].
    """
    r = kernel // 2
    pad = [(0, 0)] * (x.ndim - 2) + [(r, r), (0, 0)]
    xpad = np.pad(x, pad)
    return np.lib.stride_tricks.sliding_window_view(xpad, kernel, axis=x.ndim - 2)


def _forward_full(params: ScorerParams, x: np.ndarray) -> dict:
    """Forward pass keeping intermediates; x is (T, d) or batched (B, T, d)."""
    if x.shape[-1] != params.feature_dim:
        raise ValueError(
            f"feature dim {x.shape[-1]} does not match params ({params.feature_dim})"
        )
    cols1 = _conv_cols(x, params.kernel)
    out1 = np.einsum("...tck,jck->...tj", cols1, params.conv1_w) + params.conv1_b
    a1 = np.maximum(out1, 0.0)
    cols2 = _conv_cols(a1, params.kernel)
    out2 = np.einsum("...tck,jck->...tj", cols2, params.conv2_w) + params.conv2_b
    a2 = np.maximum(out2, 0.0)
    z_bce = a2 @ params.head_bce_w + params.head_bce_b
    z_mse = a2 @ params.head_mse_w + params.head_mse_b
    return {
        "cols1": cols1, "out1": out1, "a1": a1,
        "cols2": cols2, "out2": out2, "a2": a2,
        "z_bce": z_bce, "z_mse": z_mse,
    }


def forward(params: ScorerParams, features: FeatureSequence) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin (pre-sigmoid logits, raw linear outputs)."""
    state = _forward_full(params, features.rows)
    return state["z_bce"], state["z_mse"]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _loss_terms(z_bce, z_mse, y, config: LossConfig):
    """Per-bin losses and dLoss/dz for both heads (mean-over-bins scaling)."""
    s = _sigmoid(z_bce)
    w = config.pos_weight
    lam = config.mse_weight
    T = y.shape[-1]
    bce = -(w * y * np.log(np.maximum(s, _LOG_EPS))
            + (1.0 - y) * np.log(np.maximum(1.0 - s, _LOG_EPS)))
    mse = (z_mse - y) ** 2
    loss = bce.mean(axis=-1) + lam * mse.mean(axis=-1)
    # clamped logs are constant w.r.t. z, so their gradient contribution is 0
    live_lo = s >= _LOG_EPS
    live_hi = (1.0 - s) >= _LOG_EPS
    dz_bce = (-w * y * (1.0 - s) * live_lo + (1.0 - y) * s * live_hi) / T
    dz_mse = lam * 2.0 * (z_mse - y) / T
    return loss, dz_bce, dz_mse


def loss(
    params: ScorerParams,
    features: FeatureSequence,
    target: SoftTarget,
    config: LossConfig,
) -> float:
    """Weighted-BCE + mse_weight * MSE, both averaged over bins."""
    state = _forward_full(params, features.rows)
    val, _, _ = _loss_terms(state["z_bce"], state["z_mse"], target.values, config)
    return float(val)


def predict(
    params: ScorerParams, features: FeatureSequence, bin_width_s: float = 0.25
) -> ScoreCurve:
    """Averaged dual-head score: (sigmoid(z_bce) + clamp(z_mse, 0, 1)) / 2."""
    state = _forward_full(params, features.rows)
    values = 0.5 * (_sigmoid(state["z_bce"]) + np.clip(state["z_mse"], 0.0, 1.0))
    return ScoreCurve(features.video_id, bin_width_s, values)


def _zero_grads(params: ScorerParams) -> dict[str, np.ndarray]:
    return {
        "conv1_w": np.zeros_like(params.conv1_w),
        "conv1_b": np.zeros_like(params.conv1_b),
        "conv2_w": np.zeros_like(params.conv2_w),
        "conv2_b": np.zeros_like(params.conv2_b),
        "head_bce_w": np.zeros_like(params.head_bce_w),
        "head_bce_b": np.zeros(()),
        "head_mse_w": np.zeros_like(params.head_mse_w),
        "head_mse_b": np.zeros(()),
    }


def _backward(params: ScorerParams, state: dict, dz_bce, dz_mse) -> dict[str, np.ndarray]:
    """Gradients of the loss for one (possibly batched) forward state.

    dz_* carry the per-bin loss gradients; batch leading axes are summed, so
    callers divide by the sample count for a mean-over-samples objective.
    """
    a2, out2, cols2 = state["a2"], state["out2"], state["cols2"]
    a1, out1, cols1 = state["a1"], state["out1"], state["cols1"]
    K = params.kernel
    r = K // 2
    T = a2.shape[-2]

    grads = {
        "head_bce_w": np.einsum("...t,...tj->j", dz_bce, a2),
        "head_bce_b": np.asarray(dz_bce.sum()),
        "head_mse_w": np.einsum("...t,...tj->j", dz_mse, a2),
        "head_mse_b": np.asarray(dz_mse.sum()),
    }
    da2 = (dz_bce[..., None] * params.head_bce_w
           + dz_mse[..., None] * params.head_mse_w)
    dout2 = da2 * (out2 > 0.0)
    grads["conv2_w"] = np.einsum("...tj,...tck->jck", dout2, cols2)
    grads["conv2_b"] = np.einsum("...tj->j", dout2)

    da1 = _conv_input_grad(dout2, params.conv2_w, T, r)
    dout1 = da1 * (out1 > 0.0)
    grads["conv1_w"] = np.einsum("...tj,...tck->jck", dout1, cols1)
    grads["conv1_b"] = np.einsum("...tj->j", dout1)
    return grads


def _conv_input_grad(dout: np.ndarray, w: np.ndarray, T: int, r: int) -> np.ndarray:
    """Scatter conv output grads back to the (zero-padded) input."""
    contrib = np.einsum("...tj,jck->...tck", dout, w)
    pad_shape = dout.shape[:-2] + (T + 2 * r, w.shape[1])
    dpad = np.zeros(pad_shape)
    for k in range(w.shape[2]):
        dpad[..., k : k + T, :] += contrib[..., :, :, k]
    return dpad[..., r : r + T, :]


def _dataset_loss_grads(
    params: ScorerParams,
    dataset: Sequence[tuple[FeatureSequence, SoftTarget]],
    config: LossConfig,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean loss and gradients over the dataset.

    Samples are processed in sorted-video_id order, batched by equal bin
    count; summation order is therefore fixed and results reproducible
    regardless of input order.
    """
    ordered = sorted(dataset, key=lambda ft: ft[0].video_id)
    groups: dict[int, list[tuple[FeatureSequence, SoftTarget]]] = {}
    for item in ordered:
        groups.setdefault(item[0].rows.shape[0], []).append(item)

    n = len(ordered)
    total_loss = 0.0
    totals = _zero_grads(params)
    for t_bins in groups:
        batch = groups[t_bins]
        x = np.stack([f.rows for f, _ in batch], axis=0)
        y = np.stack([t.values for _, t in batch], axis=0)
        state = _forward_full(params, x)
        losses, dz_bce, dz_mse = _loss_terms(state["z_bce"], state["z_mse"], y, config)
        total_loss += float(losses.sum())
        grads = _backward(params, state, dz_bce, dz_mse)
        for name in totals:
            totals[name] += grads[name]
    for name in totals:
        totals[name] /= n
    return total_loss / n, totals


def _apply_step(params: ScorerParams, grads: dict[str, np.ndarray], lr: float) -> ScorerParams:
    return ScorerParams(
        conv1_w=params.conv1_w - lr * grads["conv1_w"],
        conv1_b=params.conv1_b - lr * grads["conv1_b"],
        conv2_w=params.conv2_w - lr * grads["conv2_w"],
        conv2_b=params.conv2_b - lr * grads["conv2_b"],
        head_bce_w=params.head_bce_w - lr * grads["head_bce_w"],
        head_bce_b=params.head_bce_b - lr * float(grads["head_bce_b"]),
        head_mse_w=params.head_mse_w - lr * grads["head_mse_w"],
        head_mse_b=params.head_mse_b - lr * float(grads["head_mse_b"]),
    )


def train(
    params: ScorerParams,
    dataset: Sequence[tuple[FeatureSequence, SoftTarget]],
    config: LossConfig,
) -> tuple[ScorerParams, list[float]]:
    """Full-batch gradient descent; returns final params and per-epoch loss.

    The recorded loss for each epoch is the value *before* that epoch's
    update, so learning_rate = 0 yields a constant history.

    Raises:
        FloatingPointError: the loss became non-finite (diverged).
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    history: list[float] = []
    for epoch in range(config.epochs):
        value, grads = _dataset_loss_grads(params, dataset, config)
        if not np.isfinite(value):
            raise FloatingPointError(
                f"non-finite loss {value} at epoch {epoch}; lower the learning rate"
            )
        history.append(value)
        params = _apply_step(params, grads, config.learning_rate)
    return params, history


# -- gradient checking -------------------------------------------------------

_PARAM_FIELDS = (
    "conv1_w", "conv1_b", "conv2_w", "conv2_b",
    "head_bce_w", "head_bce_b", "head_mse_w", "head_mse_b",
)


def flatten_params(params: ScorerParams) -> np.ndarray:
    parts = []
    for name in _PARAM_FIELDS:
        parts.append(np.atleast_1d(np.asarray(getattr(params, name), dtype=np.float64)).ravel())
    return np.concatenate(parts)


def unflatten_params(flat: np.ndarray, like: ScorerParams) -> ScorerParams:
    fields = {}
    pos = 0
    for name in _PARAM_FIELDS:
        ref = np.asarray(getattr(like, name))
        size = max(1, int(np.prod(ref.shape)))
        chunk = flat[pos : pos + size]
        pos += size
        fields[name] = float(chunk[0]) if ref.shape == () else chunk.reshape(ref.shape)
    return ScorerParams(**fields)


def grad_check(
    params: ScorerParams,
    features: FeatureSequence,
    target: SoftTarget,
    config: LossConfig,
    step: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    relative error = |g_a - g_n| / max(1e-8, |g_a| + |g_n|), maximized over
    every parameter.
    """
    state = _forward_full(params, features.rows)
    _, dz_bce, dz_mse = _loss_terms(state["z_bce"], state["z_mse"], target.values, config)
    analytic = _backward(params, state, dz_bce, dz_mse)
    g_a = np.concatenate(
        [np.atleast_1d(analytic[name]).ravel() for name in _PARAM_FIELDS]
    )

    flat = flatten_params(params)
    g_n = np.empty_like(flat)
    for i in range(flat.size):
        bump = flat.copy()
        bump[i] = flat[i] + step
        hi = loss(unflatten_params(bump, params), features, target, config)
        bump[i] = flat[i] - step
        lo = loss(unflatten_params(bump, params), features, target, config)
        g_n[i] = (hi - lo) / (2.0 * step)

    denom = np.maximum(1e-8, np.abs(g_a) + np.abs(g_n))
    return float(np.max(np.abs(g_a - g_n) / denom))


# -- serialization ------------------------------------------------------------


def params_to_dict(params: ScorerParams) -> dict:
    return {
        "feature_dim": params.feature_dim,
        "hidden": params.hidden,
        "kernel": params.kernel,
        "conv1_w": params.conv1_w.tolist(),
        "conv1_b": params.conv1_b.tolist(),
        "conv2_w": params.conv2_w.tolist(),
        "conv2_b": params.conv2_b.tolist(),
        "head_bce_w": params.head_bce_w.tolist(),
        "head_bce_b": params.head_bce_b,
        "head_mse_w": params.head_mse_w.tolist(),
        "head_mse_b": params.head_mse_b,
    }


def params_from_dict(obj: dict) -> ScorerParams:
    params = ScorerParams(
        conv1_w=np.asarray(obj["conv1_w"], dtype=np.float64),
        conv1_b=np.asarray(obj["conv1_b"], dtype=np.float64),
        conv2_w=np.asarray(obj["conv2_w"], dtype=np.float64),
        conv2_b=np.asarray(obj["conv2_b"], dtype=np.float64),
        head_bce_w=np.asarray(obj["head_bce_w"], dtype=np.float64),
        head_bce_b=float(obj["head_bce_b"]),
        head_mse_w=np.asarray(obj["head_mse_w"], dtype=np.float64),
        head_mse_b=float(obj["head_mse_b"]),
    )
    declared = (obj.get("hidden"), obj.get("feature_dim"), obj.get("kernel"))
    actual = (params.hidden, params.feature_dim, params.kernel)
    if any(d is not None and d != a for d, a in zip(declared, actual)):
        raise ValueError(f"declared shapes {declared} do not match weights {actual}")
    return params
