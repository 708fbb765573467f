"""Constrained alignment of predicted boundaries.

Challenge rules keep boundaries away from the first/last 0.3 s and make the
matching interval of each prediction +/- rel_dis * duration wide, so
predictions closer than 2 * rel_dis * duration waste interval overlap. This
module shifts a prediction set the minimum total squared distance needed to
satisfy:

    lo <= x_1,   x_{i+1} - x_i >= g,   x_n <= hi

with lo = margin + rel_dis*D, hi = D - margin - rel_dis*D, g = 2*rel_dis*D.

The projection substitutes y_i = x_i - (i-1)*g, which turns the gap
constraint into monotonicity; pool-adjacent-violators then solves the
isotonic least-squares problem exactly, and clamping the monotone solution
into [lo, hi - (n-1)*g] applies the box constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BoundarySet

_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class AlignConfig:
    edge_margin_s: float = 0.3
    rel_dis: float = 0.05

    def __post_init__(self) -> None:
        if self.edge_margin_s < 0:
            raise ValueError("edge_margin_s must be >= 0")
        if not (0.0 < self.rel_dis < 0.5):
            raise ValueError("rel_dis must be in (0, 0.5)")


def feasible_band(duration_s: float, config: AlignConfig) -> tuple[float, float, float]:
    """(lo, hi, gap) of the feasible band for a video of the given duration."""
    lo = config.edge_margin_s + config.rel_dis * duration_s
    hi = duration_s - config.edge_margin_s - config.rel_dis * duration_s
    gap = 2.0 * config.rel_dis * duration_s
    return lo, hi, gap


def max_feasible_count(duration_s: float, config: AlignConfig) -> int:
    """Most boundaries that fit the band with pairwise gaps >= g."""
    if duration_s <= 0:
        raise ValueError("duration must be > 0")
    lo, hi, gap = feasible_band(duration_s, config)
    if hi < lo:
        return 0
    return int(math.floor((hi - lo) / gap)) + 1


def _isotonic_nondecreasing(y: np.ndarray) -> np.ndarray:
    """Unweighted least-squares isotonic fit by pool-adjacent-violators.

    Maintains a stack of merged pools (mean, weight, start index); a new
    element merges backward while it undercuts the preceding pool's mean.
    """
    n = y.shape[0]
    vstack: list[float] = []
    wstack: list[float] = []
    sstack: list[int] = []
    for i in range(n):
        v, w, s = float(y[i]), 1.0, i
        while vstack and vstack[-1] > v:
            pv, pw = vstack.pop(), wstack.pop()
            s = sstack.pop()
            v = (pv * pw + v * w) / (pw + w)
            w = pw + w
        vstack.append(v)
        wstack.append(w)
        sstack.append(s)
    out = np.empty(n, dtype=np.float64)
    for v, w, s in zip(vstack, wstack, sstack):
        out[s : s + int(round(w))] = v
    return out


def _is_feasible(x: tuple[float, ...], lo: float, hi: float, gap: float) -> bool:
    if not x:
        return True
    if x[0] < lo - _FEAS_TOL or x[-1] > hi + _FEAS_TOL:
        return False
    return all(b - a >= gap - _FEAS_TOL for a, b in zip(x, x[1:]))


def align_boundaries(
    pred: BoundarySet,
    peak_scores: tuple[float, ...] | list[float] | None,
    duration_s: float,
    config: AlignConfig = AlignConfig(),
) -> BoundarySet:
    """Project *pred* onto the feasible band, moving it as little as possible.

    Feasible inputs (within 1e-9) are returned unchanged, which also makes
    the projection idempotent bit-for-bit. When more boundaries are given
    than fit the band, the lowest-scored ones are dropped first (ties drop
    the later boundary); that pruning requires *peak_scores*.

    Args:
        pred: sorted predictions for one video.
        peak_scores: per-boundary confidence, aligned with pred; may be None
            when no pruning is needed.
        duration_s: video duration in seconds.

    Raises:
        ValueError: pruning needed but peak_scores missing or misaligned.
    """
    lo, hi, gap = feasible_band(duration_s, config)
    x = pred.boundaries
    if peak_scores is not None and len(peak_scores) != len(x):
        raise ValueError("peak_scores must align one-to-one with boundaries")
    if _is_feasible(x, lo, hi, gap):
        return pred

    limit = max_feasible_count(duration_s, config)
    if len(x) > limit:
        if peak_scores is None:
            raise ValueError("scores required to prune infeasible set")
        order = sorted(range(len(x)), key=lambda i: (-peak_scores[i], i))
        keep = sorted(order[:limit])
        x = tuple(x[i] for i in keep)
    if not x:
        return BoundarySet(pred.video_id, ())

    n = len(x)
    offsets = gap * np.arange(n, dtype=np.float64)
    y = np.asarray(x, dtype=np.float64) - offsets
    fitted = _isotonic_nondecreasing(y)
    np.clip(fitted, lo, hi - gap * (n - 1), out=fitted)
    return BoundarySet(pred.video_id, (fitted + offsets).tolist())
