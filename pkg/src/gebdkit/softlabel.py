"""Soft-label encoding and score-curve decoding.

Encoding splits each boundary's unit mass between the two bins around it,
proportionally to proximity. Decoding runs the inverse chain: Gaussian
smoothing, windowed peak picking, and a sub-bin bias shift that moves each
peak toward the side with higher neighboring scores.

    encode_soft_labels — boundaries -> per-bin soft target
    gaussian_smooth    — edge-renormalized Gaussian filter
    find_peaks         — local maxima within a +/-w window, thresholded
    compute_bias       — sub-bin refinement offset (seconds) for one peak
    decode_boundaries  — smooth + peaks + bias, clamped into (0, duration)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BoundarySet, ScoreCurve, SoftTarget, VideoMeta

CLAMP_EPS_S = 1e-6


@dataclass(frozen=True)
class DecodeConfig:
    """Knobs for the score-curve -> boundaries decoder.

    sigma_bins:         Gaussian smoothing width in bins (0 disables).
    peak_window_bins:   half-width w of the peak dominance window (+/-w bins).
    threshold:          minimum smoothed score for a bin to count as a peak.
    min_peak_score_eps: peaks scored below this get a zero bias shift.
    """

    sigma_bins: float = 1.0
    peak_window_bins: int = 2
    threshold: float = 0.4
    min_peak_score_eps: float = 1e-6

    def __post_init__(self) -> None:
        if self.sigma_bins < 0:
            raise ValueError("sigma_bins must be >= 0")
        if self.peak_window_bins < 1:
            raise ValueError("peak_window_bins must be >= 1")
        if not (0.0 < self.threshold < 1.0):
            raise ValueError("threshold must be in (0, 1)")
        if not (self.threshold > self.min_peak_score_eps):
            raise ValueError("threshold must exceed min_peak_score_eps")


def encode_soft_labels(boundaries: BoundarySet, meta: VideoMeta) -> SoftTarget:
    """Encode boundary times as a per-bin soft target.

    A boundary at time t with fractional bin offset f = t/p - floor(t/p)
    contributes 1-f to bin floor(t/p) and f to the next bin. Mass that would
    land past the last bin is added to the last bin instead, and each bin is
    finally clamped to [0, 1].

    Raises:
        ValueError: if any boundary lies outside (0, duration).
    """
    p = meta.bin_width_s
    n = meta.num_bins
    target = np.zeros(n, dtype=np.float64)
    for t in boundaries.boundaries:
        if not (0.0 < t < meta.duration_s):
            raise ValueError(
                f"boundary {t} outside (0, {meta.duration_s}) for {meta.video_id!r}"
            )
        ratio = t / p
        i0 = int(math.floor(ratio))
        f = ratio - i0
        if i0 >= n:  # duration rounding can leave a sliver past the last bin
            i0, f = n - 1, 1.0
        target[i0] += 1.0 - f
        if i0 + 1 < n:
            target[i0 + 1] += f
        else:
            target[n - 1] += f
    np.clip(target, 0.0, 1.0, out=target)
    return SoftTarget(meta.video_id, p, target)


def gaussian_kernel(sigma_bins: float) -> np.ndarray:
    """Discrete Gaussian kernel of radius ceil(3*sigma), normalized to sum 1."""
    radius = int(math.ceil(3.0 * sigma_bins))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (k / sigma_bins) ** 2)
    return w / w.sum()


def gaussian_smooth(curve: ScoreCurve, sigma_bins: float) -> ScoreCurve:
    """Smooth a curve with a Gaussian kernel, renormalized at the edges.

    Each output bin divides its windowed sum by the kernel weights that fall
    inside the sequence, so constant curves are preserved exactly everywhere.
    sigma_bins = 0 returns the input unchanged.
    """
    if sigma_bins < 0:
        raise ValueError("sigma_bins must be >= 0")
    if sigma_bins == 0:
        return curve
    w = gaussian_kernel(sigma_bins)
    num = np.convolve(curve.values, w, mode="same")
    den = np.convolve(np.ones_like(curve.values), w, mode="same")
    return ScoreCurve(curve.video_id, curve.bin_width_s, num / den)


def find_peaks(curve: ScoreCurve, config: DecodeConfig) -> list[int]:
    """Indices whose score dominates a +/-w window and clears the threshold.

    Bin i qualifies when values[i] >= values[j] for every in-range j within
    the window, strictly exceeds at least one in-range neighbor, and is at
    least config.threshold. Within a run of exactly tied values only the
    lowest qualifying index is kept.
    """
    v = curve.values
    n = v.shape[0]
    w = config.peak_window_bins
    pad_lo = np.pad(v, w, constant_values=-np.inf)
    pad_hi = np.pad(v, w, constant_values=np.inf)
    win = 2 * w + 1
    win_max = np.lib.stride_tricks.sliding_window_view(pad_lo, win).max(axis=1)
    win_min = np.lib.stride_tricks.sliding_window_view(pad_hi, win).min(axis=1)
    qualifies = (v >= win_max) & (v > win_min) & (v >= config.threshold)

    peaks: list[int] = []
    last_plateau_start = -1
    plateau_start = 0
    for i in range(n):
        if i > 0 and v[i] != v[i - 1]:
            plateau_start = i
        if qualifies[i] and plateau_start != last_plateau_start:
            peaks.append(i)
            last_plateau_start = plateau_start
    return peaks


def compute_bias(curve: ScoreCurve, i: int, min_peak_score_eps: float = 1e-6) -> float:
    """Sub-bin shift (seconds) for the peak at bin i.

    bias = ((s[i+1]+s[i+2]) - (s[i-2]+s[i-1])) / s[i] * p/2, with neighbors
    outside the sequence contributing 0. Peaks scored below
    min_peak_score_eps get bias 0.
    """
    v = curve.values
    n = v.shape[0]
    if not (0 <= i < n):
        raise ValueError(f"peak index {i} out of range [0, {n})")
    if v[i] < min_peak_score_eps:
        return 0.0
    right = sum(v[k] for k in (i + 1, i + 2) if k < n)
    left = sum(v[k] for k in (i - 2, i - 1) if k >= 0)
    return (right - left) / v[i] * (curve.bin_width_s / 2.0)


def decode_scored(
    curve: ScoreCurve, meta: VideoMeta, config: DecodeConfig
) -> tuple[BoundarySet, tuple[float, ...]]:
    """Decode boundaries plus the smoothed peak score backing each one.

    Exact duplicates produced by clamping are merged, keeping the higher
    score. Returned boundaries are sorted; scores stay aligned with them.
    """
    if curve.num_bins != meta.num_bins:
        raise ValueError(
            f"curve has {curve.num_bins} bins, meta declares {meta.num_bins}"
        )
    smoothed = gaussian_smooth(curve, config.sigma_bins)
    p = meta.bin_width_s
    lo, hi = CLAMP_EPS_S, meta.duration_s - CLAMP_EPS_S
    placed: dict[float, float] = {}
    for i in find_peaks(smoothed, config):
        bias = compute_bias(smoothed, i, config.min_peak_score_eps)
        t = min(max(i * p + bias, lo), hi)
        score = float(smoothed.values[i])
        if t not in placed or score > placed[t]:
            placed[t] = score
    times = sorted(placed)
    return (
        BoundarySet(meta.video_id, times),
        tuple(placed[t] for t in times),
    )


def decode_boundaries(
    curve: ScoreCurve, meta: VideoMeta, config: DecodeConfig
) -> BoundarySet:
    """Full decode chain: smooth, pick peaks, bias-shift, clamp, sort, dedupe."""
    return decode_scored(curve, meta, config)[0]
