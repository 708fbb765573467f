"""Seeded synthetic data: boundaries, noisy raters, model-like scores, features.

Everything is a pure function of (config, seed, video index / model id): each
video derives its own RNG stream from a stable hash, so corpora can be
generated in any order or in parallel with identical results.

Durations are snapped to whole bins so that the duration implied by a score
curve (num_bins * bin_width) matches the annotated duration exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .core import (
    AnnotationRecord,
    BoundarySet,
    ScoreCurve,
    SOURCE_HUMAN,
    VideoMeta,
)
from .scorer import FeatureSequence
from .softlabel import encode_soft_labels, gaussian_smooth


@dataclass(frozen=True)
class RaterModel:
    jitter_std_s: float = 0.15
    drop_prob: float = 0.1
    spurious_rate_per_video: float = 0.3
    raters: int = 5


@dataclass(frozen=True)
class ScoreModel:
    bump_sigma_bins: float = 1.0
    noise_std: float = 0.05
    baseline: float = 0.05


@dataclass(frozen=True)
class FeatureModel:
    feature_dim: int = 16
    signal_dim_frac: float = 0.25
    noise_std: float = 0.1


@dataclass(frozen=True)
class SynthConfig:
    duration_range_s: tuple[float, float] = (4.0, 10.0)
    boundary_count_range: tuple[int, int] = (1, 8)
    min_separation_s: float = 1.0
    edge_buffer_s: float = 0.3
    bin_width_s: float = 0.25
    rater: RaterModel = field(default_factory=RaterModel)
    score: ScoreModel = field(default_factory=ScoreModel)
    feature: FeatureModel = field(default_factory=FeatureModel)
    seed: int = 0


def _rng_for(seed: int, *labels) -> np.random.Generator:
    digest = hashlib.sha256(":".join(str(x) for x in (seed, *labels)).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def video_id_for(index: int) -> str:
    return f"synth{index:05d}"


def _gen_truth(meta: VideoMeta, config: SynthConfig, rng: np.random.Generator) -> BoundarySet:
    """Boundaries inside (edge, duration - edge) with min pairwise separation."""
    d = meta.duration_s
    edge = config.edge_buffer_s
    sep = config.min_separation_s
    lo_n, hi_n = config.boundary_count_range
    n = int(rng.integers(lo_n, hi_n + 1))
    while n > 1 and d - 2 * edge - (n - 1) * sep <= 0:
        n -= 1
    span = d - 2 * edge - (n - 1) * sep
    if span <= 0:
        # too short even for one buffered boundary: drop it mid-video
        return BoundarySet(meta.video_id, (d / 2.0,))
    offsets = np.sort(rng.uniform(0.0, span, size=n))
    times = edge + offsets + sep * np.arange(n)
    return BoundarySet(meta.video_id, times.tolist())


def _perturb_rater(
    truth: BoundarySet, meta: VideoMeta, config: SynthConfig, rng: np.random.Generator
) -> BoundarySet:
    d = meta.duration_s
    rm = config.rater
    kept = []
    for t in truth.boundaries:
        if rng.random() < rm.drop_prob:
            continue
        kept.append(t + rng.normal(0.0, rm.jitter_std_s))
    for _ in range(rng.poisson(rm.spurious_rate_per_video)):
        kept.append(rng.uniform(config.edge_buffer_s, d - config.edge_buffer_s))
    kept = np.clip(np.sort(kept), 1e-3, d - 1e-3)
    dedup: list[float] = []
    for t in kept:
        if not dedup or t - dedup[-1] > 1e-6:
            dedup.append(float(t))
    return BoundarySet(meta.video_id, dedup)


def gen_video(config: SynthConfig, index: int) -> tuple[BoundarySet, AnnotationRecord]:
    """Deterministic truth + multi-rater record for one video index."""
    vid = video_id_for(index)
    rng = _rng_for(config.seed, vid, "truth")
    p = config.bin_width_s
    lo_d, hi_d = config.duration_range_s
    bins = max(1, int(round(rng.uniform(lo_d, hi_d) / p)))
    meta = VideoMeta(vid, bins * p, bins, p)
    truth = _gen_truth(meta, config, rng)
    raters = tuple(
        _perturb_rater(truth, meta, config, _rng_for(config.seed, vid, "rater", r))
        for r in range(config.rater.raters)
    )
    return truth, AnnotationRecord(meta=meta, raters=raters, source=SOURCE_HUMAN)


def gen_corpus(
    config: SynthConfig, n_videos: int
) -> tuple[list[BoundarySet], list[AnnotationRecord]]:
    """n_videos deterministic (truth, record) pairs."""
    if n_videos < 1:
        raise ValueError("n_videos must be >= 1")
    pairs = [gen_video(config, i) for i in range(n_videos)]
    return [t for t, _ in pairs], [r for _, r in pairs]


def gen_scores(
    truth: BoundarySet,
    meta: VideoMeta,
    config: SynthConfig,
    model_id: str = "m0",
) -> ScoreCurve:
    """Simulated model output: blurred soft target + baseline + seeded noise."""
    sm = config.score
    target = encode_soft_labels(truth, meta)
    curve = gaussian_smooth(target, sm.bump_sigma_bins)
    values = curve.values + sm.baseline
    if sm.noise_std > 0:
        rng = _rng_for(config.seed, meta.video_id, "score", model_id)
        values = values + rng.normal(0.0, sm.noise_std, size=values.shape)
    return ScoreCurve(meta.video_id, meta.bin_width_s, np.clip(values, 0.0, 1.0))


def signal_direction(config: SynthConfig) -> np.ndarray:
    """Fixed unit vector spanning the first signal_dim_frac of the dims."""
    fm = config.feature
    k = max(1, int(round(fm.signal_dim_frac * fm.feature_dim)))
    u = np.zeros(fm.feature_dim)
    u[:k] = 1.0 / np.sqrt(k)
    return u


def gen_features(
    truth: BoundarySet, meta: VideoMeta, config: SynthConfig
) -> FeatureSequence:
    """Per-bin features: soft-target mass along a fixed direction, plus noise."""
    fm = config.feature
    target = encode_soft_labels(truth, meta)
    rows = np.outer(target.values, signal_direction(config))
    if fm.noise_std > 0:
        rng = _rng_for(config.seed, meta.video_id, "features")
        rows = rows + rng.normal(0.0, fm.noise_std, size=rows.shape)
    return FeatureSequence(meta.video_id, rows)
