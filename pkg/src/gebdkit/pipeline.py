"""Score-file orchestration: ensembles, easy/hard routing, pseudo-labels, folds.

    ensemble_mean      — elementwise average of score curves, order-independent
    split_easy_hard    — route a video by its maximum predicted score
    run_ensemble       — per-video: provisional ensemble, split, subset
                         re-ensemble, decode, align
    make_pseudo_labels — wrap aligned predictions as single-rater records
    kfold_split        — deterministic hash-bucketed, balanced folds
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .align import AlignConfig, align_boundaries
from .core import (
    SOURCE_PSEUDO,
    AnnotationRecord,
    BoundarySet,
    ScoreCurve,
    VideoMeta,
)
from .softlabel import DecodeConfig, decode_scored

EASY = "easy"
HARD = "hard"


@dataclass(frozen=True)
class EnsembleSpec:
    """Model-id lists for the easy and hard ensembles, plus the split rule."""

    easy_model_ids: tuple[str, ...]
    hard_model_ids: tuple[str, ...]
    split_threshold: float = 0.4
    split_margin: float = 0.3

    def __post_init__(self) -> None:
        object.__setattr__(self, "easy_model_ids", tuple(self.easy_model_ids))
        object.__setattr__(self, "hard_model_ids", tuple(self.hard_model_ids))
        if not self.easy_model_ids or not self.hard_model_ids:
            raise ValueError("model id lists must be non-empty")


def ensemble_mean(curves: Sequence[ScoreCurve]) -> ScoreCurve:
    """Elementwise mean of score curves for one video.

    Values are sorted per bin before a pairwise summation, so the result is
    bit-identical under any permutation of the inputs, and the mean of M
    identical curves is bit-exact whenever M is a power of two.

    Raises:
        ValueError: empty input, or mismatched ids/bin widths/lengths.
    """
    if not curves:
        raise ValueError("ensemble_mean needs at least one curve")
    first = curves[0]
    for c in curves[1:]:
        if c.video_id != first.video_id:
            raise ValueError(f"video_id mismatch: {c.video_id!r} vs {first.video_id!r}")
        if c.bin_width_s != first.bin_width_s or c.num_bins != first.num_bins:
            raise ValueError(f"curve geometry mismatch for {first.video_id!r}")
    stacked = np.stack([c.values for c in curves], axis=0)
    stacked = np.sort(stacked, axis=0)
    # contiguous last-axis reduction uses pairwise summation
    total = np.add.reduce(np.ascontiguousarray(stacked.T), axis=1)
    return ScoreCurve(first.video_id, first.bin_width_s, total / len(curves))


def split_easy_hard(curve: ScoreCurve, spec: EnsembleSpec) -> str:
    """"hard" iff max(values) < split_threshold + split_margin (strictly)."""
    return HARD if float(curve.values.max()) < spec.split_threshold + spec.split_margin else EASY


def run_ensemble(
    score_sets: Mapping[str, Sequence[ScoreCurve]],
    spec: EnsembleSpec,
    decode_config: DecodeConfig = DecodeConfig(),
    align_config: AlignConfig = AlignConfig(),
) -> tuple[list[BoundarySet], dict[str, tuple[float, ...]]]:
    """Ensemble, split, decode, and align every video.

    Per video: average the easy-list curves, classify easy/hard on that
    provisional ensemble, re-average over the chosen subset's models, decode
    boundaries, and align them. Durations are taken from the curve geometry
    (num_bins * bin_width).

    Args:
        score_sets: model_id -> that model's curves (all models must cover
            the same video ids).

    Returns:
        (predictions sorted by video_id, video_id -> aligned peak scores).

    Raises:
        ValueError: a spec-listed model is missing, or video coverage differs.
    """
    for mid in set(spec.easy_model_ids) | set(spec.hard_model_ids):
        if mid not in score_sets:
            raise ValueError(f"model {mid!r} listed in spec but absent from score sets")

    by_model: dict[str, dict[str, ScoreCurve]] = {
        mid: {c.video_id: c for c in curves} for mid, curves in score_sets.items()
    }
    needed = sorted(set(spec.easy_model_ids) | set(spec.hard_model_ids))
    video_ids = sorted(by_model[needed[0]])
    for mid in needed[1:]:
        if sorted(by_model[mid]) != video_ids:
            raise ValueError(f"model {mid!r} covers different video ids")

    preds: list[BoundarySet] = []
    scores: dict[str, tuple[float, ...]] = {}
    easy_ids = sorted(spec.easy_model_ids)
    hard_ids = sorted(spec.hard_model_ids)
    for vid in video_ids:
        provisional = ensemble_mean([by_model[m][vid] for m in easy_ids])
        subset = easy_ids if split_easy_hard(provisional, spec) == EASY else hard_ids
        fused = (
            provisional
            if subset == easy_ids
            else ensemble_mean([by_model[m][vid] for m in subset])
        )
        meta = fused.meta()
        decoded, peak_scores = decode_scored(fused, meta, decode_config)
        aligned = align_boundaries(decoded, peak_scores, meta.duration_s, align_config)
        # pruning keeps a subset; recover the scores of surviving boundaries
        if len(aligned) != len(decoded):
            kept = _surviving_scores(decoded, aligned, peak_scores)
        else:
            kept = peak_scores
        preds.append(aligned)
        scores[vid] = kept
    return preds, scores


def _surviving_scores(
    decoded: BoundarySet, aligned: BoundarySet, peak_scores: tuple[float, ...]
) -> tuple[float, ...]:
    limit = len(aligned)
    order = sorted(range(len(decoded)), key=lambda i: (-peak_scores[i], i))
    keep = sorted(order[:limit])
    return tuple(peak_scores[i] for i in keep)


def make_pseudo_labels(
    predictions: Sequence[BoundarySet], metas: Mapping[str, VideoMeta]
) -> list[AnnotationRecord]:
    """Turn aligned predictions into single-rater pseudo annotation records.

    Videos whose prediction is empty are omitted: a usable training record
    carries at least one boundary.
    """
    out: list[AnnotationRecord] = []
    for pred in predictions:
        if not pred.boundaries:
            continue
        meta = metas[pred.video_id]
        out.append(AnnotationRecord(meta=meta, raters=(pred,), source=SOURCE_PSEUDO))
    return out


def _stable_hash(seed: int, video_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{video_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def kfold_split(
    video_ids: Sequence[str], k: int, seed: int = 0
) -> list[tuple[list[str], list[str]]]:
    """Deterministic k folds: (train_ids, valid_ids) per fold.

    Each id hashes to a preferred fold; ids are placed in hash order and
    overflow past a fold's capacity spills to the next fold cyclically, so
    fold sizes differ by at most one.

    Raises:
        ValueError: k < 2, duplicate ids, or k > number of ids.
    """
    ids = list(video_ids)
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(set(ids)) != len(ids):
        raise ValueError("video ids must be unique")
    if k > len(ids):
        raise ValueError(f"k={k} exceeds number of videos ({len(ids)})")

    n = len(ids)
    base, rem = divmod(n, k)
    capacity = [base + 1 if f < rem else base for f in range(k)]
    folds: list[list[str]] = [[] for _ in range(k)]
    for vid in sorted(ids, key=lambda v: (_stable_hash(seed, v), v)):
        f = _stable_hash(seed, vid) % k
        while len(folds[f]) >= capacity[f]:
            f = (f + 1) % k
        folds[f].append(vid)

    out: list[tuple[list[str], list[str]]] = []
    for f in range(k):
        valid = sorted(folds[f])
        train = sorted(v for g in range(k) if g != f for v in folds[g])
        out.append((train, valid))
    return out
