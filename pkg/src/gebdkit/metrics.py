"""Boundary-matching F1 at a relative-distance threshold.

A prediction counts as a true positive when a ground-truth boundary lies
within +/- rel_dis * duration of it, each boundary matched at most once.
Per-video scores are aggregated over raters (max by default) and over the
corpus (unweighted mean).
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import AnnotationRecord, BoundarySet

DEFAULT_REL_DIS = 0.05


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "MatchResult":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        if tp == 0 and fp == 0 and fn == 0:
            # no boundaries on either side: perfect agreement by convention
            f1 = 1.0
        elif precision + recall > 0:
            f1 = 2.0 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
        return cls(tp, fp, fn, precision, recall, f1)


def match_boundaries(
    pred: BoundarySet,
    gt: BoundarySet,
    duration_s: float,
    rel_dis: float = DEFAULT_REL_DIS,
) -> MatchResult:
    """Maximum one-to-one matching of pred against gt within the tolerance.

    Both inputs must be sorted. The two-pointer greedy below is maximum for
    this problem because every prediction's eligibility interval has the
    same width, so intervals never nest.
    """
    tol = rel_dis * duration_s
    p, g = pred.boundaries, gt.boundaries
    i = j = tp = 0
    while i < len(p) and j < len(g):
        if abs(p[i] - g[j]) <= tol:
            tp += 1
            i += 1
            j += 1
        elif g[j] < p[i] - tol:
            j += 1
        else:
            i += 1
    return MatchResult.from_counts(tp, len(p) - tp, len(g) - tp)


def f1_against_raters(
    pred: BoundarySet,
    record: AnnotationRecord,
    rel_dis: float = DEFAULT_REL_DIS,
) -> tuple[list[MatchResult], float]:
    """Score a prediction against every rater; best_f1 is the max over raters."""
    if pred.video_id != record.meta.video_id:
        raise ValueError(
            f"video_id mismatch: pred {pred.video_id!r} vs record {record.meta.video_id!r}"
        )
    per_rater = [
        match_boundaries(pred, rater, record.meta.duration_s, rel_dis)
        for rater in record.raters
    ]
    return per_rater, max(r.f1 for r in per_rater)


@dataclass(frozen=True)
class VideoScore:
    video_id: str
    f1: float
    best: MatchResult
    per_rater: tuple[MatchResult, ...]


@dataclass(frozen=True)
class CorpusReport:
    mean_f1: float
    pooled_precision: float
    pooled_recall: float
    videos: tuple[VideoScore, ...]


def corpus_f1(
    preds: list[BoundarySet],
    records: list[AnnotationRecord],
    rel_dis: float = DEFAULT_REL_DIS,
    agg: str = "max",
) -> CorpusReport:
    """Aggregate per-video scores over a corpus.

    agg selects the per-video rater aggregation: "max" takes the best
    rater's f1, "mean" averages f1 over raters. Pooled precision/recall
    always accumulate the counts of each video's best-f1 rater (first rater
    on ties), as a corpus-level diagnostic. The report is sorted by
    video_id, so it is independent of evaluation order.

    Raises:
        ValueError: predictions and records do not cover the same video ids.
    """
    if agg not in ("max", "mean"):
        raise ValueError(f"agg must be 'max' or 'mean', got {agg!r}")
    pred_ids = {p.video_id for p in preds}
    rec_by_id = {r.meta.video_id: r for r in records}
    missing = sorted(pred_ids - rec_by_id.keys())
    extra = sorted(rec_by_id.keys() - pred_ids)
    if missing or extra:
        raise ValueError(
            f"video id mismatch: predictions without records {missing}, "
            f"records without predictions {extra}"
        )

    scores: list[VideoScore] = []
    for pred in sorted(preds, key=lambda b: b.video_id):
        record = rec_by_id[pred.video_id]
        per_rater, best_f1 = f1_against_raters(pred, record, rel_dis)
        best = max(per_rater, key=lambda r: r.f1)
        f1 = best_f1 if agg == "max" else sum(r.f1 for r in per_rater) / len(per_rater)
        scores.append(VideoScore(pred.video_id, f1, best, tuple(per_rater)))

    tp = sum(s.best.tp for s in scores)
    fp = sum(s.best.fp for s in scores)
    fn = sum(s.best.fn for s in scores)
    return CorpusReport(
        mean_f1=sum(s.f1 for s in scores) / len(scores) if scores else 0.0,
        pooled_precision=tp / (tp + fp) if tp + fp else 0.0,
        pooled_recall=tp / (tp + fn) if tp + fn else 0.0,
        videos=tuple(scores),
    )
