"""Domain types, validation, and JSONL serialization shared by all modules.

Types:
    VideoMeta        — per-video bin geometry (duration, bin width, bin count)
    BoundarySet      — sorted boundary times (seconds) for one video
    AnnotationRecord — a video's metadata plus one or more raters' boundaries
    ScoreCurve       — per-bin boundary scores at a fixed bin width
    SoftTarget       — alias of ScoreCurve, produced by the soft-label encoder

I/O:
    read_annotations / write_annotations — annotations.jsonl
    read_scores / write_scores           — scores.jsonl
    read_predictions / write_predictions — predictions.jsonl

All types are immutable after construction and all functions are pure, so
everything here is safe to use from concurrent per-video workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_BIN_WIDTH_S = 0.25

SOURCE_HUMAN = "human"
SOURCE_PSEUDO = "pseudo"
_SOURCES = (SOURCE_HUMAN, SOURCE_PSEUDO)


class DataError(ValueError):
    """Malformed or inconsistent input data (file contents, schemas, ids)."""


def num_bins_for(duration_s: float, bin_width_s: float = DEFAULT_BIN_WIDTH_S) -> int:
    """Bin count for a video: round(duration / bin_width), at least 1."""
    return max(1, int(round(duration_s / bin_width_s)))


@dataclass(frozen=True)
class VideoMeta:
    """Bin geometry of one video.

    Bin i covers time starting at its left edge ``i * bin_width_s``; the
    default geometry maps a 10 s video to 40 bins of 0.25 s.
    """

    video_id: str
    duration_s: float
    num_bins: int
    bin_width_s: float = DEFAULT_BIN_WIDTH_S

    @classmethod
    def from_duration(
        cls, video_id: str, duration_s: float, bin_width_s: float = DEFAULT_BIN_WIDTH_S
    ) -> "VideoMeta":
        return cls(video_id, duration_s, num_bins_for(duration_s, bin_width_s), bin_width_s)


@dataclass(frozen=True)
class BoundarySet:
    """Sorted boundary times (seconds) for one video.

    Valid sets are strictly increasing with every value inside the open
    interval (0, duration) of the associated video; use
    :func:`validate_record` to check without raising.
    """

    video_id: str
    boundaries: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundaries", tuple(float(b) for b in self.boundaries))

    def __len__(self) -> int:
        return len(self.boundaries)


@dataclass(frozen=True)
class AnnotationRecord:
    """One video's boundary annotations: ground truth raters or a pseudo label."""

    meta: VideoMeta
    raters: tuple[BoundarySet, ...]
    source: str = SOURCE_HUMAN

    def __post_init__(self) -> None:
        object.__setattr__(self, "raters", tuple(self.raters))


@dataclass(frozen=True)
class ScoreCurve:
    """Per-bin boundary scores for one video (bin i scores time i * bin_width)."""

    video_id: str
    bin_width_s: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def num_bins(self) -> int:
        return int(self.values.shape[0])

    def meta(self, video_id: str | None = None) -> VideoMeta:
        """Geometry implied by this curve, taking duration = num_bins * bin_width."""
        return VideoMeta(
            video_id or self.video_id,
            self.num_bins * self.bin_width_s,
            self.num_bins,
            self.bin_width_s,
        )


# A soft target has exactly the shape and semantics of a score curve.
SoftTarget = ScoreCurve


def validate_record(record: AnnotationRecord) -> list[str]:
    """Check every invariant of *record*; return findings instead of raising.

    Returns:
        One message per violation, each naming the offending field and rule.
        Empty list iff the record is fully valid.
    """
    out: list[str] = []
    meta = record.meta
    if not meta.video_id:
        out.append("meta.video_id: empty")
    if not (meta.duration_s > 0):
        out.append("meta.duration_s: must be > 0")
    if not (meta.bin_width_s > 0):
        out.append("meta.bin_width_s: must be > 0")
    if meta.num_bins < 1:
        out.append("meta.num_bins: must be >= 1")
    elif meta.duration_s > 0 and meta.bin_width_s > 0:
        expect = num_bins_for(meta.duration_s, meta.bin_width_s)
        if meta.num_bins != expect:
            out.append(
                f"meta.num_bins: {meta.num_bins} != round(duration/bin_width) = {expect}"
            )
    if record.source not in _SOURCES:
        out.append(f"source: {record.source!r} not in {_SOURCES}")
    if not record.raters:
        out.append("raters: empty")
    if record.source == SOURCE_PSEUDO and len(record.raters) != 1:
        out.append(f"raters: pseudo records need exactly one rater, got {len(record.raters)}")
    for r, rater in enumerate(record.raters):
        if rater.video_id != meta.video_id:
            out.append(f"raters[{r}].video_id: {rater.video_id!r} != {meta.video_id!r}")
        bs = rater.boundaries
        if any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
            out.append(f"raters[{r}].boundaries: not strictly increasing")
        for b in bs:
            if not math.isfinite(b) or not (0.0 < b < meta.duration_s):
                out.append(f"raters[{r}].boundaries: {b} outside (0, duration)")
                break
    return out


# -- JSONL plumbing ---------------------------------------------------------


def _iter_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _write_jsonl(path: Path, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, separators=(", ", ": ")))
            fh.write("\n")


def _need(obj: dict, key: str, path: Path, lineno: int):
    if key not in obj:
        raise DataError(f"{path}:{lineno}: missing field {key!r}")
    return obj[key]


def _check_dup(video_id: str, seen: set, path: Path, lineno: int) -> None:
    if video_id in seen:
        raise DataError(f"{path}:{lineno}: duplicate video_id {video_id!r}")
    seen.add(video_id)


def read_annotations(
    path: str | Path, bin_width_s: float = DEFAULT_BIN_WIDTH_S
) -> list[AnnotationRecord]:
    """Read annotations.jsonl; one record per line, errors name the line."""
    path = Path(path)
    records: list[AnnotationRecord] = []
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(path):
        video_id = _need(obj, "video_id", path, lineno)
        duration = _need(obj, "duration", path, lineno)
        source = _need(obj, "source", path, lineno)
        raters = _need(obj, "raters", path, lineno)
        if not isinstance(video_id, str) or not isinstance(duration, (int, float)):
            raise DataError(f"{path}:{lineno}: bad video_id/duration types")
        if source not in _SOURCES:
            raise DataError(f"{path}:{lineno}: source must be one of {_SOURCES}")
        if not isinstance(raters, list) or not all(isinstance(r, list) for r in raters):
            raise DataError(f"{path}:{lineno}: raters must be a list of lists")
        _check_dup(video_id, seen, path, lineno)
        meta = VideoMeta.from_duration(video_id, float(duration), bin_width_s)
        records.append(
            AnnotationRecord(
                meta=meta,
                raters=tuple(BoundarySet(video_id, r) for r in raters),
                source=source,
            )
        )
    return records


def write_annotations(records: Sequence[AnnotationRecord], path: str | Path) -> None:
    _write_jsonl(
        Path(path),
        (
            {
                "video_id": rec.meta.video_id,
                "duration": rec.meta.duration_s,
                "source": rec.source,
                "raters": [list(r.boundaries) for r in rec.raters],
            }
            for rec in records
        ),
    )


def read_scores(
    path: str | Path, expected_bins: Mapping[str, int] | None = None
) -> list[ScoreCurve]:
    """Read scores.jsonl with full-precision values.

    Args:
        expected_bins: Optional map video_id -> num_bins; curves whose length
            disagrees raise :class:`DataError`.
    """
    path = Path(path)
    curves: list[ScoreCurve] = []
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(path):
        video_id = _need(obj, "video_id", path, lineno)
        p = _need(obj, "p", path, lineno)
        values = _need(obj, "values", path, lineno)
        if not isinstance(values, list) or not values:
            raise DataError(f"{path}:{lineno}: values must be a non-empty list")
        _check_dup(video_id, seen, path, lineno)
        arr = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise DataError(f"{path}:{lineno}: non-finite score for {video_id!r}")
        if expected_bins is not None and video_id in expected_bins:
            want = expected_bins[video_id]
            if arr.shape[0] != want:
                raise DataError(
                    f"{path}:{lineno}: {video_id!r} has {arr.shape[0]} values, expected {want}"
                )
        curves.append(ScoreCurve(video_id, float(p), arr))
    return curves


def write_scores(curves: Sequence[ScoreCurve], path: str | Path) -> None:
    for c in curves:
        if not np.all(np.isfinite(c.values)):
            raise DataError(f"non-finite score in curve {c.video_id!r}")
    _write_jsonl(
        Path(path),
        (
            {"video_id": c.video_id, "p": c.bin_width_s, "values": c.values.tolist()}
            for c in curves
        ),
    )


def read_predictions(path: str | Path) -> list[BoundarySet]:
    """Read predictions.jsonl; an optional per-line "peak_scores" field is ignored."""
    path = Path(path)
    preds: list[BoundarySet] = []
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(path):
        video_id = _need(obj, "video_id", path, lineno)
        boundaries = _need(obj, "boundaries", path, lineno)
        if not isinstance(boundaries, list):
            raise DataError(f"{path}:{lineno}: boundaries must be a list")
        _check_dup(video_id, seen, path, lineno)
        preds.append(BoundarySet(video_id, boundaries))
    return preds


def read_prediction_scores(path: str | Path) -> dict[str, tuple[float, ...]]:
    """Collect the optional "peak_scores" field of predictions.jsonl, when present."""
    path = Path(path)
    out: dict[str, tuple[float, ...]] = {}
    for lineno, obj in _iter_jsonl(path):
        if "peak_scores" in obj:
            scores = obj["peak_scores"]
            if not isinstance(scores, list) or len(scores) != len(obj.get("boundaries", [])):
                raise DataError(f"{path}:{lineno}: peak_scores must align with boundaries")
            out[obj["video_id"]] = tuple(float(s) for s in scores)
    return out


def write_predictions(
    preds: Sequence[BoundarySet],
    path: str | Path,
    peak_scores: Mapping[str, Sequence[float]] | None = None,
) -> None:
    def rows():
        for b in preds:
            row = {"video_id": b.video_id, "boundaries": list(b.boundaries)}
            if peak_scores is not None and b.video_id in peak_scores:
                row["peak_scores"] = [float(s) for s in peak_scores[b.video_id]]
            yield row

    _write_jsonl(Path(path), rows())
