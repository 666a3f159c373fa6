"""Dynamic-interaction clip filtering and long-term segment aggregation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from . import kernels
from .types import ClipRecord, SegmentRecord, TimeInterval, validate_clip

RULE_ORDER = ("ego_score", "duration", "hand_count", "object_coverage", "displacement")


class ClipError(ValueError):
    """A rule could not be evaluated on a clip."""


@dataclass(frozen=True)
class FilterConfig:
    ego_threshold: float = 0.5
    max_hands: int = 2
    alpha: float = 0.7
    disp_fraction: float = 0.1
    min_duration_s: float = 2.0
    frame_stride: int = 1

    def __post_init__(self):
        problems = []
        if not 0.0 <= self.ego_threshold <= 1.0:
            problems.append("ego_threshold must lie in [0,1]")
        if self.max_hands < 0:
            problems.append("max_hands must be >= 0")
        if not 0.0 < self.alpha <= 1.0:
            problems.append("alpha must lie in (0,1]")
        if not 0.0 < self.disp_fraction <= 1.0:
            problems.append("disp_fraction must lie in (0,1]")
        if not self.min_duration_s > 0:
            problems.append("min_duration_s must be > 0")
        if self.frame_stride < 1:
            problems.append("frame_stride must be >= 1")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True)
class FilterDecision:
    clip_id: str
    kept: bool
    failed_rule: str = "none"
    metrics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "kept": self.kept,
            "failed_rule": self.failed_rule,
            "metrics": self.metrics,
        }


def ego_gate(clip: ClipRecord, cfg: FilterConfig) -> bool:
    if clip.ego_score is None:
        raise ClipError("ego score absent")
    return clip.ego_score >= cfg.ego_threshold


def duration_rule(clip: ClipRecord, cfg: FilterConfig) -> bool:
    return clip.duration >= cfg.min_duration_s


def max_hands_per_frame(clip: ClipRecord) -> int:
    return max((len(f.hand_boxes) for f in clip.frames), default=0)


def hand_count_rule(clip: ClipRecord, cfg: FilterConfig) -> bool:
    """False when some frame shows more hands than one person has."""
    return max_hands_per_frame(clip) <= cfg.max_hands


def total_object_boxes(clip: ClipRecord) -> int:
    return sum(len(f.object_boxes) for f in clip.frames)


def object_coverage_rule(clip: ClipRecord, cfg: FilterConfig) -> bool:
    n = len(clip.frames)
    if n == 0:
        raise ClipError("empty clip")
    return not total_object_boxes(clip) < cfg.alpha * n


def hand_centers_px(clip: ClipRecord, stride: int = 1) -> np.ndarray:
    """Per-frame hand center in pixels for every ``stride``-th frame that has hands.

    With several hands in a frame the center is the mean of their box centers.
    """
    rows = []
    for f in clip.frames[::stride]:
        if not f.hand_boxes:
            continue
        cx = sum((b.x_min + b.x_max) / 2 for b in f.hand_boxes) / len(f.hand_boxes)
        cy = sum((b.y_min + b.y_max) / 2 for b in f.hand_boxes) / len(f.hand_boxes)
        rows.append((cx * f.image_w, cy * f.image_h))
    return np.asarray(rows, dtype=np.float64).reshape(-1, 2)


def max_hand_displacement(clip: ClipRecord, stride: int = 1) -> float:
    return kernels.max_pairwise_distance(hand_centers_px(clip, stride))


def displacement_threshold(clip: ClipRecord, cfg: FilterConfig) -> float:
    f = clip.frames[0]
    return cfg.disp_fraction * min(f.image_h, f.image_w)


def displacement_rule(clip: ClipRecord, cfg: FilterConfig) -> bool:
    if not any(f.hand_boxes for f in clip.frames):
        return False
    return max_hand_displacement(clip, cfg.frame_stride) > displacement_threshold(clip, cfg)


# validation issues are charged to the first rule that depends on the broken field
def _rule_for_issue(issue: str) -> str:
    if issue.startswith("ego score"):
        return "ego_score"
    if issue in ("interval inverted", "negative time"):
        return "duration"
    return "hand_count"


def decide(clip: ClipRecord, cfg: FilterConfig) -> FilterDecision:
    """Apply the rules in ``RULE_ORDER`` and stop at the first failure."""
    metrics: dict = {}
    report = validate_clip(clip)
    if report:
        rule = min((_rule_for_issue(i) for i in report.issues), key=RULE_ORDER.index)
        metrics["error"] = "; ".join(report.issues)
        return FilterDecision(clip.clip_id, False, rule, metrics)

    if clip.ego_score is None:
        metrics["error"] = "ego score absent"
        return FilterDecision(clip.clip_id, False, "ego_score", metrics)
    metrics["ego_score"] = clip.ego_score
    if not ego_gate(clip, cfg):
        return FilterDecision(clip.clip_id, False, "ego_score", metrics)

    metrics["duration"] = clip.duration
    if not duration_rule(clip, cfg):
        return FilterDecision(clip.clip_id, False, "duration", metrics)

    metrics["hand_count"] = max_hands_per_frame(clip)
    if not hand_count_rule(clip, cfg):
        return FilterDecision(clip.clip_id, False, "hand_count", metrics)

    if not clip.frames:
        metrics["error"] = "empty clip"
        return FilterDecision(clip.clip_id, False, "object_coverage", metrics)
    metrics["object_coverage"] = total_object_boxes(clip)
    if not object_coverage_rule(clip, cfg):
        return FilterDecision(clip.clip_id, False, "object_coverage", metrics)

    if not any(f.hand_boxes for f in clip.frames):
        metrics["displacement"] = 0.0
        return FilterDecision(clip.clip_id, False, "displacement", metrics)
    metrics["displacement"] = max_hand_displacement(clip, cfg.frame_stride)
    if not metrics["displacement"] > displacement_threshold(clip, cfg):
        return FilterDecision(clip.clip_id, False, "displacement", metrics)

    return FilterDecision(clip.clip_id, True, "none", metrics)


def run_pipeline(
    clips: Iterable[ClipRecord], cfg: Optional[FilterConfig] = None, workers: int = 1
) -> Iterator[FilterDecision]:
    """Yield one decision per clip, in input order."""
    cfg = cfg or FilterConfig()
    if workers <= 1:
        for clip in clips:
            yield decide(clip, cfg)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(lambda c: decide(c, cfg), clips)


def _text_of(clip: ClipRecord) -> Optional[str]:
    return clip.caption if clip.caption is not None else clip.narration


def segment_long_term(
    clips: Iterable[ClipRecord],
    min_len_s: float = 15.0,
    max_len_s: float = 120.0,
    max_gap_s: float = 5.0,
    delimiter: str = " ",
) -> Iterator[SegmentRecord]:
    """Greedily merge consecutive clips of the same video into segments.

    A segment closes when the next clip belongs to another video, starts
    more than ``max_gap_s`` after the current segment ends (or before it
    starts), or would stretch the segment past ``max_len_s``. Segments
    shorter than ``min_len_s`` are dropped, as are single clips already
    longer than ``max_len_s``.
    """
    if not 0 < min_len_s <= max_len_s:
        raise ValueError("need 0 < min_len_s <= max_len_s")
    current: list[ClipRecord] = []
    counters: dict[str, int] = {}

    def close() -> Optional[SegmentRecord]:
        if not current:
            return None
        start = current[0].interval.start_s
        end = max(c.interval.end_s for c in current)
        if not min_len_s <= end - start <= max_len_s:
            return None
        vid = current[0].video_id
        k = counters.get(vid, 0)
        counters[vid] = k + 1
        texts = [t for t in (_text_of(c) for c in current) if t]
        return SegmentRecord(
            segment_id=f"{vid}#seg{k:03d}",
            video_id=vid,
            clip_ids=tuple(c.clip_id for c in current),
            interval=TimeInterval(start, end),
            caption=delimiter.join(texts),
        )

    for clip in clips:
        if current:
            seg_start = current[0].interval.start_s
            seg_end = max(c.interval.end_s for c in current)
            gap = clip.interval.start_s - seg_end
            breaks = (
                clip.video_id != current[0].video_id
                or clip.interval.start_s < seg_start
                or gap > max_gap_s
                or max(seg_end, clip.interval.end_s) - seg_start > max_len_s
            )
            if breaks:
                seg = close()
                if seg is not None:
                    yield seg
                current = []
        current.append(clip)
    seg = close()
    if seg is not None:
        yield seg


def summarize(decisions: Iterable[FilterDecision]) -> dict:
    counts = {rule: 0 for rule in ("none",) + RULE_ORDER}
    for d in decisions:
        counts[d.failed_rule] += 1
    return counts



def order_for_segmentation(clips: Iterable[ClipRecord]) -> list[ClipRecord]:
    """Group clips by video (first-appearance order) and sort each group by start time."""
    first_seen: dict[str, int] = {}
    clips = list(clips)
    for c in clips:
        first_seen.setdefault(c.video_id, len(first_seen))
    return sorted(clips, key=lambda c: (first_seen[c.video_id], c.interval.start_s))
