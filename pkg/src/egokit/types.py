"""Shared record types and their canonical JSON form.

Every type is a frozen dataclass. Construction never validates, so that
malformed input can still be represented and reported on; use the
``validate_*`` functions for invariant checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

SPLITS = ("short", "long", "cot", "fg_spatial", "fg_temporal")

# question types legal for each split; 7 + 6 + 1 + 1 + 1 = 16
QUESTION_TYPES: dict[str, tuple[str, ...]] = {
    "short": (
        "object_existence",
        "object_attribute",
        "object_count",
        "object_interaction",
        "action_description",
        "action_reasoning",
        "background_attribute",
    ),
    "long": (
        "action_sequence",
        "temporal_grounding",
        "object_count",
        "action_prediction",
        "action_summary",
        "action_reasoning",
    ),
    "cot": ("chain_of_thought_reasoning",),
    "fg_temporal": ("fine_grained_temporal_grounding",),
    "fg_spatial": ("hand_object_grounding",),
}


class FieldError(ValueError):
    """A JSON object is missing a field or carries a badly typed one."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.reason = message


def _get(d: dict, name: str, required: bool = True) -> Any:
    if not isinstance(d, dict):
        raise FieldError(name, "expected a JSON object")
    if name not in d:
        if required:
            raise FieldError(name, "missing required field")
        return None
    return d[name]


def _num(d: dict, name: str, required: bool = True) -> Optional[float]:
    v = _get(d, name, required)
    if v is None:
        if required:
            raise FieldError(name, "must not be null")
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FieldError(name, f"expected a number, got {type(v).__name__}")
    return float(v)


def _int(d: dict, name: str) -> int:
    v = _get(d, name)
    if isinstance(v, bool) or not isinstance(v, int):
        raise FieldError(name, f"expected an integer, got {type(v).__name__}")
    return v


def _str(d: dict, name: str, required: bool = True) -> Optional[str]:
    v = _get(d, name, required)
    if v is None:
        if required:
            raise FieldError(name, "must not be null")
        return None
    if not isinstance(v, str):
        raise FieldError(name, f"expected a string, got {type(v).__name__}")
    return v


def _list(d: dict, name: str) -> list:
    v = _get(d, name)
    if not isinstance(v, list):
        raise FieldError(name, "expected a list")
    return v


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in normalized image coordinates."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)

    @property
    def area(self) -> float:
        return max(0.0, self.x_max - self.x_min) * max(0.0, self.y_max - self.y_min)

    @classmethod
    def from_pixels(cls, x_min, y_min, x_max, y_max, image_w, image_h) -> "BBox":
        return cls(x_min / image_w, y_min / image_h, x_max / image_w, y_max / image_h)

    def problems(self) -> list[str]:
        out = []
        if not all(0.0 <= v <= 1.0 for v in (self.x_min, self.y_min, self.x_max, self.y_max)):
            out.append("box coordinate outside [0,1]")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            out.append("box inverted")
        return out

    def to_json(self) -> dict:
        return {"x_min": self.x_min, "y_min": self.y_min, "x_max": self.x_max, "y_max": self.y_max}

    @classmethod
    def from_json(cls, d: dict) -> "BBox":
        return cls(_num(d, "x_min"), _num(d, "y_min"), _num(d, "x_max"), _num(d, "y_max"))


@dataclass(frozen=True)
class TimeInterval:
    start_s: float
    end_s: float

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s

    def problems(self) -> list[str]:
        out = []
        if self.start_s < 0 or self.end_s < 0:
            out.append("negative time")
        if self.start_s > self.end_s:
            out.append("interval inverted")
        return out

    def to_json(self) -> dict:
        return {"start_s": self.start_s, "end_s": self.end_s}

    @classmethod
    def from_json(cls, d: dict) -> "TimeInterval":
        return cls(_num(d, "start_s"), _num(d, "end_s"))


def _nested(d: dict, name: str, parse, required: bool = True):
    v = _get(d, name, required)
    if v is None:
        if required:
            raise FieldError(name, "must not be null")
        return None
    try:
        return parse(v)
    except FieldError as e:
        raise FieldError(f"{name}.{e.field}", e.reason) from None


@dataclass(frozen=True)
class FrameDetections:
    frame_index: int
    timestamp_s: float
    hand_boxes: tuple[BBox, ...]
    object_boxes: tuple[BBox, ...]
    image_w: int
    image_h: int

    def to_json(self) -> dict:
        return {
            "frame_index": self.frame_index,
            "timestamp_s": self.timestamp_s,
            "hand_boxes": [b.to_json() for b in self.hand_boxes],
            "object_boxes": [b.to_json() for b in self.object_boxes],
            "image_w": self.image_w,
            "image_h": self.image_h,
        }

    @classmethod
    def from_json(cls, d: dict) -> "FrameDetections":
        boxes = {}
        for name in ("hand_boxes", "object_boxes"):
            items = _list(d, name)
            parsed = []
            for i, b in enumerate(items):
                try:
                    parsed.append(BBox.from_json(b))
                except FieldError as e:
                    raise FieldError(f"{name}[{i}].{e.field}", "invalid box") from None
            boxes[name] = tuple(parsed)
        return cls(
            frame_index=_int(d, "frame_index"),
            timestamp_s=_num(d, "timestamp_s"),
            hand_boxes=boxes["hand_boxes"],
            object_boxes=boxes["object_boxes"],
            image_w=_int(d, "image_w"),
            image_h=_int(d, "image_h"),
        )


@dataclass(frozen=True)
class ClipRecord:
    clip_id: str
    video_id: str
    interval: TimeInterval
    frames: tuple[FrameDetections, ...] = ()
    ego_score: Optional[float] = None
    caption: Optional[str] = None
    narration: Optional[str] = None

    @property
    def duration(self) -> float:
        return self.interval.duration

    def to_json(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "video_id": self.video_id,
            "interval": self.interval.to_json(),
            "frames": [f.to_json() for f in self.frames],
            "ego_score": self.ego_score,
            "caption": self.caption,
            "narration": self.narration,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ClipRecord":
        frames = []
        for i, f in enumerate(_list(d, "frames")):
            try:
                frames.append(FrameDetections.from_json(f))
            except FieldError as e:
                raise FieldError(f"frames[{i}].{e.field}", e.reason) from None
        return cls(
            clip_id=_str(d, "clip_id"),
            video_id=_str(d, "video_id"),
            interval=_nested(d, "interval", TimeInterval.from_json),
            frames=tuple(frames),
            ego_score=_num(d, "ego_score", required=False),
            caption=_str(d, "caption", required=False),
            narration=_str(d, "narration", required=False),
        )


@dataclass(frozen=True)
class SegmentRecord:
    """Consecutive clips of one video merged into a long-term segment."""

    segment_id: str
    video_id: str
    clip_ids: tuple[str, ...]
    interval: TimeInterval
    caption: str

    @property
    def duration(self) -> float:
        return self.interval.duration

    def to_json(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "video_id": self.video_id,
            "clip_ids": list(self.clip_ids),
            "interval": self.interval.to_json(),
            "caption": self.caption,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SegmentRecord":
        ids = _list(d, "clip_ids")
        if not all(isinstance(c, str) for c in ids):
            raise FieldError("clip_ids", "expected a list of strings")
        return cls(
            segment_id=_str(d, "segment_id"),
            video_id=_str(d, "video_id"),
            clip_ids=tuple(ids),
            interval=_nested(d, "interval", TimeInterval.from_json),
            caption=_str(d, "caption"),
        )


@dataclass(frozen=True)
class QARecord:
    qa_id: str
    clip_ids: tuple[str, ...]
    split: str
    question_type: str
    question: str
    answer: str
    rationale: Optional[str] = None
    gt_box: Optional[BBox] = None
    gt_interval: Optional[TimeInterval] = None

    def to_json(self) -> dict:
        return {
            "qa_id": self.qa_id,
            "clip_ids": list(self.clip_ids),
            "split": self.split,
            "question_type": self.question_type,
            "question": self.question,
            "answer": self.answer,
            "rationale": self.rationale,
            "gt_box": self.gt_box.to_json() if self.gt_box is not None else None,
            "gt_interval": self.gt_interval.to_json() if self.gt_interval is not None else None,
        }

    @classmethod
    def from_json(cls, d: dict) -> "QARecord":
        ids = _list(d, "clip_ids")
        if not all(isinstance(c, str) for c in ids):
            raise FieldError("clip_ids", "expected a list of strings")
        return cls(
            qa_id=_str(d, "qa_id"),
            clip_ids=tuple(ids),
            split=_str(d, "split"),
            question_type=_str(d, "question_type"),
            question=_str(d, "question"),
            answer=_str(d, "answer"),
            rationale=_str(d, "rationale", required=False),
            gt_box=_nested(d, "gt_box", BBox.from_json, required=False),
            gt_interval=_nested(d, "gt_interval", TimeInterval.from_json, required=False),
        )


@dataclass(frozen=True)
class Prediction:
    """One model response for one query, as read from a predictions file."""

    qa_id: str
    response_text: str

    def to_json(self) -> dict:
        return {"qa_id": self.qa_id, "response_text": self.response_text}

    @classmethod
    def from_json(cls, d: dict) -> "Prediction":
        return cls(_str(d, "qa_id"), _str(d, "response_text"))


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        # truthy when there is something to report
        return bool(self.issues)

    def __contains__(self, text: str) -> bool:
        return any(text in issue for issue in self.issues)


def validate_clip(record: ClipRecord) -> ValidationReport:
    """Return every violated ClipRecord invariant; empty iff well-formed."""
    issues: list[str] = []
    iv = record.interval
    if iv.start_s > iv.end_s:
        issues.append("interval inverted")
    if iv.start_s < 0 or iv.end_s < 0:
        issues.append("negative time")
    if record.ego_score is not None and not 0.0 <= record.ego_score <= 1.0:
        issues.append("ego score outside [0,1]")

    prev_ts = None
    sizes = set()
    for f in record.frames:
        tag = f"frame {f.frame_index}"
        if f.image_w <= 0 or f.image_h <= 0:
            issues.append(f"{tag}: non-positive image size")
        sizes.add((f.image_w, f.image_h))
        if prev_ts is not None and f.timestamp_s <= prev_ts:
            issues.append(f"{tag}: timestamps not strictly increasing")
        prev_ts = f.timestamp_s
        if not iv.start_s <= f.timestamp_s <= iv.end_s:
            issues.append(f"{tag}: frame outside interval")
        for kind, boxes in (("hand", f.hand_boxes), ("object", f.object_boxes)):
            for b in boxes:
                for p in b.problems():
                    issues.append(f"{tag}: {kind} {p}")
    if len(sizes) > 1:
        issues.append("image size varies across frames")
    return ValidationReport(tuple(issues))


def validate_qa_record(record: QARecord) -> ValidationReport:
    issues: list[str] = []
    if record.split not in QUESTION_TYPES:
        issues.append(f"unknown split {record.split!r}")
    elif record.question_type not in QUESTION_TYPES[record.split]:
        issues.append(f"question type {record.question_type!r} not valid for split {record.split!r}")
    if record.split == "fg_spatial":
        if record.gt_box is None:
            issues.append("fg_spatial record without gt_box")
        else:
            issues.extend(record.gt_box.problems())
    if record.split == "fg_temporal":
        if record.gt_interval is None:
            issues.append("fg_temporal record without gt_interval")
        else:
            issues.extend(record.gt_interval.problems())
    if not record.answer.strip():
        issues.append("empty answer")
    return ValidationReport(tuple(issues))
