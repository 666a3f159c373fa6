"""Rule-based verifiable rewards for hand-object and temporal grounding.

Each candidate earns ``r_format`` (1 when the think/answer tag layout
matches) plus the IoU of its answer payload against the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .structured import ParseOutcome, parse_response
from .types import BBox, QARecord, TimeInterval

TASK_FOR_SPLIT = {"fg_spatial": "og", "fg_temporal": "tg"}
PAYLOAD_FOR_TASK = {"og": "box", "tg": "interval"}


class RewardError(ValueError):
    pass


@dataclass(frozen=True)
class RewardBreakdown:
    r_format: int
    r_iou: float
    total: float
    task: str
    qa_id: Optional[str] = None
    note: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "qa_id": self.qa_id,
            "task": self.task,
            "r_format": self.r_format,
            "r_iou": self.r_iou,
            "total": self.total,
            "note": self.note,
        }


def format_reward(outcome: ParseOutcome) -> int:
    """1 when the tags matched, whether or not the payload parsed."""
    return 1 if outcome.format_matched else 0


def box_iou(a: BBox, b: BBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = (a.x_max - a.x_min) * (a.y_max - a.y_min) + (b.x_max - b.x_min) * (b.y_max - b.y_min) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def interval_iou(a: TimeInterval, b: TimeInterval) -> float:
    inter = max(min(a.end_s, b.end_s) - max(a.start_s, b.start_s), 0.0)
    union = (a.end_s - a.start_s) + (b.end_s - b.start_s) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def _task_of(gt: QARecord) -> str:
    try:
        return TASK_FOR_SPLIT[gt.split]
    except KeyError:
        raise RewardError(f"{gt.qa_id}: split {gt.split!r} has no grounding reward") from None


def score_candidate(response_text: str, gt: QARecord) -> RewardBreakdown:
    task = _task_of(gt)
    if task == "og" and gt.gt_box is None:
        raise RewardError(f"{gt.qa_id}: ground truth has no gt_box")
    if task == "tg" and gt.gt_interval is None:
        raise RewardError(f"{gt.qa_id}: ground truth has no gt_interval")

    outcome = parse_response(response_text, PAYLOAD_FOR_TASK[task])
    r_format = format_reward(outcome)
    r_iou = 0.0
    if outcome.ok:
        payload = outcome.answer.payload
        r_iou = box_iou(payload, gt.gt_box) if task == "og" else interval_iou(payload, gt.gt_interval)
    note = None if outcome.ok else outcome.status
    return RewardBreakdown(r_format, r_iou, r_format + r_iou, task, gt.qa_id, note)


def score_group(responses: Sequence[str], gt: QARecord) -> list[RewardBreakdown]:
    """Score every candidate of one group; a candidate that cannot be scored gets zero."""
    if len(responses) < 1:
        raise RewardError("empty group")
    out = []
    for text in responses:
        try:
            out.append(score_candidate(text, gt))
        except RewardError as e:
            task = TASK_FOR_SPLIT.get(gt.split, "og")
            out.append(RewardBreakdown(0, 0.0, 0.0, task, gt.qa_id, f"error: {e}"))
    return out
