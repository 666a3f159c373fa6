"""Grounding and multiple-choice evaluation: mIoU, Loc-Acc, R1@tau, accuracy."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .rewards import box_iou, interval_iou
from .structured import match_tags, parse_box, parse_interval
from .types import BBox, Prediction, QARecord, TimeInterval

DEFAULT_TAUS = (0.05,)
KINDS = ("spatial", "temporal", "mc")


class EvalError(ValueError):
    pass


def loc_acc(pred: BBox, gt: BBox) -> bool:
    """True when the center of ``pred`` lies in the closed ``gt`` box."""
    cx, cy = (pred.x_min + pred.x_max) / 2, (pred.y_min + pred.y_max) / 2
    return gt.x_min <= cx <= gt.x_max and gt.y_min <= cy <= gt.y_max


def r1_at(preds: Sequence[TimeInterval], gts: Sequence[TimeInterval], tau: float) -> float:
    if len(preds) != len(gts):
        raise EvalError(f"{len(preds)} predictions for {len(gts)} queries")
    if not preds:
        return 0.0
    ious = kernels.interval_iou_pairs(
        [(p.start_s, p.end_s) for p in preds], [(g.start_s, g.end_s) for g in gts]
    )
    return float(np.mean(ious >= tau))


def _mean(values: Iterable[float]) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


@dataclass
class EvalReport:
    kind: str
    n: int
    miou: Optional[float] = None
    loc_acc: Optional[float] = None
    r1_at: dict = field(default_factory=dict)
    mc_accuracy: Optional[float] = None
    per_item: list = field(default_factory=list)
    missing: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "miou": self.miou,
            "loc_acc": self.loc_acc,
            "r1_at": self.r1_at,
            "mc_accuracy": self.mc_accuracy,
            "missing": self.missing,
            "per_item": self.per_item,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


def _answer_text(response: str) -> str:
    tags = match_tags(response)
    return tags[1] if tags is not None else response


def normalize_option(text: str) -> str:
    """Option letter comparison key: strip whitespace, a trailing ')' or '.', and case."""
    t = text.strip().upper()
    if len(t) == 2 and t[1] in ").":
        t = t[0]
    return t


def _kind_of(g: QARecord) -> str:
    return {"fg_spatial": "spatial", "fg_temporal": "temporal"}.get(g.split, "mc")


def _tau_key(tau: float) -> str:
    return repr(float(tau))


def evaluate(
    preds: Sequence[Prediction],
    gts: Sequence[QARecord],
    kind: str,
    taus: Sequence[float] = DEFAULT_TAUS,
) -> EvalReport:
    """Join predictions to ground truth on qa_id and score every gt item.

    Only ground-truth items of the requested kind are scored (fg_spatial for
    spatial, fg_temporal for temporal, every other split for mc); predictions
    for items of another kind are ignored. Ground-truth items without a
    prediction score zero and are listed in ``missing``. A prediction whose
    answer cannot be parsed also scores zero.
    """
    if kind not in KINDS:
        raise EvalError(f"unknown kind {kind!r}")
    if kind == "temporal" and not taus:
        raise EvalError("temporal evaluation needs at least one tau")
    known: set[str] = set()
    gt_by_id: dict[str, QARecord] = {}
    for g in gts:
        if g.qa_id in known:
            raise EvalError(f"duplicate qa_id {g.qa_id!r} in ground truth")
        known.add(g.qa_id)
        if _kind_of(g) == kind:
            gt_by_id[g.qa_id] = g
    pred_by_id: dict[str, str] = {}
    for p in preds:
        if p.qa_id not in known:
            raise EvalError(f"prediction for unknown qa_id {p.qa_id!r}")
        if p.qa_id not in gt_by_id:
            continue
        if p.qa_id in pred_by_id:
            raise EvalError(f"duplicate prediction for qa_id {p.qa_id!r}")
        pred_by_id[p.qa_id] = p.response_text

    items, missing = [], []
    for qa_id, g in gt_by_id.items():
        text = pred_by_id.get(qa_id)
        if text is None:
            missing.append(qa_id)
        items.append(_score_item(qa_id, g, text, kind, taus))

    report = EvalReport(kind=kind, n=len(items), per_item=items, missing=missing)
    if kind == "spatial":
        report.miou = _mean(i["iou"] for i in items)
        report.loc_acc = _mean(float(i["correct"]) for i in items)
    elif kind == "temporal":
        report.miou = _mean(i["iou"] for i in items)
        report.r1_at = {_tau_key(t): _mean(float(i["iou"] >= t) for i in items) for t in taus}
    else:
        report.mc_accuracy = _mean(float(i["correct"]) for i in items)
    return report


def _score_item(qa_id: str, g: QARecord, text: Optional[str], kind: str, taus) -> dict:
    if kind == "spatial":
        if g.gt_box is None:
            raise EvalError(f"{qa_id}: ground truth has no gt_box")
        pred = parse_box(_answer_text(text)) if text is not None else None
        if pred is None:
            return {"qa_id": qa_id, "iou": 0.0, "correct": False}
        return {"qa_id": qa_id, "iou": box_iou(pred, g.gt_box), "correct": loc_acc(pred, g.gt_box)}
    if kind == "temporal":
        if g.gt_interval is None:
            raise EvalError(f"{qa_id}: ground truth has no gt_interval")
        pred = parse_interval(_answer_text(text)) if text is not None else None
        iou = interval_iou(pred, g.gt_interval) if pred is not None else 0.0
        return {"qa_id": qa_id, "iou": iou, "correct": iou >= taus[0]}
    correct = text is not None and normalize_option(_answer_text(text)) == normalize_option(g.answer)
    return {"qa_id": qa_id, "iou": None, "correct": correct}
