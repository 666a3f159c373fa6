"""Deterministic synthetic corpus used as the end-to-end smoke fixture.

``python -m egokit.fixture OUT_DIR`` writes:

    clips.jsonl           50 clips (5 videos x 10) with detections and captions
    fg_gt.jsonl           grounding ground truth (fg_spatial + fg_temporal)
    pred_og.jsonl         model responses for the fg_spatial items
    pred_tg.jsonl         model responses for the fg_temporal items
    mc_gt.jsonl           multiple-choice ground truth
    mc_pred.jsonl         multiple-choice responses
    mock_responses.json   canned annotator replies for ``qa build --split long``
"""

from __future__ import annotations

import json
import os
import sys

import numpy as np

from .curation import FilterConfig, order_for_segmentation, run_pipeline, segment_long_term
from .jsonl import write_jsonl
from .qa.adapters import prompt_key
from .qa.builder import build_prompt
from .qa.templates import templates_for
from .structured import (
    hand_object_grounding_prompt,
    render_box,
    render_interval,
    render_response,
    temporal_grounding_prompt,
)
from .types import BBox, ClipRecord, FrameDetections, Prediction, QARecord, TimeInterval

N_VIDEOS = 5
CLIPS_PER_VIDEO = 10
PROFILES = ("dynamic",) * 8 + ("crowd", "static", "sparse", "handless")
VERBS = ("picks up", "cuts", "rinses", "stirs", "places", "opens", "wipes", "folds")
OBJECTS = ("knife", "cutting board", "bowl", "sponge", "jar", "towel", "pan", "lid")
HANDS = ("left", "right")


def _r(x: float, nd: int = 4) -> float:
    return round(float(x), nd)


def _box_around(rng, cx, cy, w, h) -> BBox:
    x0, x1 = np.clip([cx - w / 2, cx + w / 2], 0.0, 1.0)
    y0, y1 = np.clip([cy - h / 2, cy + h / 2], 0.0, 1.0)
    return BBox(_r(x0), _r(y0), _r(x1), _r(y1))


def _frames(rng, start, end, profile, image_w, image_h) -> tuple[FrameDetections, ...]:
    frames = []
    ts = start + 0.5
    k = 0
    hx, hy = rng.uniform(0.3, 0.7, size=2)
    drift = rng.uniform(-0.12, 0.12, size=2) if profile != "static" else np.zeros(2)
    crowd_frame = None
    n_est = int(end - start)
    if profile == "crowd":
        crowd_frame = int(rng.integers(0, max(n_est, 1)))
    while ts <= end:
        if profile == "handless":
            n_hands = 0
        elif profile == "crowd" and k == crowd_frame:
            n_hands = 3
        else:
            n_hands = int(rng.choice([1, 2], p=[0.6, 0.4]))
        hands = []
        for j in range(n_hands):
            off = 0.08 * j
            cx = float(np.clip(hx + drift[0] * k + off, 0.05, 0.95))
            cy = float(np.clip(hy + drift[1] * k, 0.05, 0.95))
            hands.append(_box_around(rng, cx, cy, 0.1, 0.12))
        if profile == "sparse":
            n_obj = int(rng.random() < 0.3)
        else:
            n_obj = int(rng.choice([0, 1, 2], p=[0.05, 0.65, 0.3]))
        objects = [
            _box_around(rng, *rng.uniform(0.2, 0.8, size=2), *rng.uniform(0.05, 0.3, size=2))
            for _ in range(n_obj)
        ]
        frames.append(FrameDetections(k, _r(ts, 3), tuple(hands), tuple(objects), image_w, image_h))
        ts += 1.0
        k += 1
    return tuple(frames)


def make_clips(seed: int = 0) -> list[ClipRecord]:
    rng = np.random.default_rng(seed)
    clips = []
    for v in range(N_VIDEOS):
        vid = f"vid{v:02d}"
        image_w, image_h = (640, 480) if v % 2 == 0 else (1280, 720)
        t = _r(rng.uniform(0, 5), 2)
        for c in range(CLIPS_PER_VIDEO):
            dur = _r(rng.uniform(1.2, 9.0), 2)
            start, end = t, _r(t + dur, 2)
            profile = PROFILES[int(rng.integers(len(PROFILES)))]
            verb, obj = VERBS[int(rng.integers(len(VERBS)))], OBJECTS[int(rng.integers(len(OBJECTS)))]
            hand = HANDS[int(rng.integers(2))]
            caption = f"The person {verb} the {obj} with the {hand} hand."
            narration = f"#C C {verb} the {obj}"
            if rng.random() < 0.15:
                caption = None
            ego = None if (v == 2 and c == 3) else _r(rng.uniform(0.4, 1.0), 3)
            clips.append(
                ClipRecord(
                    clip_id=f"{vid}_c{c:02d}",
                    video_id=vid,
                    interval=TimeInterval(start, end),
                    frames=_frames(rng, start, end, profile, image_w, image_h),
                    ego_score=ego,
                    caption=caption,
                    narration=narration,
                )
            )
            t = _r(end + rng.uniform(0.0, 1.5), 2)
    return clips


def _jitter_box(rng, b: BBox, scale: float) -> BBox:
    v = np.clip(np.array([b.x_min, b.y_min, b.x_max, b.y_max]) + rng.normal(0, scale, 4), 0, 1)
    x0, x1 = sorted(v[[0, 2]])
    y0, y1 = sorted(v[[1, 3]])
    return BBox(_r(x0, 3), _r(y0, 3), _r(x1, 3), _r(y1, 3))


def make_grounding(clips: list[ClipRecord], seed: int = 1):
    rng = np.random.default_rng(seed)
    gts, pred_og, pred_tg = [], [], []
    for i in range(15):
        clip = clips[(3 * i) % len(clips)]
        obj = f"{HANDS[i % 2]} hand" if i % 3 == 0 else OBJECTS[i % len(OBJECTS)]
        gt = _jitter_box(rng, BBox(0.3, 0.3, 0.6, 0.65), 0.08)
        qa_id = f"fgs-{i:03d}"
        gts.append(QARecord(qa_id, (clip.clip_id,), "fg_spatial", "hand_object_grounding",
                            hand_object_grounding_prompt(obj), render_box(gt), gt_box=gt))
        mode = i % 6
        if mode == 5:
            continue  # no prediction: counted as missing by eval
        if mode == 0:
            text = render_response(f"The {obj} is in the center.", render_box(gt))
        elif mode in (1, 2):
            text = render_response(f"Looking for the {obj}.", render_box(_jitter_box(rng, gt, 0.05)))
        elif mode == 3:
            text = render_response("Not sure.", "(0.9,0.9),(0.1,0.1)")
        else:
            text = f"<answer>{render_box(gt)}</answer>"
        pred_og.append(Prediction(qa_id, text))

    for i in range(15):
        clip = clips[(3 * i + 1) % len(clips)]
        length = _r(rng.uniform(2, 12), 2)
        start = _r(rng.uniform(0, 40), 2)
        gt = TimeInterval(start, _r(start + length, 2))
        qa_id = f"fgt-{i:03d}"
        event = f"the person {VERBS[i % len(VERBS)]} the {OBJECTS[(i + 3) % len(OBJECTS)]}"
        gts.append(QARecord(qa_id, (clip.clip_id,), "fg_temporal", "fine_grained_temporal_grounding",
                            temporal_grounding_prompt(event), render_interval(gt), gt_interval=gt))
        mode = i % 5
        if mode == 4 and i > 10:
            continue
        if mode == 0:
            text = render_response("It happens here.", render_interval(gt))
        elif mode in (1, 2):
            s = max(0.0, gt.start_s + rng.normal(0, 2.0))
            e = max(s + 0.5, gt.end_s + rng.normal(0, 2.0))
            text = render_response("Around this time.", render_interval(TimeInterval(_r(s, 2), _r(e, 2))))
        elif mode == 3:
            text = render_response("Backwards.", f"({gt.end_s:.2f},{gt.start_s:.2f})")
        else:
            text = "<think>far off</think>\n<answer>(55.00,59.50)</answer>"
        pred_tg.append(Prediction(qa_id, text))
    return gts, pred_og, pred_tg


def make_mc(clips: list[ClipRecord]):
    gts, preds = [], []
    letters = "ABCD"
    given = ["B", "b", " C ", "A)", "D", "<think>hmm</think><answer>A</answer>", "C", "B.", "A", "D", "x"]
    for i in range(12):
        clip = clips[(4 * i + 2) % len(clips)]
        ans = letters[(i * 7) % 4]
        qa_id = f"mc-{i:03d}"
        q = f"What does the person do next? A) cut B) rinse C) stir D) wipe [{i}]"
        gts.append(QARecord(qa_id, (clip.clip_id,), "short", "action_reasoning", q, ans))
        if i < len(given):
            preds.append(Prediction(qa_id, given[i]))
    return gts, preds


def make_mock_responses(clips: list[ClipRecord]) -> dict[str, str]:
    kept = [c for c, d in zip(clips, run_pipeline(clips, FilterConfig())) if d.kept]
    segments = list(segment_long_term(order_for_segmentation(kept)))
    responses = {}
    for s_i, seg in enumerate(segments):
        for t_i, t in enumerate(templates_for("long")):
            req = build_prompt(t, seg)
            name = t.question_type.replace("_", " ")
            if (s_i + t_i) % 7 == 3:
                reply = {"question": f"Describe the {name}.", "answer": f"describe the {name}"}
            elif (s_i + t_i) % 11 == 5:
                reply = "not json at all"
            else:
                first = seg.caption.split(".")[0]
                reply = {
                    "question": f"What is the {name} across {seg.segment_id}?",
                    "answer": f"Over {seg.duration:.2f}s: {first.lower()}.",
                }
            responses[prompt_key(req.user_prompt)] = (
                reply if isinstance(reply, str) else json.dumps(reply, sort_keys=True)
            )
    return responses


def write_fixture(out_dir: str, seed: int = 0) -> None:
    os.makedirs(out_dir, exist_ok=True)
    clips = make_clips(seed)
    gts, pred_og, pred_tg = make_grounding(clips, seed + 1)
    mc_gts, mc_preds = make_mc(clips)
    p = lambda name: os.path.join(out_dir, name)  # noqa: E731
    write_jsonl(p("clips.jsonl"), clips)
    write_jsonl(p("fg_gt.jsonl"), gts)
    write_jsonl(p("pred_og.jsonl"), pred_og)
    write_jsonl(p("pred_tg.jsonl"), pred_tg)
    write_jsonl(p("mc_gt.jsonl"), mc_gts)
    write_jsonl(p("mc_pred.jsonl"), mc_preds)
    with open(p("mock_responses.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(make_mock_responses(clips), f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit("usage: python -m egokit.fixture OUT_DIR")
    write_fixture(sys.argv[1])
