import math

import numpy as np
import pytest

from conftest import random_clip
from egokit.curation import (
    RULE_ORDER,
    ClipError,
    FilterConfig,
    decide,
    displacement_threshold,
    ego_gate,
    hand_centers_px,
    max_hand_displacement,
    object_coverage_rule,
    order_for_segmentation,
    run_pipeline,
    segment_long_term,
    summarize,
)
from egokit.types import BBox, ClipRecord, FrameDetections, TimeInterval

CFG = FilterConfig()


def hand_at(cx, cy, half=0.02):
    return BBox(cx - half, cy - half, cx + half, cy + half)


def make_clip(hand_xs, n_objects=1, ego=0.9, duration=4.0, w=1000, h=500, extra_hands=0, cid="c"):
    frames = []
    n = len(hand_xs)
    for k, x in enumerate(hand_xs):
        hands = () if x is None else (hand_at(x, 0.5),) + tuple(hand_at(0.5, 0.5) for _ in range(extra_hands if k == 0 else 0))
        objs = tuple(BBox(0.1, 0.1, 0.2, 0.2) for _ in range(n_objects))
        frames.append(FrameDetections(k, duration * (k + 0.5) / n, hands, objs, w, h))
    return ClipRecord(cid, "v", TimeInterval(0.0, duration), tuple(frames), ego)


def test_kept_clip():
    d = decide(make_clip([0.2, 0.5, 0.3]), CFG)
    assert d.kept and d.failed_rule == "none"
    # centers at x = 200 px and 500 px, threshold 0.1 * 500 = 50 px
    assert d.metrics["displacement"] == pytest.approx(300.0)


@pytest.mark.parametrize(
    "clip, rule",
    [
        (make_clip([0.2, 0.5], ego=0.49), "ego_score"),
        (make_clip([0.2, 0.5], duration=1.99), "duration"),
        (make_clip([0.2, 0.5], extra_hands=2), "hand_count"),
        (make_clip([0.2, 0.5], n_objects=0), "object_coverage"),
        (make_clip([0.5, 0.52]), "displacement"),
        (make_clip([None, None]), "displacement"),
    ],
)
def test_each_rule_rejects(clip, rule):
    assert decide(clip, CFG).failed_rule == rule


def test_boundaries():
    assert decide(make_clip([0.2, 0.5], ego=0.5), CFG).kept
    assert decide(make_clip([0.2, 0.5], duration=2.0), CFG).kept
    assert decide(make_clip([0.2, 0.5], extra_hands=1), CFG).kept  # exactly two hands
    # 7 object boxes over 10 frames meets alpha * N exactly
    clip = make_clip([0.2] * 9 + [0.5], n_objects=0)
    frames = tuple(
        FrameDetections(f.frame_index, f.timestamp_s, f.hand_boxes, (BBox(0, 0, 0.1, 0.1),) if k < 7 else (), 1000, 500)
        for k, f in enumerate(clip.frames)
    )
    assert decide(ClipRecord("c", "v", clip.interval, frames, 0.9), CFG).kept
    frames = frames[:6] + tuple(FrameDetections(f.frame_index, f.timestamp_s, f.hand_boxes, (), 1000, 500) for f in frames[6:])
    assert decide(ClipRecord("c", "v", clip.interval, frames, 0.9), CFG).failed_rule == "object_coverage"


def test_displacement_must_exceed_threshold_strictly():
    # 320 x 320 image: threshold 32 px; centers 0.25 and 0.35 are 32 px apart (up to rounding)
    base = make_clip([0.25, 0.35], w=320, h=320)
    d = max_hand_displacement(base)
    assert d == pytest.approx(32.0)
    cfg_at = FilterConfig(disp_fraction=d / 320)
    assert decide(base, cfg_at).failed_rule == "displacement"
    cfg_below = FilterConfig(disp_fraction=math.nextafter(d, 0) / 320)
    assert decide(base, cfg_below).kept


def test_first_failure_wins():
    clip = make_clip([0.5, 0.5], ego=0.1, duration=1.0, n_objects=0, extra_hands=3)
    assert decide(clip, CFG).failed_rule == "ego_score"
    clip = make_clip([0.5, 0.5], duration=1.0, n_objects=0, extra_hands=3)
    assert decide(clip, CFG).failed_rule == "duration"


def test_missing_ego_and_empty_clip():
    with pytest.raises(ClipError):
        ego_gate(make_clip([0.2], ego=None), CFG)
    d = decide(make_clip([0.2, 0.5], ego=None), CFG)
    assert d.failed_rule == "ego_score" and d.metrics["error"] == "ego score absent"
    empty = ClipRecord("e", "v", TimeInterval(0, 5), (), 0.9)
    with pytest.raises(ClipError):
        object_coverage_rule(empty, CFG)
    d = decide(empty, CFG)
    assert d.failed_rule == "object_coverage" and d.metrics["error"] == "empty clip"


def test_invalid_clips_are_charged_not_raised():
    clip = make_clip([0.2, 0.5])
    broken = ClipRecord("b", "v", TimeInterval(5, 1), clip.frames, 0.9)
    d = decide(broken, CFG)
    assert d.failed_rule == "duration" and "interval inverted" in d.metrics["error"]
    d = decide(ClipRecord("b", "v", clip.interval, clip.frames, 1.7), CFG)
    assert d.failed_rule == "ego_score"


def test_hand_centers_average_hands_and_honor_stride():
    f0 = FrameDetections(0, 0.5, (hand_at(0.2, 0.5), hand_at(0.4, 0.5)), (), 100, 100)
    f1 = FrameDetections(1, 1.5, (), (), 100, 100)
    f2 = FrameDetections(2, 2.5, (hand_at(0.9, 0.1),), (), 100, 100)
    clip = ClipRecord("c", "v", TimeInterval(0, 3), (f0, f1, f2), 1.0)
    np.testing.assert_allclose(hand_centers_px(clip), [[30, 50], [90, 10]])
    np.testing.assert_allclose(hand_centers_px(clip, stride=2), [[30, 50], [90, 10]])
    np.testing.assert_allclose(hand_centers_px(clip, stride=3), [[30, 50]])
    assert max_hand_displacement(clip, stride=3) == 0.0
    assert displacement_threshold(clip, CFG) == 10.0


def test_config_validation():
    with pytest.raises(ValueError, match="alpha"):
        FilterConfig(alpha=0)
    with pytest.raises(ValueError, match="frame_stride"):
        FilterConfig(frame_stride=0)


def test_pipeline_is_order_preserving_and_permutation_invariant():
    rng = np.random.default_rng(5)
    clips = [random_clip(rng, f"c{i}", max_frames=20) for i in range(300)]
    base = {d.clip_id: d.failed_rule for d in run_pipeline(clips)}
    perm = [clips[i] for i in rng.permutation(len(clips))]
    threaded = list(run_pipeline(perm, CFG, workers=4))
    assert [d.clip_id for d in threaded] == [c.clip_id for c in perm]
    assert {d.clip_id: d.failed_rule for d in threaded} == base
    counts = summarize(run_pipeline(clips))
    assert sum(counts.values()) == 300 and set(counts) == {"none", *RULE_ORDER}


def test_stricter_config_keeps_a_subset():
    rng = np.random.default_rng(6)
    clips = [random_clip(rng, f"c{i}", max_frames=20) for i in range(300)]
    loose = {d.clip_id for d in run_pipeline(clips) if d.kept}
    for strict in (FilterConfig(ego_threshold=0.7), FilterConfig(alpha=0.9), FilterConfig(disp_fraction=0.2),
                   FilterConfig(min_duration_s=3.0), FilterConfig(max_hands=1)):
        kept = {d.clip_id for d in run_pipeline(clips, strict) if d.kept}
        assert kept <= loose


# ---- segmentation ----------------------------------------------------------------


def clips_of(durations, gap=0.0, video="v", start=0.0):
    out, t = [], start
    for i, d in enumerate(durations):
        out.append(ClipRecord(f"{video}c{i}", video, TimeInterval(t, t + d), caption=f"s{i}."))
        t += d + gap
    return out


def test_four_ten_second_clips_make_one_segment():
    (seg,) = segment_long_term(clips_of([10] * 4))
    assert seg.duration == 40.0
    assert seg.clip_ids == ("vc0", "vc1", "vc2", "vc3")
    assert seg.caption == "s0. s1. s2. s3."
    assert seg.segment_id == "v#seg000"


def test_single_short_clip_is_dropped():
    assert list(segment_long_term(clips_of([10]))) == []


def test_long_stream_splits_at_max_length():
    segs = list(segment_long_term(clips_of([10] * 13)))
    assert [s.duration for s in segs] == [120.0]
    assert len(segs[0].clip_ids) == 12  # the last 10 s clip alone is too short


def test_gap_and_video_change_break_segments():
    stream = clips_of([10, 10], gap=6.0) + clips_of([10, 10], video="w", start=100)
    segs = list(segment_long_term(stream))
    assert [(s.video_id, s.duration) for s in segs] == [("w", 20.0)]
    segs = list(segment_long_term(clips_of([10, 10], gap=6.0), max_gap_s=6.0))
    assert segs[0].duration == 26.0


def test_caption_falls_back_to_narration():
    a = ClipRecord("a", "v", TimeInterval(0, 10), narration="n1")
    b = ClipRecord("b", "v", TimeInterval(10, 20), caption="c2")
    (seg,) = segment_long_term([a, b], delimiter=" | ")
    assert seg.caption == "n1 | c2"


def test_order_for_segmentation():
    a, b = clips_of([10, 10])
    w = clips_of([10], video="w")[0]
    assert order_for_segmentation([b, w, a]) == [a, b, w]
