import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from egokit.types import BBox, ClipRecord, FrameDetections, TimeInterval  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")
FIXTURE = os.path.join(DATA, "fixture")
GOLDEN = os.path.join(DATA, "golden")


def random_box(rng, min_side=0.0):
    while True:
        x = np.sort(rng.random(2))
        y = np.sort(rng.random(2))
        if x[1] - x[0] >= min_side and y[1] - y[0] >= min_side:
            return BBox(float(x[0]), float(y[0]), float(x[1]), float(y[1]))


def random_interval(rng, hi=120.0):
    s, e = np.sort(rng.uniform(0, hi, 2))
    return TimeInterval(float(s), float(e))


def random_clip(rng, clip_id="c", max_frames=50):
    """A well-formed clip that lands near the rule boundaries often enough to matter."""
    image_w, image_h = [(640, 480), (1280, 720), (320, 320)][int(rng.integers(3))]
    n = int(rng.integers(0, max_frames + 1))
    start = float(np.round(rng.uniform(0, 100), 2))
    duration = float(rng.choice([1.0, 2.0, 2.0000001, 1.9999999, rng.uniform(0.5, 10)]))
    end = start + max(duration, 0.001 * n)
    ts = np.linspace(start, end, n + 2)[1:-1] if n else []
    hand_mode = rng.integers(4)
    drift = rng.choice([0.0, 0.001, 0.02, 0.1]) * rng.standard_normal(2)
    base = rng.uniform(0.2, 0.8, 2)
    object_p = rng.uniform(0.3, 1.0)
    frames = []
    for k, t in enumerate(ts):
        if hand_mode == 0:
            n_hands = 0
        elif hand_mode == 1:
            n_hands = int(rng.choice([0, 1, 2, 3], p=[0.2, 0.4, 0.38, 0.02]))
        else:
            n_hands = int(rng.choice([0, 1, 2], p=[0.3, 0.4, 0.3]))
        hands = []
        for j in range(n_hands):
            cx, cy = np.clip(base + drift * k + 0.05 * j + 0.01 * rng.standard_normal(2), 0.05, 0.95)
            hands.append(BBox(cx - 0.04, cy - 0.05, cx + 0.04, cy + 0.05))
        objects = tuple(random_box(rng) for _ in range(int(rng.random() < object_p) + int(rng.random() < 0.1)))
        frames.append(FrameDetections(k, float(t), tuple(hands), objects, image_w, image_h))
    ego = float(rng.choice([0.5, 0.4999, rng.random(), rng.random(), rng.random()]))
    if rng.random() < 0.03:
        ego = None
    return ClipRecord(clip_id, "v", TimeInterval(start, end), tuple(frames), ego)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---- acceptance summary ----------------------------------------------------------

_acceptance: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): one of the numbered acceptance criteria")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        prev = _acceptance.get(label, True)
        _acceptance[label] = prev and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_acceptance, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(f"{'PASS' if _acceptance[label] else 'FAIL'}  {label}")
