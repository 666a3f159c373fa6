"""The end-to-end fixture pipeline, run through the real command line.

Shared by the acceptance test and ``regen_golden.py``.
"""

import os
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURE = os.path.join(HERE, "data", "fixture")
GOLDEN = os.path.join(HERE, "data", "golden")

# every file the pipeline writes, all compared byte for byte
OUTPUTS = (
    "kept.jsonl",
    "decisions.jsonl",
    "segments.jsonl",
    "qa_long.jsonl",
    "rewards_og.jsonl",
    "rewards_tg.jsonl",
    "eval_spatial.json",
    "eval_temporal.json",
    "eval_mc.json",
)


def steps(out):
    fx = lambda name: os.path.join(FIXTURE, name)  # noqa: E731
    o = lambda name: os.path.join(out, name)  # noqa: E731
    return [
        ["curate", "filter", "--detections", fx("clips.jsonl"), "--out", o("kept.jsonl"),
         "--decisions", o("decisions.jsonl")],
        ["curate", "segment", "--clips", o("kept.jsonl"), "--out", o("segments.jsonl")],
        ["qa", "build", "--split", "long", "--clips", o("segments.jsonl"),
         "--adapter", "mock:" + fx("mock_responses.json"), "--out", o("qa_long.jsonl"), "--seed", "0"],
        ["reward", "score", "--task", "og", "--pred", fx("pred_og.jsonl"), "--gt", fx("fg_gt.jsonl"),
         "--out", o("rewards_og.jsonl")],
        ["reward", "score", "--task", "tg", "--pred", fx("pred_tg.jsonl"), "--gt", fx("fg_gt.jsonl"),
         "--out", o("rewards_tg.jsonl")],
        ["eval", "grounding", "--kind", "spatial", "--pred", fx("pred_og.jsonl"), "--gt", fx("fg_gt.jsonl"),
         "--report", o("eval_spatial.json")],
        ["eval", "grounding", "--kind", "temporal", "--pred", fx("pred_tg.jsonl"), "--gt", fx("fg_gt.jsonl"),
         "--tau", "0.05,0.3,0.5,0.7", "--report", o("eval_temporal.json")],
        ["eval", "grounding", "--kind", "mc", "--pred", fx("mc_pred.jsonl"), "--gt", fx("mc_gt.jsonl"),
         "--report", o("eval_mc.json")],
    ]


def run_smoke(out):
    """Run every step as a subprocess; return the list of (argv, returncode, stderr)."""
    os.makedirs(out, exist_ok=True)
    results = []
    for argv in steps(out):
        proc = subprocess.run([sys.executable, "-m", "egokit", *argv], capture_output=True, text=True)
        results.append((argv, proc.returncode, proc.stderr))
        if proc.returncode != 0:
            break
    return results
