import json
import os
import subprocess
import sys

import pytest

from conftest import FIXTURE
from egokit import __version__
from egokit.cli import dispatch
from egokit.fixture import write_fixture

SUBCOMMANDS = [
    ["curate", "filter"],
    ["curate", "segment"],
    ["qa", "build"],
    ["reward", "score"],
    ["grpo", "train-toy"],
    ["eval", "grounding"],
]


def test_top_level_help_and_version(capsys):
    assert dispatch(["--help"]) == 0
    assert "curate" in capsys.readouterr().out
    assert dispatch(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_subcommand_help(sub, capsys):
    assert dispatch([*sub, "--help"]) == 0
    assert "usage:" in capsys.readouterr().out


def test_usage_errors_exit_1(capsys):
    assert dispatch(["frobnicate"]) == 1
    assert dispatch(["curate", "filter"]) == 1  # required flags missing
    assert dispatch(["eval", "grounding", "--kind", "x", "--pred", "a", "--gt", "b", "--report", "c"]) == 1
    assert dispatch(["eval", "grounding", "--kind", "temporal", "--pred", "a", "--gt", "b",
                     "--report", "c", "--tau", "x,y"]) == 1


def test_bad_values_exit_1(tmp_path):
    out = str(tmp_path / "o.jsonl")
    assert dispatch(["curate", "filter", "--detections", os.path.join(FIXTURE, "clips.jsonl"),
                     "--out", out, "--alpha", "0"]) == 1
    assert dispatch(["grpo", "train-toy", "--task", "box", "--group-size", "1", "--report", out]) == 1


def test_data_errors_exit_2(tmp_path, capsys):
    out = str(tmp_path / "o.jsonl")
    assert dispatch(["curate", "filter", "--detections", str(tmp_path / "missing.jsonl"), "--out", out]) == 2
    assert "not found" in capsys.readouterr().err
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"clip_id": "c"}\n')
    assert dispatch(["curate", "segment", "--clips", str(bad), "--out", out]) == 2
    assert "bad.jsonl:1: field 'frames' missing required field" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "egokit", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout


def test_filter_writes_kept_clips_and_decisions(tmp_path, capsys):
    out, dec = tmp_path / "kept.jsonl", tmp_path / "dec.jsonl"
    code = dispatch(["curate", "filter", "--detections", os.path.join(FIXTURE, "clips.jsonl"),
                     "--out", str(out), "--decisions", str(dec), "--workers", "3"])
    assert code == 0
    decisions = [json.loads(line) for line in dec.read_text().splitlines()]
    kept = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(decisions) == 50
    assert [d["clip_id"] for d in decisions if d["kept"]] == [k["clip_id"] for k in kept]
    assert f"kept {len(kept)} / total 50" in capsys.readouterr().err


def test_grpo_train_toy(tmp_path):
    report = tmp_path / "r.jsonl"
    assert dispatch(["grpo", "train-toy", "--task", "interval", "--iters", "20", "--seed", "2",
                     "--report", str(report)]) == 0
    rows = [json.loads(line) for line in report.read_text().splitlines()]
    assert [r["iteration"] for r in rows] == list(range(1, 21))


def test_fixture_is_reproducible(tmp_path):
    write_fixture(str(tmp_path))
    for name in sorted(os.listdir(FIXTURE)):
        with open(os.path.join(FIXTURE, name), "rb") as a, open(tmp_path / name, "rb") as b:
            assert a.read() == b.read(), name
