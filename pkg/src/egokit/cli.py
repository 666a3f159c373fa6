"""``egokit`` command line: curate, qa, reward, grpo and eval subcommands.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or invalid
input). Data goes to the files named on the command line; progress and
summaries go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from . import __version__
from .curation import FilterConfig, order_for_segmentation, run_pipeline, segment_long_term
from .grpo import GrpoConfig, train_toy
from .jsonl import JsonlError, iter_jsonl, read_jsonl, write_jsonl
from .metrics import EvalError, evaluate
from .qa import SplitStats, make_adapter, run_split
from .rewards import TASK_FOR_SPLIT, RewardError, score_candidate
from .types import ClipRecord, FieldError, Prediction, QARecord, SegmentRecord

log = logging.getLogger("egokit")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _input(path: str) -> str:
    if not os.path.isfile(path):
        raise DataError(f"input file not found: {path}")
    return path


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_curate_filter(args) -> int:
    try:
        cfg = FilterConfig(
            ego_threshold=args.ego_threshold,
            max_hands=args.max_hands,
            alpha=args.alpha,
            disp_fraction=args.disp_frac,
            min_duration_s=args.min_dur,
            frame_stride=args.stride,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None
    clips = read_jsonl(_input(args.detections), ClipRecord)
    decisions = list(run_pipeline(clips, cfg, workers=args.workers))
    kept = [c for c, d in zip(clips, decisions) if d.kept]
    write_jsonl(args.out, kept)
    if args.decisions:
        write_jsonl(args.decisions, decisions)
    print(f"kept {len(kept)} / total {len(clips)}", file=sys.stderr)
    return EXIT_OK


def cmd_curate_segment(args) -> int:
    clips = order_for_segmentation(read_jsonl(_input(args.clips), ClipRecord))
    try:
        segs = list(segment_long_term(clips, args.min_len, args.max_len, args.max_gap, args.delimiter))
    except ValueError as e:
        raise UsageError(str(e)) from None
    write_jsonl(args.out, segs)
    print(f"segments {len(segs)} from clips {len(clips)}", file=sys.stderr)
    return EXIT_OK


def _read_sources(path: str):
    out = []
    for lineno, obj in enumerate(iter_jsonl(path), start=1):
        kind = SegmentRecord if isinstance(obj, dict) and "segment_id" in obj else ClipRecord
        try:
            out.append(kind.from_json(obj))
        except FieldError as e:
            raise JsonlError(lineno, e.field, e.reason, path) from None
    return out


def cmd_qa_build(args) -> int:
    split = args.split.replace("-", "_")
    try:
        adapter = make_adapter(args.adapter)
    except ValueError as e:
        raise UsageError(str(e)) from None
    except OSError as e:
        raise DataError(f"cannot load adapter: {e}") from None
    records = _read_sources(_input(args.clips))
    stats = SplitStats()
    out = list(
        run_split(
            records,
            split,
            adapter,
            sampling_ratio=args.sampling_ratio,
            seed=args.seed,
            concurrency=args.concurrency,
            min_rationale_chars=args.min_rationale,
            caption_source=args.caption_source,
            stats=stats,
        )
    )
    write_jsonl(args.out, out)
    print(
        f"accepted {stats.accepted} / requests {stats.requests} "
        f"(rejected {stats.rejected}, skipped {stats.skipped}, failed {stats.failed})",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_reward_score(args) -> int:
    gts = {g.qa_id: g for g in read_jsonl(_input(args.gt), QARecord)}
    preds = read_jsonl(_input(args.pred), Prediction)
    out = []
    for p in preds:
        g = gts.get(p.qa_id)
        if g is None:
            raise DataError(f"prediction for unknown qa_id {p.qa_id!r}")
        if TASK_FOR_SPLIT.get(g.split) != args.task:
            raise DataError(f"{p.qa_id}: split {g.split!r} does not match task {args.task!r}")
        try:
            out.append(score_candidate(p.response_text, g))
        except RewardError as e:
            raise DataError(str(e)) from None
    write_jsonl(args.out, out)
    mean = sum(r.total for r in out) / len(out) if out else 0.0
    print(f"scored {len(out)} predictions, mean total {mean:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_grpo_train_toy(args) -> int:
    try:
        cfg = GrpoConfig(
            group_size=args.group_size,
            beta=args.beta,
            learning_rate=args.lr,
            iterations=args.iters,
            seed=args.seed,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None
    report = train_toy(args.task, cfg)
    write_jsonl(args.report, report.rows())
    print(
        f"expected reward {report.initial_expected_reward:.4f} -> {report.final_expected_reward:.4f}, "
        f"final kl {report.kl[-1] if report.kl else 0.0:.6f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_eval_grounding(args) -> int:
    gts = read_jsonl(_input(args.gt), QARecord)
    preds = read_jsonl(_input(args.pred), Prediction)
    try:
        report = evaluate(preds, gts, args.kind, args.tau)
    except EvalError as e:
        raise DataError(str(e)) from None
    with open(args.report, "w", encoding="utf-8", newline="\n") as f:
        f.write(report.dumps())
    summary = {"n": report.n, "miou": report.miou, "loc_acc": report.loc_acc,
               "r1_at": report.r1_at, "mc_accuracy": report.mc_accuracy}
    print(json.dumps({k: v for k, v in summary.items() if v not in (None, {})}), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="egokit", description="Egocentric clip curation and grounding evaluation toolkit.", formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    groups = p.add_subparsers(dest="group", metavar="{curate,qa,reward,grpo,eval}", parser_class=_Parser)
    groups.required = True

    fd = FilterConfig()
    curate = groups.add_parser("curate", help="filter clips and build long-term segments", formatter_class=fmt)
    cs = curate.add_subparsers(dest="command", parser_class=_Parser)
    cs.required = True
    f = cs.add_parser("filter", help="apply the interaction filter to a detections file", formatter_class=fmt)
    f.add_argument("--detections", required=True, help="ClipRecord JSONL with per-frame detections")
    f.add_argument("--out", required=True, help="kept clips (JSONL)")
    f.add_argument("--decisions", default=None, help="optional per-clip decision log (JSONL)")
    f.add_argument("--alpha", type=float, default=fd.alpha, help="object boxes per frame required")
    f.add_argument("--disp-frac", type=float, default=fd.disp_fraction, help="hand displacement as a fraction of min(H,W)")
    f.add_argument("--min-dur", type=float, default=fd.min_duration_s, help="minimum clip duration in seconds")
    f.add_argument("--ego-threshold", type=float, default=fd.ego_threshold, help="minimum ego score")
    f.add_argument("--max-hands", type=int, default=fd.max_hands, help="most hands allowed in any frame")
    f.add_argument("--stride", type=int, default=fd.frame_stride, help="frame subsampling for displacement")
    f.add_argument("--workers", type=int, default=1, help="threads evaluating clips")
    f.set_defaults(func=cmd_curate_filter)

    s = cs.add_parser("segment", help="merge consecutive kept clips into long-term segments", formatter_class=fmt)
    s.add_argument("--clips", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--min-len", type=float, default=15.0, help="seconds")
    s.add_argument("--max-len", type=float, default=120.0, help="seconds")
    s.add_argument("--max-gap", type=float, default=5.0, help="largest gap between merged clips, seconds")
    s.add_argument("--delimiter", default=" ", help="separator between clip captions")
    s.set_defaults(func=cmd_curate_segment)

    qa = groups.add_parser("qa", help="QA generation through an annotator adapter", formatter_class=fmt)
    qs = qa.add_subparsers(dest="command", parser_class=_Parser)
    qs.required = True
    b = qs.add_parser("build", help="generate QA records for one split", formatter_class=fmt)
    b.add_argument("--split", required=True, choices=["short", "long", "cot", "fg-spatial", "fg-temporal"])
    b.add_argument("--clips", required=True, help="ClipRecord or SegmentRecord JSONL")
    b.add_argument("--adapter", required=True, help="mock:<path> or http:<url>")
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--concurrency", type=int, default=1, help="annotator calls in flight")
    b.add_argument("--sampling-ratio", type=float, default=1.0, help="fraction of input records used")
    b.add_argument("--min-rationale", type=int, default=200, help="minimum CoT rationale length, characters")
    b.add_argument("--caption-source", default="both", choices=["both", "caption", "narration"])
    b.set_defaults(func=cmd_qa_build)

    rw = groups.add_parser("reward", help="verifiable grounding rewards", formatter_class=fmt)
    rs = rw.add_subparsers(dest="command", parser_class=_Parser)
    rs.required = True
    r = rs.add_parser("score", help="score predictions against ground truth", formatter_class=fmt)
    r.add_argument("--task", required=True, choices=["og", "tg"])
    r.add_argument("--pred", required=True, help="JSONL of {qa_id, response_text}")
    r.add_argument("--gt", required=True, help="QARecord JSONL")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_reward_score)

    gd = GrpoConfig()
    gr = groups.add_parser("grpo", help="toy GRPO training", formatter_class=fmt)
    gs = gr.add_subparsers(dest="command", parser_class=_Parser)
    gs.required = True
    t = gs.add_parser("train-toy", help="train a softmax policy on a toy grounding task", formatter_class=fmt)
    t.add_argument("--task", required=True, choices=["box", "interval"])
    t.add_argument("--group-size", type=int, default=gd.group_size)
    t.add_argument("--beta", type=float, default=gd.beta, help="KL coefficient")
    t.add_argument("--lr", type=float, default=gd.learning_rate, help="initial step size")
    t.add_argument("--iters", type=int, default=gd.iterations)
    t.add_argument("--seed", type=int, default=gd.seed)
    t.add_argument("--report", required=True, help="JSONL of per-iteration statistics")
    t.set_defaults(func=cmd_grpo_train_toy)

    ev = groups.add_parser("eval", help="grounding and multiple-choice metrics", formatter_class=fmt)
    es = ev.add_subparsers(dest="command", parser_class=_Parser)
    es.required = True
    e = es.add_parser("grounding", help="evaluate predictions", formatter_class=fmt)
    e.add_argument("--kind", required=True, choices=["spatial", "temporal", "mc"])
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--tau", type=_floats, default=[0.05], help="comma-separated R1 thresholds")
    e.add_argument("--report", required=True, help="JSON report path")
    e.set_defaults(func=cmd_eval_grounding)
    return p


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"egokit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, JsonlError, FieldError, OSError) as e:
        print(f"egokit: data error: {e}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
