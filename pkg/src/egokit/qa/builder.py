"""Prompt construction, annotator calls and response screening for QA splits."""

from __future__ import annotations

import json
import logging
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from ..structured import (
    hand_object_grounding_prompt,
    parse_box,
    parse_interval,
    temporal_grounding_prompt,
)
from ..types import QUESTION_TYPES, ClipRecord, QARecord, SegmentRecord, validate_qa_record
from .adapters import Adapter, AdapterError, AnnotatorRequest, AnnotatorResponse
from .templates import SLOT_RE, SYSTEM_PROMPT, QuestionTemplate, templates_for

log = logging.getLogger(__name__)

Source = Union[ClipRecord, SegmentRecord]
CAPTION_SOURCES = ("both", "caption", "narration")
SKIP = "skip"


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class Rejection:
    reason: str

    def __bool__(self) -> bool:
        return False


def source_id(record: Source) -> str:
    return record.segment_id if isinstance(record, SegmentRecord) else record.clip_id


def source_clip_ids(record: Source) -> tuple[str, ...]:
    return record.clip_ids if isinstance(record, SegmentRecord) else (record.clip_id,)


def describe(record: Source, caption_source: str = "both") -> str:
    """Text annotation handed to the annotator for one clip or segment."""
    if caption_source not in CAPTION_SOURCES:
        raise ValueError(f"caption_source must be one of {CAPTION_SOURCES}")
    if isinstance(record, SegmentRecord):
        if not record.caption:
            raise PromptError(f"{record.segment_id}: no text annotation")
        return record.caption
    parts = []
    if caption_source in ("both", "narration") and record.narration:
        parts.append(f"Narration: {record.narration}")
    if caption_source in ("both", "caption") and record.caption:
        parts.append(f"Caption: {record.caption}")
    if not parts:
        raise PromptError(f"{record.clip_id}: no text annotation")
    return "\n".join(parts)


def build_prompt(
    template: QuestionTemplate,
    record: Source,
    caption_source: str = "both",
    slot_value: Optional[str] = None,
    temperature: float = 0.0,
    max_output: int = 1024,
) -> AnnotatorRequest:
    """Render ``template`` for one record.

    For the grounding splits ``slot_value`` fills the object / event slot;
    it defaults to the clip narration.
    """
    values = {"DESCRIPTION": None, "OBJECT": None, "QUESTION": None}
    needs = template.slots
    if "OBJECT" in needs or "QUESTION" in needs:
        if slot_value is None and isinstance(record, ClipRecord):
            slot_value = record.narration
        if not slot_value:
            raise PromptError(f"{source_id(record)}: no object or event text for grounding prompt")
        values["OBJECT"] = values["QUESTION"] = slot_value
        try:
            values["DESCRIPTION"] = describe(record, "caption")
        except PromptError:
            values["DESCRIPTION"] = "(none)"
    else:
        values["DESCRIPTION"] = describe(record, caption_source)

    # single pass, so slot-like text inside substituted values is left alone
    user = SLOT_RE.sub(lambda m: values[m.group(1)], template.prompt_text)
    return AnnotatorRequest(SYSTEM_PROMPT, user, temperature, max_output)


def grounding_question(split: str, record: Source) -> Optional[str]:
    """The model-facing question of a grounding record; None for other splits."""
    slot = record.narration if isinstance(record, ClipRecord) else None
    if split == "fg_spatial" and slot:
        return hand_object_grounding_prompt(slot)
    if split == "fg_temporal" and slot:
        return temporal_grounding_prompt(slot)
    return None


_FENCE_RE = re.compile(r"^```(?:json)?\s*(.*?)\s*```$", re.DOTALL)


def _norm(text: str) -> str:
    return " ".join(text.lower().split()).rstrip("?.!")


def validate_qa(
    response_text: str,
    split: str,
    question_type: Optional[str] = None,
    clip_ids: Sequence[str] = (),
    qa_id: Optional[str] = None,
    question: Optional[str] = None,
    min_rationale_chars: int = 200,
) -> Union[QARecord, Rejection]:
    """Turn an annotator reply into a QARecord, or say why it was rejected.

    ``question`` supplies the question text when the reply omits it (the
    grounding splits, whose question is the rendered prompt itself).
    """
    if split not in QUESTION_TYPES:
        raise ValueError(f"unknown split {split!r}")
    question_type = question_type or QUESTION_TYPES[split][0]
    text = response_text.strip()
    m = _FENCE_RE.match(text)
    if m:
        text = m.group(1)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        return Rejection("malformed annotator JSON")
    if not isinstance(obj, dict):
        return Rejection("malformed annotator JSON")
    if obj.get("skip") is True:
        return Rejection(SKIP)

    q = obj.get("question", question)
    a = obj.get("answer")
    r = obj.get("rationale")
    if not isinstance(q, str) or not q.strip():
        return Rejection("empty question")
    if not isinstance(a, str) or not a.strip():
        return Rejection("empty answer")
    if r is not None and not isinstance(r, str):
        return Rejection("rationale is not a string")
    q, a = q.strip(), a.strip()
    if _norm(q) == _norm(a):
        return Rejection("question/answer duplication")
    if split == "cot" and (r is None or len(r.strip()) < min_rationale_chars):
        return Rejection("rationale too short")

    gt_box = gt_interval = None
    if split == "fg_spatial":
        gt_box = parse_box(a)
        if gt_box is None:
            return Rejection("payload_malformed")
    elif split == "fg_temporal":
        gt_interval = parse_interval(a)
        if gt_interval is None:
            return Rejection("payload_malformed")

    record = QARecord(
        qa_id=qa_id or f"{split}:{'+'.join(clip_ids)}:{question_type}",
        clip_ids=tuple(clip_ids),
        split=split,
        question_type=question_type,
        question=q,
        answer=a,
        rationale=r.strip() if r is not None else None,
        gt_box=gt_box,
        gt_interval=gt_interval,
    )
    report = validate_qa_record(record)
    if report:
        return Rejection(report.issues[0])
    return record


@dataclass
class SplitStats:
    sampled: int = 0
    requests: int = 0
    accepted: int = 0
    skipped: int = 0
    failed: int = 0
    retries: int = 0
    rejected: int = 0


def call_with_retry(
    adapter: Adapter,
    request: AnnotatorRequest,
    max_attempts: int = 3,
    backoff_s: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> tuple[Optional[AnnotatorResponse], int, Optional[Exception]]:
    """Return (response or None, number of retries used, last error)."""
    err: Optional[Exception] = None
    for attempt in range(max_attempts):
        if attempt:
            sleep(backoff_s * 2 ** (attempt - 1))
        try:
            return adapter.complete(request), attempt, None
        except (AdapterError, TimeoutError, OSError) as e:
            err = e
    return None, max_attempts - 1, err


def run_split(
    records: Iterable[Source],
    split: str,
    adapter: Adapter,
    sampling_ratio: float = 1.0,
    seed: int = 0,
    question_types: Optional[Sequence[str]] = None,
    concurrency: int = 1,
    max_attempts: int = 3,
    backoff_s: float = 0.5,
    min_rationale_chars: int = 200,
    caption_source: str = "both",
    stats: Optional[SplitStats] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Iterator[QARecord]:
    """Generate QA records for one split, in input order.

    Each record is kept with probability ``sampling_ratio`` (seeded), then
    one request per question type is sent. Records without usable text,
    annotator failures and rejected replies are logged and dropped.
    """
    if not 0.0 <= sampling_ratio <= 1.0:
        raise ValueError("sampling_ratio must lie in [0,1]")
    templates = templates_for(split)
    if question_types is not None:
        templates = [t for t in templates if t.question_type in set(question_types)]
        if not templates:
            raise ValueError(f"no question types of split {split!r} selected")
    stats = stats if stats is not None else SplitStats()
    rng = random.Random(seed)

    jobs = []
    for rec in records:
        if rng.random() >= sampling_ratio:
            continue
        stats.sampled += 1
        for t in templates:
            try:
                req = build_prompt(t, rec, caption_source)
            except PromptError as e:
                log.warning("skipping %s: %s", source_id(rec), e)
                break
            jobs.append((rec, t, req))
    stats.requests += len(jobs)

    def work(job):
        return call_with_retry(adapter, job[2], max_attempts, backoff_s, sleep)

    if concurrency > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    for (rec, t, req), (resp, retries, err) in zip(jobs, results):
        sid = source_id(rec)
        stats.retries += retries
        if resp is None:
            stats.failed += 1
            log.warning("annotator failed for %s (%s) after %d retries: %s", sid, t.question_type, retries, err)
            continue
        if retries:
            log.info("annotator succeeded for %s (%s) after %d retries", sid, t.question_type, retries)
        default_q = grounding_question(split, rec)
        out = validate_qa(
            resp.text,
            split,
            t.question_type,
            source_clip_ids(rec),
            qa_id=f"{split}:{sid}:{t.question_type}",
            question=default_q,
            min_rationale_chars=min_rationale_chars,
        )
        if isinstance(out, Rejection):
            if out.reason == SKIP:
                stats.skipped += 1
                log.info("annotator skipped %s", sid)
            else:
                stats.rejected += 1
                log.info("rejected %s (%s): %s", sid, t.question_type, out.reason)
            continue
        stats.accepted += 1
        yield out
