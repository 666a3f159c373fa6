"""Parsing and rendering of ``<think>...</think><answer>...</answer>`` responses.

The tag check is strict: apart from surrounding whitespace, nothing may
appear outside the two blocks, and each tag must occur exactly once.
Payload numbers are plain decimals (``0.5``, ``.5``, ``12``); exponents,
signs and out-of-range values are rejected rather than repaired.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Union

from .types import BBox, TimeInterval

OK = "ok"
FORMAT_MISMATCH = "format_mismatch"
PAYLOAD_MALFORMED = "payload_malformed"

PAYLOAD_KINDS = ("box", "interval", "free")

_TAG = r"</?(?:think|answer)>"
_INNER = rf"((?:(?!{_TAG}).)*)"
_RESPONSE_RE = re.compile(rf"<think>{_INNER}</think>\s*<answer>{_INNER}</answer>", re.DOTALL)

_NUM = r"(\d+(?:\.\d+)?|\.\d+)"
_PAIR = rf"\(\s*{_NUM}\s*,\s*{_NUM}\s*\)"
_BOX_RE = re.compile(rf"\s*{_PAIR}\s*,\s*{_PAIR}\s*")
_INTERVAL_RE = re.compile(rf"\s*{_PAIR}\s*")

# Prompt wording for the two fine-grained grounding splits, verbatim.
TEMPORAL_GROUNDING_PROMPT = (
    'To accurately pinpoint the event "[QUESTION]" in the video, you need to identify a time '
    "interval from which the answer to the question can be deduced. Output your thought process "
    "within the <think> </think> tags. Then, provide the start and end times (in seconds, precise "
    'to two decimal places) in the format "(start,end)" within the <answer> </answer> tags.'
)
HAND_OBJECT_GROUNDING_PROMPT = (
    'This is an image containing an object: "[OBJECT]" ,and output the bounding box of this '
    "object in the image. Output your thought process within the <think> </think> tags. Then "
    "provide your bounding box within the <answer> </answer> tags,following <answer> "
    "(x_min,y_min),(x_max,y_max) </answer> format. The bounding box coordinates are normalized "
    "to the range [0, 1], relative to the width and height of the image."
)


def temporal_grounding_prompt(question: str) -> str:
    return TEMPORAL_GROUNDING_PROMPT.replace("[QUESTION]", question)


def hand_object_grounding_prompt(obj: str) -> str:
    return HAND_OBJECT_GROUNDING_PROMPT.replace("[OBJECT]", obj)


Payload = Union[BBox, TimeInterval, str]


@dataclass(frozen=True)
class GroundedAnswer:
    think_text: str
    answer_text: str
    payload: Payload | None = None


@dataclass(frozen=True)
class ParseOutcome:
    status: str
    answer: GroundedAnswer | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OK

    @property
    def format_matched(self) -> bool:
        return self.status != FORMAT_MISMATCH


def match_tags(text: str) -> tuple[str, str] | None:
    """Return the raw (think, answer) contents, or None when the tag layout is wrong."""
    m = _RESPONSE_RE.fullmatch(text.strip())
    if m is None:
        return None
    return m.group(1), m.group(2)


def parse_box(text: str) -> BBox | None:
    m = _BOX_RE.fullmatch(text)
    if m is None:
        return None
    box = BBox(*(float(g) for g in m.groups()))
    return None if box.problems() else box


def parse_interval(text: str) -> TimeInterval | None:
    m = _INTERVAL_RE.fullmatch(text)
    if m is None:
        return None
    iv = TimeInterval(float(m.group(1)), float(m.group(2)))
    return None if iv.problems() else iv


def parse_payload(text: str, kind: str) -> Payload | None:
    if kind == "box":
        return parse_box(text)
    if kind == "interval":
        return parse_interval(text)
    if kind == "free":
        return text
    raise ValueError(f"unknown payload kind {kind!r}")


def parse_response(text: str, expected_payload: str = "free", strip: bool = False) -> ParseOutcome:
    """Classify a model response; never raises for any string input.

    ``strip=True`` trims whitespace from the returned think/answer texts;
    payload parsing tolerates surrounding whitespace either way.
    """
    if expected_payload not in PAYLOAD_KINDS:
        raise ValueError(f"unknown payload kind {expected_payload!r}")
    if not isinstance(text, str):
        return ParseOutcome(FORMAT_MISMATCH, reason="not a string")
    tags = match_tags(text)
    if tags is None:
        return ParseOutcome(FORMAT_MISMATCH, reason="tag layout")
    think, answer = tags
    if strip:
        think, answer = think.strip(), answer.strip()
    payload = parse_payload(answer, expected_payload)
    if payload is None:
        return ParseOutcome(
            PAYLOAD_MALFORMED, GroundedAnswer(think, answer), reason=f"bad {expected_payload}"
        )
    return ParseOutcome(OK, GroundedAnswer(think, answer, payload))


def _fixed(x: float, places: int) -> str:
    # round the shortest decimal form of x, half to even; "+ 0" drops a negative zero
    q = Decimal(repr(float(x))).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
    return f"{q + 0:.{places}f}"


def render_interval(iv: TimeInterval) -> str:
    return f"({_fixed(iv.start_s, 2)},{_fixed(iv.end_s, 2)})"


def render_box(b: BBox) -> str:
    return (
        f"({_fixed(b.x_min, 3)},{_fixed(b.y_min, 3)}),"
        f"({_fixed(b.x_max, 3)},{_fixed(b.y_max, 3)})"
    )


def render_response(think: str, answer: str) -> str:
    return f"<think>{think}</think><answer>{answer}</answer>"
