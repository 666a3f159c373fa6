"""Question-type registry and prompt templates for every QA split.

Only the two fine-grained grounding prompts are fixed wording; the
short-term, long-term and CoT prompts are our own reconstructions and are
flagged with ``reconstructed=True``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..structured import HAND_OBJECT_GROUNDING_PROMPT, TEMPORAL_GROUNDING_PROMPT
from ..types import QUESTION_TYPES

SLOT_RE = re.compile(r"\[(DESCRIPTION|OBJECT|QUESTION)\]")

SYSTEM_PROMPT = (
    "You write question-answer pairs about first-person (egocentric) videos from their text "
    "descriptions. Use only facts stated in the description. Reply with exactly one JSON object "
    'and no other text. Required keys: "question" and "answer" (strings). When asked for '
    'reasoning, also include "rationale" (string).'
)

_SHORT_HINTS = {
    "object_existence": "which object is present or being handled",
    "object_attribute": "a visible property or state of an object",
    "object_count": "how many objects or people of some kind appear",
    "object_interaction": "what is being done to or with a specific object",
    "action_description": "what the hands or the camera wearer are doing",
    "action_reasoning": "why an action is being performed",
    "background_attribute": "the surroundings or setting of the scene",
}

_LONG_HINTS = {
    "action_sequence": "the order of several actions across the segment",
    "temporal_grounding": "when, in seconds from the segment start, something happens",
    "object_count": "how many distinct objects are used over the whole segment",
    "action_prediction": "the most likely next action after a described step",
    "action_summary": "a summary of the key actions of one hand or person",
    "action_reasoning": "why a multi-step activity is carried out the way it is",
}

_SHORT_BODY = (
    "Description of a short first-person video clip:\n[DESCRIPTION]\n\n"
    'Write one question of type "{name}" (about {hint}) and answer it in one or two sentences.'
)

_LONG_BODY = (
    "Time-ordered description of a first-person video segment made of consecutive clips:\n"
    "[DESCRIPTION]\n\n"
    'Write one question of type "{name}" (about {hint}) that needs information from more than '
    "one part of the segment, and answer it."
)

_COT_BODY = (
    "Time-ordered description of a first-person video segment:\n[DESCRIPTION]\n\n"
    "First decide whether this segment supports a question that can only be answered by "
    "reasoning over several steps. If it does not, reply with {{\"skip\": true}}. Otherwise write "
    'the question, a step-by-step "rationale" that cites the description, and a short "answer".'
)

_FG_CONTEXT = "\n\nAnnotation:\n[DESCRIPTION]\n\n"
_FG_SPATIAL_TAIL = (
    'Reply with the JSON object; "answer" must be the box as (x_min,y_min),(x_max,y_max) and '
    '"rationale" the reasoning to place in the think tags.'
)
_FG_TEMPORAL_TAIL = (
    'Reply with the JSON object; "answer" must be the interval as (start,end) in seconds with '
    'two decimals and "rationale" the reasoning to place in the think tags.'
)


@dataclass(frozen=True)
class QuestionTemplate:
    split: str
    question_type: str
    prompt_text: str
    reconstructed: bool = True

    @property
    def slots(self) -> set[str]:
        return set(SLOT_RE.findall(self.prompt_text))


def _title(qt: str) -> str:
    return qt.replace("_", " ")


def _build_registry() -> dict[tuple[str, str], QuestionTemplate]:
    reg = {}
    for qt, hint in _SHORT_HINTS.items():
        reg[("short", qt)] = QuestionTemplate("short", qt, _SHORT_BODY.format(name=_title(qt), hint=hint))
    for qt, hint in _LONG_HINTS.items():
        reg[("long", qt)] = QuestionTemplate("long", qt, _LONG_BODY.format(name=_title(qt), hint=hint))
    reg[("cot", "chain_of_thought_reasoning")] = QuestionTemplate(
        "cot", "chain_of_thought_reasoning", _COT_BODY.format()
    )
    reg[("fg_spatial", "hand_object_grounding")] = QuestionTemplate(
        "fg_spatial", "hand_object_grounding",
        HAND_OBJECT_GROUNDING_PROMPT + _FG_CONTEXT + _FG_SPATIAL_TAIL, reconstructed=False,
    )
    reg[("fg_temporal", "fine_grained_temporal_grounding")] = QuestionTemplate(
        "fg_temporal", "fine_grained_temporal_grounding",
        TEMPORAL_GROUNDING_PROMPT + _FG_CONTEXT + _FG_TEMPORAL_TAIL, reconstructed=False,
    )
    assert sorted(reg) == sorted((s, q) for s, qs in QUESTION_TYPES.items() for q in qs)
    return reg


TEMPLATES = _build_registry()


def templates_for(split: str) -> list[QuestionTemplate]:
    if split not in QUESTION_TYPES:
        raise ValueError(f"unknown split {split!r}")
    return [TEMPLATES[(split, qt)] for qt in QUESTION_TYPES[split]]


def get_template(split: str, question_type: str) -> QuestionTemplate:
    try:
        return TEMPLATES[(split, question_type)]
    except KeyError:
        raise ValueError(f"no template for {split}/{question_type}") from None
