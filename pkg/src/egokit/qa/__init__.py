from .adapters import (
    API_KEY_ENV,
    AdapterError,
    AnnotatorRequest,
    AnnotatorResponse,
    HttpAdapter,
    MockAdapter,
    make_adapter,
    prompt_key,
)
from .builder import (
    PromptError,
    Rejection,
    SplitStats,
    build_prompt,
    call_with_retry,
    describe,
    run_split,
    validate_qa,
)
from .templates import TEMPLATES, QuestionTemplate, get_template, templates_for

__all__ = [
    "API_KEY_ENV",
    "AdapterError",
    "AnnotatorRequest",
    "AnnotatorResponse",
    "HttpAdapter",
    "MockAdapter",
    "PromptError",
    "QuestionTemplate",
    "Rejection",
    "SplitStats",
    "TEMPLATES",
    "build_prompt",
    "call_with_retry",
    "describe",
    "get_template",
    "make_adapter",
    "prompt_key",
    "run_split",
    "templates_for",
    "validate_qa",
]
