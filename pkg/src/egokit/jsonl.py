"""Canonical JSONL reading and writing for all record kinds."""

from __future__ import annotations

import io
import json
import os
from typing import IO, Iterable, Iterator, Type, TypeVar, Union

from .types import FieldError

T = TypeVar("T")

PathOrStream = Union[str, os.PathLike, IO[str]]


class JsonlError(ValueError):
    """A line of a JSONL file could not be turned into a record."""

    def __init__(self, line: int, field: str | None, message: str, path: str | None = None):
        where = f"{path}:{line}" if path else f"line {line}"
        what = f" field {field!r}" if field else ""
        super().__init__(f"{where}:{what} {message}")
        self.line = line
        self.field = field
        self.path = path


def dumps(record) -> str:
    """Canonical one-line form: field order fixed by the type, compact separators."""
    obj = record.to_json() if hasattr(record, "to_json") else record
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def _open(src: PathOrStream, mode: str):
    if isinstance(src, (str, os.PathLike)):
        return open(src, mode, encoding="utf-8", newline="\n"), True
    return src, False


def iter_jsonl(src: PathOrStream, record_type: Type[T] | None = None) -> Iterator[T]:
    """Yield records line by line; blank lines are skipped.

    With ``record_type=None`` the raw decoded objects are yielded.
    """
    stream, owned = _open(src, "r")
    path = os.fspath(src) if owned else None
    try:
        for lineno, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise JsonlError(lineno, None, f"invalid JSON ({e.msg})", path) from None
            if record_type is None:
                yield obj
                continue
            if not isinstance(obj, dict):
                raise JsonlError(lineno, None, "expected a JSON object", path)
            try:
                yield record_type.from_json(obj)
            except FieldError as e:
                raise JsonlError(lineno, e.field, e.reason, path) from None
    finally:
        if owned:
            stream.close()


def read_jsonl(src: PathOrStream, record_type: Type[T] | None = None) -> list[T]:
    return list(iter_jsonl(src, record_type))


def write_jsonl(dst: PathOrStream, records: Iterable) -> int:
    stream, owned = _open(dst, "w")
    n = 0
    try:
        for r in records:
            stream.write(dumps(r))
            stream.write("\n")
            n += 1
    finally:
        if owned:
            stream.close()
    return n


def to_string(records: Iterable) -> str:
    buf = io.StringIO()
    write_jsonl(buf, records)
    return buf.getvalue()
