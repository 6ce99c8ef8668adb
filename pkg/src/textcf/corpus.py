"""Corpus ingestion: JSONL records or one plain-text instance per line."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import InputError


@dataclass(frozen=True)
class CorpusInstance:
    id: str
    text: str
    label: int | None = None
    target: int | None = None


def _parse_jsonl(lines: list[tuple[int, str]], path) -> list[CorpusInstance]:
    instances = []
    for number, line in lines:
        try:
            record = json.loads(line)
        except json.JSONDecodeError as error:
            raise InputError(f"{path}:{number}: invalid JSON ({error})") from error
        if not isinstance(record, dict):
            raise InputError(f"{path}:{number}: expected a JSON object")
        for key in ("id", "text"):
            if key not in record:
                raise InputError(f"{path}:{number}: missing {key!r}")
        text = record["text"]
        if not isinstance(text, str) or not text.strip():
            raise InputError(f"{path}:{number}: text must be a nonempty string")
        instances.append(CorpusInstance(id=str(record["id"]), text=text,
                                        label=record.get("label"),
                                        target=record.get("target")))
    return instances


def load_corpus(path) -> list[CorpusInstance]:
    """Read instances from ``path``.

    Lines that parse as JSON objects are treated as records with required
    "id" and "text" keys and optional "label" and "target"; otherwise each
    nonblank line is one instance text with ids assigned by position.

    Raises:
        InputError: unreadable file, empty corpus, malformed record, or
            duplicate ids.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            raw = handle.read()
    except OSError as error:
        raise InputError(f"cannot read corpus {path}: {error}") from error

    lines = [(number, line) for number, line in
             enumerate(raw.splitlines(), start=1) if line.strip()]
    if not lines:
        raise InputError("empty corpus")

    first = lines[0][1].lstrip()
    if first.startswith("{"):
        instances = _parse_jsonl(lines, path)
    else:
        instances = [CorpusInstance(id=str(index), text=line)
                     for index, (_, line) in enumerate(lines)]

    seen: set[str] = set()
    for instance in instances:
        if instance.id in seen:
            raise InputError(f"duplicate corpus id {instance.id!r}")
        seen.add(instance.id)
    return instances
