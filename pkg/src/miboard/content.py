"""Reading-material ingestion: text packs and target-sentence views.

A pack is a JSON document::

    {"title": "...",
     "sentences": ["...", ...],
     "targets": [{"sentence": 2, "strategy": "bridging"}, ...]}

Strategy names use the stable serialization names from
:class:`miboard.core.types.Strategy`. Packs are immutable after load and
safe to share across sessions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .core.types import Strategy
from .errors import (
    EmptySentence,
    IndexOutOfRange,
    NonMonotonicTargets,
    NoTargets,
    ParseError,
)
from .jsonutil import canonical_json, sha256_hex


@dataclass(frozen=True)
class TextPack:
    title: str
    sentences: tuple[str, ...]
    targets: tuple[tuple[int, Strategy], ...]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "sentences": list(self.sentences),
            "targets": [
                {"sentence": idx, "strategy": strategy.value}
                for idx, strategy in self.targets
            ],
        }

    def digest(self) -> str:
        return sha256_hex(canonical_json(self.to_dict()))


@dataclass(frozen=True)
class TargetView:
    """One target sentence plus everything the reader may review: the
    sentences before it, in original order, and nothing after it."""

    target_index: int
    sentence: str
    context: tuple[str, ...]
    assigned_strategy: Strategy


def validate_pack(pack: TextPack) -> None:
    if not pack.sentences:
        raise EmptySentence("pack has no sentences")
    for i, sentence in enumerate(pack.sentences):
        if not sentence.strip():
            raise EmptySentence(f"sentence {i} is empty")
    if not pack.targets:
        raise NoTargets("pack has no targets")
    previous = -1
    for idx, _strategy in pack.targets:
        if not (0 <= idx < len(pack.sentences)):
            raise IndexOutOfRange(f"target sentence index {idx} out of range")
        if idx <= previous:
            raise NonMonotonicTargets(f"target indices must strictly increase, got {idx} after {previous}")
        previous = idx


def load_text_pack(data: bytes | str) -> TextPack:
    """Parse and validate a pack document. Raises ParseError for anything
    that is not well-formed UTF-8 JSON of the right shape, and the specific
    content errors for semantically invalid packs."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"pack is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"pack is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("pack document must be a JSON object")
    title = doc.get("title")
    sentences = doc.get("sentences")
    targets = doc.get("targets")
    if not isinstance(title, str):
        raise ParseError("title must be a string")
    if not isinstance(sentences, list) or not all(isinstance(s, str) for s in sentences):
        raise ParseError("sentences must be a list of strings")
    if not isinstance(targets, list):
        raise ParseError("targets must be a list")
    parsed_targets: list[tuple[int, Strategy]] = []
    for i, entry in enumerate(targets):
        if not isinstance(entry, dict):
            raise ParseError(f"target {i} must be an object")
        idx = entry.get("sentence")
        name = entry.get("strategy")
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise ParseError(f"target {i} sentence index must be an integer")
        try:
            strategy = Strategy(name)
        except ValueError as exc:
            raise ParseError(f"target {i} has unknown strategy {name!r}") from exc
        parsed_targets.append((idx, strategy))
    pack = TextPack(title=title, sentences=tuple(sentences), targets=tuple(parsed_targets))
    validate_pack(pack)
    return pack


def serialize_pack(pack: TextPack) -> str:
    return canonical_json(pack.to_dict())


def target_view(pack: TextPack, target_index: int) -> TargetView:
    if not (0 <= target_index < len(pack.targets)):
        raise IndexOutOfRange(f"target index {target_index} out of range (pack has {len(pack.targets)})")
    sentence_index, strategy = pack.targets[target_index]
    return TargetView(
        target_index=target_index,
        sentence=pack.sentences[sentence_index],
        context=tuple(pack.sentences[:sentence_index]),
        assigned_strategy=strategy,
    )
