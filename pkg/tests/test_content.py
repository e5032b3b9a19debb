from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from miboard.content import load_text_pack, serialize_pack, target_view
from miboard.core.types import Strategy
from miboard.errors import (
    ContentError,
    EmptySentence,
    IndexOutOfRange,
    NonMonotonicTargets,
    NoTargets,
    ParseError,
)

from conftest import PACK_DOC


def doc(**overrides) -> str:
    d = {**PACK_DOC, **overrides}
    return json.dumps(d)


def test_loads_valid_pack():
    pack = load_text_pack(doc())
    assert pack.title == PACK_DOC["title"]
    assert len(pack.sentences) == 5
    assert pack.targets[1] == (2, Strategy.BRIDGING)


def test_load_serialize_round_trip():
    pack = load_text_pack(doc())
    assert load_text_pack(serialize_pack(pack)) == pack


def test_accepts_bytes_and_rejects_non_utf8():
    assert load_text_pack(doc().encode("utf-8")).title == PACK_DOC["title"]
    with pytest.raises(ParseError):
        load_text_pack(b"\xff\xfe{}")


@pytest.mark.parametrize(
    "bad",
    [
        "not json at all",
        "[1, 2]",
        '{"title": 3, "sentences": ["a"], "targets": []}',
        '{"title": "t", "sentences": "a", "targets": []}',
        '{"title": "t", "sentences": ["a"], "targets": [{"sentence": "x", "strategy": "bridging"}]}',
        '{"title": "t", "sentences": ["a"], "targets": [{"sentence": 0, "strategy": "guessing"}]}',
    ],
)
def test_malformed_documents(bad):
    with pytest.raises(ParseError):
        load_text_pack(bad)


def test_target_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        load_text_pack(doc(targets=[{"sentence": 5, "strategy": "bridging"}]))


def test_no_targets():
    with pytest.raises(NoTargets):
        load_text_pack(doc(targets=[]))


def test_empty_sentence():
    with pytest.raises(EmptySentence):
        load_text_pack(doc(sentences=["ok", "   ", "fine"]))
    with pytest.raises(EmptySentence):
        load_text_pack(doc(sentences=[]))


def test_non_monotonic_targets():
    with pytest.raises(NonMonotonicTargets):
        load_text_pack(
            doc(
                targets=[
                    {"sentence": 2, "strategy": "bridging"},
                    {"sentence": 1, "strategy": "prediction"},
                ]
            )
        )
    with pytest.raises(NonMonotonicTargets):
        load_text_pack(
            doc(
                targets=[
                    {"sentence": 2, "strategy": "bridging"},
                    {"sentence": 2, "strategy": "prediction"},
                ]
            )
        )


def test_target_view_context_is_everything_before():
    pack = load_text_pack(doc())
    view = target_view(pack, 1)
    assert view.sentence == PACK_DOC["sentences"][2]
    assert view.context == tuple(PACK_DOC["sentences"][:2])
    assert view.assigned_strategy is Strategy.BRIDGING


def test_target_view_first_sentence_has_empty_context():
    pack = load_text_pack(
        doc(targets=[{"sentence": 0, "strategy": "prediction"}])
    )
    assert target_view(pack, 0).context == ()


def test_target_view_index_bounds():
    pack = load_text_pack(doc())
    with pytest.raises(IndexOutOfRange):
        target_view(pack, len(pack.targets))
    with pytest.raises(IndexOutOfRange):
        target_view(pack, -1)


def test_context_length_equals_sentence_index():
    pack = load_text_pack(doc())
    for i, (sentence_index, _s) in enumerate(pack.targets):
        assert len(target_view(pack, i).context) == sentence_index


@given(
    sentences=st.lists(st.text(min_size=1).filter(lambda s: s.strip()), min_size=1, max_size=8),
    data=st.data(),
)
def test_generated_valid_packs_round_trip(sentences, data):
    n_targets = data.draw(st.integers(1, len(sentences)))
    indices = sorted(
        data.draw(
            st.lists(
                st.integers(0, len(sentences) - 1),
                min_size=n_targets,
                max_size=n_targets,
                unique=True,
            )
        )
    )
    targets = [
        {"sentence": i, "strategy": data.draw(st.sampled_from(Strategy)).value}
        for i in indices
    ]
    raw = json.dumps({"title": "generated", "sentences": sentences, "targets": targets})
    pack = load_text_pack(raw)
    assert load_text_pack(serialize_pack(pack)) == pack


@given(st.binary(max_size=400))
def test_arbitrary_bytes_never_crash(blob):
    try:
        load_text_pack(blob)
    except ContentError:
        pass
