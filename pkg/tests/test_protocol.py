from __future__ import annotations

import dataclasses
import json

import pytest
from hypothesis import given, settings, strategies as st

from miboard import protocol
from miboard.core import events as ev
from miboard.core.types import EventCard, EventCardKind, PowerCardKind, Strategy
from miboard.errors import (
    BadFieldType,
    MalformedJson,
    MissingField,
    OversizedLine,
    ProtocolError,
    UnencodableField,
    UnknownType,
)
from miboard.protocol import Envelope, decode, encode, envelope, redact_for

BR = Strategy.BRIDGING
EL = Strategy.ELABORATION


def catalogue_samples() -> list[Envelope]:
    """At least one populated instance of every wire message type."""
    cmd = [
        protocol.Join(name="Ada", lobby="L1"),
        protocol.Join(name="Grace"),
        protocol.CreateLobby(config_overrides={"board_length": 12}, pack="cells"),
        protocol.StartGame(),
        protocol.SubmitSE(text="the copies split apart\nacross two lines"),
        protocol.Vote(strategy=BR),
        protocol.Chat(text="hello there"),
        protocol.PlayPowerCard(kind=PowerCardKind.FREEZE_PLAYER, target="p2"),
        protocol.PlayPowerCard(kind=PowerCardKind.EXTRA_TURN),
        protocol.AlterStake(),
        protocol.SwapStrategy(),
        protocol.Roll(),
        protocol.Ready(),
        protocol.Rematch(),
        protocol.Leave(),
    ]
    evs = [
        protocol.LobbyState(
            lobby_id="L1",
            host_id="p1",
            players=[{"id": "p1", "name": "Ada"}],
            config={"board_length": 12},
            pack="cells",
            state="waiting",
        ),
        protocol.GameStarted(snapshot={"board_length": 12, "players": []}),
        ev.TurnAssigned(
            reader_id="p1",
            target_index=0,
            sentence="A cell copies its chromosomes.",
            context=("Every living thing grows.",),
            assigned_strategy=BR,
            stake=10,
        ),
        ev.TurnAssigned(
            reader_id="p1",
            target_index=0,
            sentence="A cell copies its chromosomes.",
            context=(),
            assigned_strategy=None,
            stake=None,
        ),
        ev.StakeAltered(player_id="p1", points=4, stake=20),
        ev.StrategySwapped(player_id="p1", points=2, assigned_strategy=EL, stake=8),
        ev.SEPosted(reader_id="p1", text="it divides so both copies match"),
        ev.VoteRecorded(round=1, voter_count=2),
        ev.SummaryRevealed(
            assigned_strategy=BR,
            stake=10,
            votes={"p2": BR, "p3": EL},
            majority_strategy=BR,
            reader_in_majority=True,
            unanimous=False,
            deltas={"p1": 10, "p2": 5, "p3": 0},
            points={"p1": 10, "p2": 5, "p3": 0},
        ),
        ev.DiscussionStarted(),
        ev.RevoteStarted(),
        ev.FinalSummaryRevealed(
            votes={"p2": BR, "p3": BR},
            persuasion_deltas={"p1": 2, "p2": 2, "p3": 0},
            points={"p1": 12, "p2": 7, "p3": 0},
        ),
        ev.MovementWindow(mover_id="p1"),
        ev.PowerCardPlayed(
            player_id="p1",
            kind=PowerCardKind.EXTRA_DRAW,
            target_id=None,
            points={"p1": 9},
            drawn=PowerCardKind.FREEZE_PLAYER,
        ),
        ev.MovementResolved(
            mover_id="p1",
            roll=4,
            event_card=EventCard(EventCardKind.MOVE_BACKWARD, 2),
            positions={"p1": 6, "p2": 0},
            power_drawn=None,
        ),
        ev.TurnVoided(reader_id="p2"),
        ev.GameOver(winner_id="p1", points={"p1": 30}, positions={"p1": 40}),
        protocol.ChatRelayed(sender_id="p2", sender_name="Grace", text="nice one"),
        protocol.RematchRecorded(count=2),
        protocol.PlayerConnection(player_id="p3", connected=False),
        protocol.ErrorEvent(code="wrong_phase", message="cannot roll now", request_id="r9"),
    ]
    logs = [
        protocol.LogHeader(
            protocol="miboard/1",
            lobby_id="L1",
            seed=1234567890123456789,
            config={"board_length": 12},
            pack={"title": "t", "sentences": ["a"], "targets": [{"sentence": 0, "strategy": "bridging"}]},
            pack_digest="ab" * 32,
            roster=[{"id": "p1", "name": "Ada"}],
            started_at=0.0,
        ),
        protocol.LogCommand(ts=1.0, actor="p2", command=protocol.Vote(strategy=EL)),
        protocol.LogCommand(ts=2.0, actor="p1", command=protocol.Join(name="Ada")),
        protocol.LogTimer(ts=3.0, kind="vote_timeout", round=1),
        protocol.LogTimer(ts=4.0, kind="discussion_timeout"),
        protocol.LogConnection(ts=5.0, player_id="p3", connected=False),
        protocol.LogDigest(ts=6.0, digest="cd" * 32, turn_count=17),
    ]
    out = []
    for i, payload in enumerate(cmd):
        out.append(envelope(payload, req=f"r{i}"))
    for i, payload in enumerate(evs):
        out.append(envelope(payload, seq=i + 1))
    for payload in logs:
        out.append(envelope(payload))
    return out


def test_catalogue_covers_every_wire_type():
    seen = {e.kind for e in catalogue_samples()}
    assert seen == set(protocol.WIRE_TYPES)


def test_round_trip_identity_full_catalogue():
    for env in catalogue_samples():
        line = encode(env)
        assert decode(line) == env, env.kind


def test_encoding_is_canonical_and_single_line():
    for env in catalogue_samples():
        a, b = encode(env), encode(env)
        assert a == b
        assert a.endswith(b"\n") and b"\n" not in a[:-1]
        keys = list(json.loads(a).keys())
        assert keys == sorted(keys)


def test_chat_example_canonical_form():
    line = encode(envelope(protocol.Chat(text="hi"), seq=3))
    assert line == b'{"payload":{"text":"hi"},"seq":3,"type":"chat","v":"miboard/1"}\n'


def test_newline_in_text_stays_single_line():
    env = envelope(protocol.Chat(text="line one\nline two"))
    line = encode(env)
    assert b"\n" not in line[:-1]
    assert decode(line).payload.text == "line one\nline two"


def test_decode_vote():
    env = decode(b'{"type":"vote","payload":{"strategy":"bridging"},"req":"a1"}')
    assert env.payload == protocol.Vote(strategy=BR)
    assert env.req == "a1"


def test_unknown_type_rejected():
    with pytest.raises(UnknownType):
        decode(b'{"type":"nope","payload":{}}')


def test_oversized_line_rejected():
    big = b'{"type":"chat","payload":{"text":"' + b"x" * (64 * 1024) + b'"}}'
    with pytest.raises(OversizedLine):
        decode(big)


def test_missing_required_field():
    with pytest.raises(MissingField):
        decode(b'{"type":"vote","payload":{}}')
    with pytest.raises(MissingField):
        decode(b'{"payload":{}}')


def test_bad_field_types():
    with pytest.raises(BadFieldType):
        decode(b'{"type":"vote","payload":{"strategy":7}}')
    with pytest.raises(BadFieldType):
        decode(b'{"type":"vote","payload":{"strategy":"guessing"}}')
    with pytest.raises(BadFieldType):
        decode(b'{"type":"chat","payload":{"text":"x"},"seq":"high"}')
    with pytest.raises(BadFieldType):
        decode(b'{"type":"chat","payload":"text"}')


def test_malformed_json():
    with pytest.raises(MalformedJson):
        decode(b"{not json")
    with pytest.raises(MalformedJson):
        decode(b"[1,2,3]")
    with pytest.raises(MalformedJson):
        decode(b"\xff\xfe\x00")


def test_unknown_payload_fields_ignored():
    env = decode(b'{"type":"vote","payload":{"strategy":"bridging","extra":"ok"},"future":1}')
    assert env.payload == protocol.Vote(strategy=BR)


def test_unencodable_payload_rejected():
    with pytest.raises(UnencodableField):
        envelope(object())
    with pytest.raises(UnencodableField):
        encode(Envelope(kind="chat", payload=protocol.Vote(strategy=BR)))


@settings(max_examples=300)
@given(st.binary(max_size=600))
def test_fuzz_arbitrary_bytes_raise_only_protocol_errors(blob):
    try:
        decode(blob)
    except ProtocolError:
        pass


@settings(max_examples=300)
@given(st.text(max_size=300))
def test_fuzz_arbitrary_text(text):
    try:
        decode(text)
    except ProtocolError:
        pass


@settings(max_examples=200)
@given(st.data())
def test_fuzz_mutated_valid_lines(data):
    env = data.draw(st.sampled_from(catalogue_samples()))
    line = bytearray(encode(env))
    n_flips = data.draw(st.integers(1, 6))
    for _ in range(n_flips):
        pos = data.draw(st.integers(0, len(line) - 1))
        line[pos] = data.draw(st.integers(0, 255))
    try:
        decode(bytes(line))
    except ProtocolError:
        pass


# --- redaction ----------------------------------------------------------------


def turn_assigned(reader="p1"):
    return ev.TurnAssigned(
        reader_id=reader,
        target_index=0,
        sentence="s",
        context=(),
        assigned_strategy=BR,
        stake=10,
    )


def test_redact_turn_assigned_for_guesser():
    event = turn_assigned()
    to_reader = redact_for("p1", event)
    to_guesser = redact_for("p2", event)
    assert to_reader.assigned_strategy is BR and to_reader.stake == 10
    assert to_guesser.assigned_strategy is None and to_guesser.stake is None
    # the rest of the payload is intact
    assert to_guesser.sentence == "s" and to_guesser.reader_id == "p1"


def test_redact_stake_and_swap_events():
    altered = ev.StakeAltered(player_id="p1", points=4, stake=20)
    assert redact_for("p1", altered).stake == 20
    assert redact_for("p3", altered).stake is None
    swapped = ev.StrategySwapped(player_id="p1", points=2, assigned_strategy=EL, stake=8)
    assert redact_for("p2", swapped).assigned_strategy is None
    assert redact_for("p1", swapped).assigned_strategy is EL


def test_redact_private_draws():
    played = ev.PowerCardPlayed(
        player_id="p1",
        kind=PowerCardKind.EXTRA_DRAW,
        target_id=None,
        points={},
        drawn=PowerCardKind.EXTRA_TURN,
    )
    assert redact_for("p1", played).drawn is PowerCardKind.EXTRA_TURN
    assert redact_for("p2", played).drawn is None
    moved = ev.MovementResolved(
        mover_id="p1", roll=3, event_card=None, positions={}, power_drawn=PowerCardKind.EXTRA_TURN
    )
    assert redact_for("p2", moved).power_drawn is None


def test_summary_passes_through_for_everyone():
    summary = ev.SummaryRevealed(
        assigned_strategy=BR,
        stake=10,
        votes={"p2": BR},
        majority_strategy=BR,
        reader_in_majority=True,
        unanimous=False,
        deltas={},
        points={},
    )
    for recipient in ("p1", "p2", "p3"):
        assert redact_for(recipient, summary) is summary


def test_redacted_events_still_encode():
    event = redact_for("p2", turn_assigned())
    line = encode(envelope(event, seq=1))
    decoded = decode(line)
    assert decoded.payload.assigned_strategy is None
    assert "bridging" not in line.decode()
