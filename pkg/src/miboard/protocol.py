"""Wire protocol: message catalogue, newline-delimited JSON codec, and
per-recipient redaction.

One envelope per line, UTF-8, canonical key order (sorted), 64 KiB cap::

    {"payload":{"text":"hi"},"req":"r1","type":"chat","v":"miboard/1"}

``decode`` is total over arbitrary bytes: anything malformed raises a
:class:`miboard.errors.ProtocolError` subclass, never anything else.
Unknown payload fields are ignored for forward compatibility. The same
codec serializes session-log lines, so logs stay greppable and replayable
with the wire tooling.

The catalogue is documented line by line in docs/protocol.md; the golden
examples there are asserted byte-for-byte by the test suite.
"""

from __future__ import annotations

import dataclasses
import json
import typing
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any, Optional, Union

from .core import events as ev
from .core.types import EventCard, GameState, PowerCardKind, Strategy
from .errors import (
    BadFieldType,
    MalformedJson,
    MissingField,
    OversizedLine,
    UnencodableField,
    UnknownType,
)

PROTOCOL_VERSION = "miboard/1"
MAX_LINE_BYTES = 64 * 1024


# --- client commands ------------------------------------------------------


@dataclass(frozen=True)
class Command:
    pass


@dataclass(frozen=True)
class Join(Command):
    """Register a display name; with ``lobby`` set, also join that lobby."""

    name: str
    lobby: Optional[str] = None


@dataclass(frozen=True)
class CreateLobby(Command):
    config_overrides: dict = field(default_factory=dict)
    pack: Optional[str] = None


@dataclass(frozen=True)
class StartGame(Command):
    pass


@dataclass(frozen=True)
class SubmitSE(Command):
    text: str


@dataclass(frozen=True)
class Vote(Command):
    strategy: Strategy


@dataclass(frozen=True)
class Chat(Command):
    text: str


@dataclass(frozen=True)
class PlayPowerCard(Command):
    kind: PowerCardKind
    target: Optional[str] = None


@dataclass(frozen=True)
class AlterStake(Command):
    pass


@dataclass(frozen=True)
class SwapStrategy(Command):
    pass


@dataclass(frozen=True)
class Roll(Command):
    pass


@dataclass(frozen=True)
class Ready(Command):
    pass


@dataclass(frozen=True)
class Rematch(Command):
    pass


@dataclass(frozen=True)
class Leave(Command):
    pass


# --- server-level events (game events live in miboard.core.events) ---------


@dataclass(frozen=True)
class LobbyState:
    lobby_id: str
    host_id: str
    players: list[dict]
    config: dict
    pack: Optional[str]
    state: str  # "waiting" | "in_game"


@dataclass(frozen=True)
class GameStarted:
    """Seedless public snapshot at game start."""

    snapshot: dict


@dataclass(frozen=True)
class ChatRelayed:
    sender_id: str
    sender_name: str
    text: str


@dataclass(frozen=True)
class RematchRecorded:
    count: int


@dataclass(frozen=True)
class PlayerConnection:
    player_id: str
    connected: bool


@dataclass(frozen=True)
class ErrorEvent:
    code: str
    message: str
    request_id: Optional[str] = None


# --- session-log records (same codec, one per line) ------------------------


@dataclass(frozen=True)
class LogHeader:
    protocol: str
    lobby_id: str
    seed: int
    config: dict
    pack: dict
    pack_digest: str
    roster: list[dict]  # [{"id": ..., "name": ...}] in seating order
    started_at: float


@dataclass(frozen=True)
class LogCommand:
    ts: float
    actor: str
    command: Command


@dataclass(frozen=True)
class LogTimer:
    ts: float
    kind: str  # vote_timeout | discussion_timeout | powercard_window_timeout | reader_timeout
    round: Optional[int] = None


@dataclass(frozen=True)
class LogConnection:
    ts: float
    player_id: str
    connected: bool


@dataclass(frozen=True)
class LogDigest:
    ts: float
    digest: str
    turn_count: int


COMMAND_TYPES: dict[str, type] = {
    "join": Join,
    "create_lobby": CreateLobby,
    "start_game": StartGame,
    "submit_se": SubmitSE,
    "vote": Vote,
    "chat": Chat,
    "play_power_card": PlayPowerCard,
    "alter_stake": AlterStake,
    "swap_strategy": SwapStrategy,
    "roll": Roll,
    "ready": Ready,
    "rematch": Rematch,
    "leave": Leave,
}

EVENT_TYPES: dict[str, type] = {
    "lobby_state": LobbyState,
    "game_started": GameStarted,
    "turn_assigned": ev.TurnAssigned,
    "stake_altered": ev.StakeAltered,
    "strategy_swapped": ev.StrategySwapped,
    "se_posted": ev.SEPosted,
    "vote_recorded": ev.VoteRecorded,
    "summary_revealed": ev.SummaryRevealed,
    "discussion_started": ev.DiscussionStarted,
    "revote_started": ev.RevoteStarted,
    "final_summary_revealed": ev.FinalSummaryRevealed,
    "movement_window": ev.MovementWindow,
    "power_card_played": ev.PowerCardPlayed,
    "movement_resolved": ev.MovementResolved,
    "turn_voided": ev.TurnVoided,
    "game_over": ev.GameOver,
    "chat_relayed": ChatRelayed,
    "rematch_recorded": RematchRecorded,
    "player_connection": PlayerConnection,
    "error": ErrorEvent,
}

LOG_TYPES: dict[str, type] = {
    "log_header": LogHeader,
    "log_command": LogCommand,
    "log_timer": LogTimer,
    "log_connection": LogConnection,
    "log_digest": LogDigest,
}

WIRE_TYPES: dict[str, type] = {**COMMAND_TYPES, **EVENT_TYPES, **LOG_TYPES}
KIND_OF: dict[type, str] = {cls: kind for kind, cls in WIRE_TYPES.items()}


@dataclass(frozen=True)
class Envelope:
    kind: str
    payload: Any
    seq: Optional[int] = None
    req: Optional[str] = None


def envelope(payload: Any, seq: Optional[int] = None, req: Optional[str] = None) -> Envelope:
    """Wrap a catalogue message, deriving the wire type from its class."""
    cls = type(payload)
    if cls not in KIND_OF:
        raise UnencodableField(f"{cls.__name__} is not a catalogue message")
    return Envelope(kind=KIND_OF[cls], payload=payload, seq=seq, req=req)


# --- encoding ---------------------------------------------------------------


def _encode_value(value: Any) -> Any:
    if value is None or isinstance(value, (str, bool, int)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, (Strategy, PowerCardKind)):
        return value.value
    if isinstance(value, EventCard):
        return value.to_dict()
    if is_dataclass(value) and not isinstance(value, type):
        cls = type(value)
        out: dict[str, Any] = {}
        if cls in KIND_OF and isinstance(value, Command):
            # Commands nested inside log records carry their own type tag.
            out["type"] = KIND_OF[cls]
        for f in fields(value):
            out[f.name] = _encode_value(getattr(value, f.name))
        return out
    if isinstance(value, dict):
        encoded = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise UnencodableField(f"non-string map key {k!r}")
            encoded[k] = _encode_value(v)
        return encoded
    if isinstance(value, (list, tuple)):
        return [_encode_value(v) for v in value]
    raise UnencodableField(f"cannot encode {type(value).__name__} value {value!r}")


def _encode_payload(payload: Any) -> dict[str, Any]:
    # Top-level payloads carry their type in the envelope, not inline.
    return {f.name: _encode_value(getattr(payload, f.name)) for f in fields(payload)}


def encode(env: Envelope) -> bytes:
    """One canonical UTF-8 JSON object, sorted keys, newline-terminated.
    Encoding the same envelope twice yields identical bytes."""
    if env.kind not in WIRE_TYPES or type(env.payload) is not WIRE_TYPES[env.kind]:
        raise UnencodableField(f"payload does not match type {env.kind!r}")
    obj: dict[str, Any] = {
        "type": env.kind,
        "payload": _encode_payload(env.payload),
        "v": PROTOCOL_VERSION,
    }
    if env.seq is not None:
        obj["seq"] = env.seq
    if env.req is not None:
        obj["req"] = env.req
    try:
        text = json.dumps(
            obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
        )
    except (TypeError, ValueError) as exc:
        raise UnencodableField(str(exc)) from exc
    return text.encode("utf-8") + b"\n"


# --- decoding ---------------------------------------------------------------


def _decode_value(value: Any, hint: Any, where: str) -> Any:
    origin = typing.get_origin(hint)
    if origin is Union:
        args = typing.get_args(hint)
        if type(None) in args:
            if value is None:
                return None
            inner = [a for a in args if a is not type(None)]
            return _decode_value(value, inner[0], where)
        raise BadFieldType(f"{where}: unsupported union")
    if hint is Any or hint is dict:
        if hint is dict and not isinstance(value, dict):
            raise BadFieldType(f"{where}: expected object")
        return value
    if hint is str:
        if not isinstance(value, str):
            raise BadFieldType(f"{where}: expected string")
        return value
    if hint is bool:
        if not isinstance(value, bool):
            raise BadFieldType(f"{where}: expected boolean")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise BadFieldType(f"{where}: expected integer")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise BadFieldType(f"{where}: expected number")
        return float(value)
    if hint is Strategy or hint is PowerCardKind:
        if not isinstance(value, str):
            raise BadFieldType(f"{where}: expected strategy/card name")
        try:
            return hint(value)
        except ValueError as exc:
            raise BadFieldType(f"{where}: {exc}") from exc
    if hint is EventCard:
        if not isinstance(value, dict):
            raise BadFieldType(f"{where}: expected event card object")
        try:
            return EventCard.from_dict(value)
        except (KeyError, TypeError, ValueError) as exc:
            raise BadFieldType(f"{where}: bad event card: {exc}") from exc
    if hint is Command:
        return _decode_nested_command(value, where)
    if origin in (list, tuple):
        if not isinstance(value, list):
            raise BadFieldType(f"{where}: expected array")
        args = typing.get_args(hint)
        item_hint = args[0] if args else Any
        items = [_decode_value(v, item_hint, f"{where}[{i}]") for i, v in enumerate(value)]
        return tuple(items) if origin is tuple else items
    if origin is dict:
        if not isinstance(value, dict):
            raise BadFieldType(f"{where}: expected object")
        key_hint, val_hint = typing.get_args(hint) or (str, Any)
        if key_hint is not str:
            raise BadFieldType(f"{where}: unsupported map key type")
        return {k: _decode_value(v, val_hint, f"{where}.{k}") for k, v in value.items()}
    raise BadFieldType(f"{where}: unsupported field type {hint!r}")


def _build_payload(cls: type, payload: Any, where: str) -> Any:
    if not isinstance(payload, dict):
        raise BadFieldType(f"{where}: payload must be an object")
    hints = typing.get_type_hints(cls)
    kwargs: dict[str, Any] = {}
    for f in fields(cls):
        if f.name in payload:
            kwargs[f.name] = _decode_value(payload[f.name], hints[f.name], f"{where}.{f.name}")
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise MissingField(f"{where}: missing required field {f.name!r}")
    return cls(**kwargs)


def _decode_nested_command(value: Any, where: str) -> Command:
    if not isinstance(value, dict):
        raise BadFieldType(f"{where}: expected command object")
    kind = value.get("type")
    if not isinstance(kind, str):
        raise MissingField(f"{where}: missing command type")
    cls = COMMAND_TYPES.get(kind)
    if cls is None:
        raise UnknownType(f"{where}: unknown command type {kind!r}")
    return _build_payload(cls, {k: v for k, v in value.items() if k != "type"}, where)


def decode(line: Union[bytes, str]) -> Envelope:
    """Parse one wire line into a typed envelope.

    Raises OversizedLine, MalformedJson, UnknownType, MissingField, or
    BadFieldType; nothing else, whatever the input bytes.
    """
    raw = line if isinstance(line, bytes) else line.encode("utf-8")
    if len(raw) > MAX_LINE_BYTES:
        raise OversizedLine(f"line of {len(raw)} bytes exceeds {MAX_LINE_BYTES}")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedJson(f"not UTF-8: {exc}") from exc
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, RecursionError, ValueError) as exc:
        raise MalformedJson(str(exc)) from exc
    if not isinstance(obj, dict):
        raise MalformedJson("envelope must be a JSON object")
    kind = obj.get("type")
    if kind is None:
        raise MissingField("missing envelope type")
    if not isinstance(kind, str):
        raise BadFieldType("envelope type must be a string")
    cls = WIRE_TYPES.get(kind)
    if cls is None:
        raise UnknownType(f"unknown message type {kind!r}")
    seq = obj.get("seq")
    if seq is not None and (isinstance(seq, bool) or not isinstance(seq, int)):
        raise BadFieldType("seq must be an integer")
    req = obj.get("req")
    if req is not None and not isinstance(req, str):
        raise BadFieldType("req must be a string")
    payload = _build_payload(cls, obj.get("payload", {}), kind)
    return Envelope(kind=kind, payload=payload, seq=seq, req=req)


# --- redaction ---------------------------------------------------------------


def redact_for(recipient_id: str, event: Any, state: Optional[GameState] = None) -> Any:
    """Strip fields a recipient must not see yet.

    Until the summary reveals it, only the reader knows the assigned
    strategy (and the stake, which the point table would give away), so
    turn_assigned, stake_altered, and strategy_swapped are stripped for
    everyone else. Privately drawn power cards stay with their owner.
    Every other event passes through unchanged.
    """
    if isinstance(event, ev.TurnAssigned) and recipient_id != event.reader_id:
        return dataclasses.replace(event, assigned_strategy=None, stake=None)
    if isinstance(event, ev.StakeAltered) and recipient_id != event.player_id:
        return dataclasses.replace(event, stake=None)
    if isinstance(event, ev.StrategySwapped) and recipient_id != event.player_id:
        return dataclasses.replace(event, assigned_strategy=None, stake=None)
    if isinstance(event, ev.PowerCardPlayed) and recipient_id != event.player_id:
        return dataclasses.replace(event, drawn=None)
    if isinstance(event, ev.MovementResolved) and recipient_id != event.mover_id:
        return dataclasses.replace(event, power_drawn=None)
    return event


def public_snapshot(state: GameState) -> dict:
    """Seed-free view of a game: what every client may know at start."""
    return {
        "board_length": state.config.board_length,
        "phase": state.phase.value,
        "reader_id": state.reader.player_id,
        "pack_title": state.pack.title,
        "players": [
            {
                "player_id": p.player_id,
                "display_name": p.display_name,
                "points": p.points,
                "token_position": p.token_position,
                "hand_count": len(p.hand),
                "frozen": p.frozen,
                "connected": p.connected,
            }
            for p in state.players
        ],
    }
