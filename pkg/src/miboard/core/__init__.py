"""Pure, deterministic game rules: types, state machine, scoring, cards."""

from . import engine, events
from .types import (
    EventCard,
    EventCardKind,
    GameConfig,
    GameState,
    Phase,
    PlayerState,
    PowerCardKind,
    Strategy,
    TurnRecord,
    VoteOutcome,
)

__all__ = [
    "engine",
    "events",
    "EventCard",
    "EventCardKind",
    "GameConfig",
    "GameState",
    "Phase",
    "PlayerState",
    "PowerCardKind",
    "Strategy",
    "TurnRecord",
    "VoteOutcome",
]
