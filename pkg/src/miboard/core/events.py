"""Events emitted by the rules engine.

Each engine operation returns the events describing what just happened;
the server wraps them in wire envelopes (after per-recipient redaction)
and the simulator feeds them to bot observations. Fields that must be
hidden from guessers until the summary (assigned strategy, stake, drawn
power cards) are plain fields here; hiding is the protocol layer's job.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .types import EventCard, PowerCardKind, Strategy


@dataclass(frozen=True)
class GameEvent:
    pass


@dataclass(frozen=True)
class TurnAssigned(GameEvent):
    # assigned_strategy and stake are None in copies redacted for guessers.
    reader_id: str
    target_index: int
    sentence: str
    context: tuple[str, ...]
    assigned_strategy: Optional[Strategy]
    stake: Optional[int]


@dataclass(frozen=True)
class StakeAltered(GameEvent):
    player_id: str
    points: int  # reader's balance after paying the cost
    stake: Optional[int]


@dataclass(frozen=True)
class StrategySwapped(GameEvent):
    player_id: str
    points: int
    assigned_strategy: Optional[Strategy]
    stake: Optional[int]


@dataclass(frozen=True)
class SEPosted(GameEvent):
    reader_id: str
    text: str


@dataclass(frozen=True)
class VoteRecorded(GameEvent):
    round: int
    voter_count: int


@dataclass(frozen=True)
class SummaryRevealed(GameEvent):
    assigned_strategy: Strategy
    stake: int
    votes: dict[str, Strategy]
    majority_strategy: Optional[Strategy]
    reader_in_majority: bool
    unanimous: bool
    deltas: dict[str, int]
    points: dict[str, int]


@dataclass(frozen=True)
class DiscussionStarted(GameEvent):
    pass


@dataclass(frozen=True)
class RevoteStarted(GameEvent):
    pass


@dataclass(frozen=True)
class FinalSummaryRevealed(GameEvent):
    votes: dict[str, Strategy]
    persuasion_deltas: dict[str, int]
    points: dict[str, int]


@dataclass(frozen=True)
class MovementWindow(GameEvent):
    mover_id: str


@dataclass(frozen=True)
class PowerCardPlayed(GameEvent):
    player_id: str
    kind: PowerCardKind
    target_id: Optional[str]
    points: dict[str, int]
    # Card drawn by extra_draw; private to the player who drew it.
    drawn: Optional[PowerCardKind] = None


@dataclass(frozen=True)
class MovementResolved(GameEvent):
    mover_id: str
    roll: int
    event_card: Optional[EventCard]
    positions: dict[str, int]
    # Power card drawn via a draw_power event card; private to the mover.
    power_drawn: Optional[PowerCardKind] = None


@dataclass(frozen=True)
class TurnVoided(GameEvent):
    reader_id: str


@dataclass(frozen=True)
class GameOver(GameEvent):
    winner_id: str
    points: dict[str, int] = field(default_factory=dict)
    positions: dict[str, int] = field(default_factory=dict)
