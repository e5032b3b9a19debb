"""Domain types for the rules engine: strategies, cards, config, and state.

Everything here is plain data. All types serialize to JSON-compatible dicts
with stable field names; ``GameState.digest()`` hashes the canonical form
and is the equality check used by replay verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..errors import InvalidConfig
from ..jsonutil import canonical_json, sha256_hex
from ..rng import Pcg32


class Strategy(Enum):
    """The five reading strategies guessers must identify."""

    COMPREHENSION_MONITORING = "comprehension_monitoring"
    PARAPHRASING = "paraphrasing"
    PREDICTION = "prediction"
    ELABORATION = "elaboration"
    BRIDGING = "bridging"


STRATEGIES: tuple[Strategy, ...] = tuple(Strategy)


class PowerCardKind(Enum):
    """Spendable cards held in hand; freeze_player requires a target."""

    EXTRA_TURN = "extra_turn"
    FREEZE_PLAYER = "freeze_player"
    EXTRA_DRAW = "extra_draw"


class EventCardKind(Enum):
    MOVE_FORWARD = "move_forward"
    MOVE_BACKWARD = "move_backward"
    DRAW_POWER = "draw_power"


@dataclass(frozen=True)
class EventCard:
    """Card drawn automatically after each die move. ``n`` is the number of
    cells for move cards and 0 for draw_power."""

    kind: EventCardKind
    n: int = 0

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n": self.n}

    @classmethod
    def from_dict(cls, d: dict) -> "EventCard":
        return cls(kind=EventCardKind(d["kind"]), n=int(d.get("n", 0)))


class Phase(Enum):
    LOBBY = "lobby"
    READING = "reading"
    IDENTIFICATION = "identification"
    SUMMARY = "summary"
    DISCUSSION = "discussion"
    REVOTE = "revote"
    FINAL_SUMMARY = "final_summary"
    MOVEMENT = "movement"
    FINISHED = "finished"


# Transitions the engine is allowed to make; enforced by a debug assertion
# in the reducer and asserted over logs by the test suite.
PHASE_EDGES: frozenset[tuple[Phase, Phase]] = frozenset(
    {
        (Phase.LOBBY, Phase.READING),
        (Phase.READING, Phase.IDENTIFICATION),
        (Phase.IDENTIFICATION, Phase.SUMMARY),
        (Phase.SUMMARY, Phase.MOVEMENT),
        (Phase.SUMMARY, Phase.DISCUSSION),
        (Phase.DISCUSSION, Phase.REVOTE),
        (Phase.REVOTE, Phase.FINAL_SUMMARY),
        (Phase.FINAL_SUMMARY, Phase.MOVEMENT),
        (Phase.MOVEMENT, Phase.READING),
        (Phase.MOVEMENT, Phase.FINISHED),
        (Phase.FINISHED, Phase.LOBBY),
        # A voided turn (reader lost mid-reading) skips movement entirely.
        (Phase.READING, Phase.READING),
    }
)


def default_event_deck() -> list[EventCard]:
    """Forward-biased default: 3 of each forward step, 2 of each backward
    step, 6 power draws (21 cards, net +6 cells per pass)."""
    deck: list[EventCard] = []
    for n in (1, 2, 3):
        deck.extend([EventCard(EventCardKind.MOVE_FORWARD, n)] * 3)
    for n in (1, 2, 3):
        deck.extend([EventCard(EventCardKind.MOVE_BACKWARD, n)] * 2)
    deck.extend([EventCard(EventCardKind.DRAW_POWER)] * 6)
    return deck


def default_power_deck() -> list[PowerCardKind]:
    deck: list[PowerCardKind] = []
    for kind in PowerCardKind:
        deck.extend([kind] * 8)
    return deck


def default_strategy_points() -> dict[Strategy, int]:
    # Harder strategies stake more.
    return {
        Strategy.PARAPHRASING: 4,
        Strategy.PREDICTION: 6,
        Strategy.COMPREHENSION_MONITORING: 8,
        Strategy.ELABORATION: 8,
        Strategy.BRIDGING: 10,
    }


def default_power_card_costs() -> dict[PowerCardKind, int]:
    return {
        PowerCardKind.EXTRA_DRAW: 3,
        PowerCardKind.FREEZE_PLAYER: 5,
        PowerCardKind.EXTRA_TURN: 6,
    }


@dataclass
class GameConfig:
    """Every tunable rule parameter. Defaults are playable out of the box;
    ``validate()`` enforces the cross-field invariants."""

    min_players: int = 2
    max_players: int = 6
    board_length: int = 40
    die_sides: int = 6
    strategy_points: dict[Strategy, int] = field(default_factory=default_strategy_points)
    agreement_bonus: int = 5
    minority_guesser_points_divisor: int = 4
    persuasion_points: int = 2
    power_card_costs: dict[PowerCardKind, int] = field(default_factory=default_power_card_costs)
    stake_alter_cost: int = 3
    stake_alter_multiplier: int = 2
    strategy_swap_cost: int = 4
    hand_limit: int = 3
    vote_timeout: float = 45.0
    discussion_timeout: float = 90.0
    powercard_window_timeout: float = 20.0
    reader_timeout: float = 60.0
    event_deck_spec: list[EventCard] = field(default_factory=default_event_deck)
    power_deck_spec: list[PowerCardKind] = field(default_factory=default_power_deck)
    random_strategy_assignment: bool = False

    def validate(self) -> None:
        if self.board_length < 2:
            raise InvalidConfig(f"board_length must be >= 2, got {self.board_length}")
        if self.die_sides < 2:
            raise InvalidConfig(f"die_sides must be >= 2, got {self.die_sides}")
        if not (2 <= self.min_players <= self.max_players):
            raise InvalidConfig(
                f"need 2 <= min_players <= max_players, got {self.min_players}..{self.max_players}"
            )
        for strategy in Strategy:
            if strategy not in self.strategy_points:
                raise InvalidConfig(f"strategy_points missing {strategy.value}")
        for kind in PowerCardKind:
            if kind not in self.power_card_costs:
                raise InvalidConfig(f"power_card_costs missing {kind.value}")
        points = list(self.strategy_points.values()) + list(self.power_card_costs.values())
        points += [
            self.agreement_bonus,
            self.persuasion_points,
            self.stake_alter_cost,
            self.strategy_swap_cost,
        ]
        if any(p < 0 for p in points):
            raise InvalidConfig("point values must be non-negative")
        # Divisor 4+ keeps floor(stake/divisor) strictly below
        # floor(stake/2) for every stake >= 2; divisor 3 ties at stake 3.
        if self.minority_guesser_points_divisor < 4:
            raise InvalidConfig("minority_guesser_points_divisor must be >= 4")
        if self.stake_alter_multiplier < 1:
            raise InvalidConfig("stake_alter_multiplier must be >= 1")
        if self.hand_limit < 0:
            raise InvalidConfig("hand_limit must be >= 0")
        if not self.event_deck_spec or not self.power_deck_spec:
            raise InvalidConfig("deck specs must be non-empty")
        for card in self.event_deck_spec:
            if card.kind is not EventCardKind.DRAW_POWER and card.n < 1:
                raise InvalidConfig("move cards must have n >= 1")
        for timeout in (
            self.vote_timeout,
            self.discussion_timeout,
            self.powercard_window_timeout,
            self.reader_timeout,
        ):
            if timeout <= 0:
                raise InvalidConfig("timeouts must be positive")

    def to_dict(self) -> dict:
        return {
            "min_players": self.min_players,
            "max_players": self.max_players,
            "board_length": self.board_length,
            "die_sides": self.die_sides,
            "strategy_points": {s.value: p for s, p in self.strategy_points.items()},
            "agreement_bonus": self.agreement_bonus,
            "minority_guesser_points_divisor": self.minority_guesser_points_divisor,
            "persuasion_points": self.persuasion_points,
            "power_card_costs": {k.value: c for k, c in self.power_card_costs.items()},
            "stake_alter_cost": self.stake_alter_cost,
            "stake_alter_multiplier": self.stake_alter_multiplier,
            "strategy_swap_cost": self.strategy_swap_cost,
            "hand_limit": self.hand_limit,
            "vote_timeout": self.vote_timeout,
            "discussion_timeout": self.discussion_timeout,
            "powercard_window_timeout": self.powercard_window_timeout,
            "reader_timeout": self.reader_timeout,
            "event_deck_spec": [c.to_dict() for c in self.event_deck_spec],
            "power_deck_spec": [k.value for k in self.power_deck_spec],
            "random_strategy_assignment": self.random_strategy_assignment,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GameConfig":
        """Build from a JSON document; unknown keys rejected, missing keys
        fall back to defaults. Raises InvalidConfig on any malformed field."""
        base = cls()
        known = set(base.to_dict().keys())
        unknown = set(d.keys()) - known
        if unknown:
            raise InvalidConfig(f"unknown config fields: {sorted(unknown)}")
        try:
            merged = base.to_dict() | dict(d)
            cfg = cls(
                min_players=int(merged["min_players"]),
                max_players=int(merged["max_players"]),
                board_length=int(merged["board_length"]),
                die_sides=int(merged["die_sides"]),
                strategy_points={
                    Strategy(name): int(p) for name, p in merged["strategy_points"].items()
                },
                agreement_bonus=int(merged["agreement_bonus"]),
                minority_guesser_points_divisor=int(merged["minority_guesser_points_divisor"]),
                persuasion_points=int(merged["persuasion_points"]),
                power_card_costs={
                    PowerCardKind(name): int(c)
                    for name, c in merged["power_card_costs"].items()
                },
                stake_alter_cost=int(merged["stake_alter_cost"]),
                stake_alter_multiplier=int(merged["stake_alter_multiplier"]),
                strategy_swap_cost=int(merged["strategy_swap_cost"]),
                hand_limit=int(merged["hand_limit"]),
                vote_timeout=float(merged["vote_timeout"]),
                discussion_timeout=float(merged["discussion_timeout"]),
                powercard_window_timeout=float(merged["powercard_window_timeout"]),
                reader_timeout=float(merged["reader_timeout"]),
                event_deck_spec=[
                    c if isinstance(c, EventCard) else EventCard.from_dict(c)
                    for c in merged["event_deck_spec"]
                ],
                power_deck_spec=[
                    k if isinstance(k, PowerCardKind) else PowerCardKind(k)
                    for k in merged["power_deck_spec"]
                ],
                random_strategy_assignment=bool(merged["random_strategy_assignment"]),
            )
        except InvalidConfig:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidConfig(f"malformed config: {exc}") from exc
        cfg.validate()
        return cfg


@dataclass
class PlayerState:
    player_id: str
    display_name: str
    token_position: int = 0
    points: int = 0
    hand: list[PowerCardKind] = field(default_factory=list)
    frozen: bool = False
    connected: bool = True

    def to_dict(self) -> dict:
        return {
            "player_id": self.player_id,
            "display_name": self.display_name,
            "token_position": self.token_position,
            "points": self.points,
            "hand": [k.value for k in self.hand],
            "frozen": self.frozen,
            "connected": self.connected,
        }


@dataclass
class VoteOutcome:
    """Result of one tally: which strategy (if any) carried the room."""

    majority_strategy: Optional[Strategy]
    reader_in_majority: bool
    unanimous: bool
    deltas: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "majority_strategy": self.majority_strategy.value if self.majority_strategy else None,
            "reader_in_majority": self.reader_in_majority,
            "unanimous": self.unanimous,
            "deltas": dict(sorted(self.deltas.items())),
        }


@dataclass
class TurnRecord:
    """Everything about one reader turn, from assignment to vote outcome."""

    reader_id: str
    target_index: int
    assigned_strategy: Strategy
    stake: int
    stake_altered: bool = False
    strategy_swapped: bool = False
    self_explanation: Optional[str] = None
    round1_votes: dict[str, Strategy] = field(default_factory=dict)
    round2_votes: Optional[dict[str, Strategy]] = None
    outcome: Optional[VoteOutcome] = None

    def to_dict(self) -> dict:
        return {
            "reader_id": self.reader_id,
            "target_index": self.target_index,
            "assigned_strategy": self.assigned_strategy.value,
            "stake": self.stake,
            "stake_altered": self.stake_altered,
            "strategy_swapped": self.strategy_swapped,
            "self_explanation": self.self_explanation,
            "round1_votes": {p: s.value for p, s in sorted(self.round1_votes.items())},
            "round2_votes": (
                {p: s.value for p, s in sorted(self.round2_votes.items())}
                if self.round2_votes is not None
                else None
            ),
            "outcome": self.outcome.to_dict() if self.outcome else None,
        }


@dataclass
class GameState:
    """Authoritative per-session state. Mutated in place by engine ops; the
    caller must apply actions in a single total order per game."""

    config: GameConfig
    pack: "TextPack"  # read-only after load; see miboard.content
    players: list[PlayerState]
    rng: Pcg32
    reader_index: int = 0
    phase: Phase = Phase.READING
    turn: Optional[TurnRecord] = None
    target_cursor: int = 0
    event_deck: list[EventCard] = field(default_factory=list)
    event_discard: list[EventCard] = field(default_factory=list)
    power_deck: list[PowerCardKind] = field(default_factory=list)
    power_discard: list[PowerCardKind] = field(default_factory=list)
    extra_turn_pending: bool = False
    winner: Optional[str] = None
    ready: set[str] = field(default_factory=set)
    turn_count: int = 0

    @property
    def reader(self) -> PlayerState:
        return self.players[self.reader_index]

    def player(self, player_id: str) -> Optional[PlayerState]:
        for p in self.players:
            if p.player_id == player_id:
                return p
        return None

    def guesser_ids(self) -> list[str]:
        return [p.player_id for i, p in enumerate(self.players) if i != self.reader_index]

    def to_dict(self) -> dict:
        """Canonical serialization; the basis for digests and replay
        equality. The static pack is represented by its digest."""
        return {
            "config": self.config.to_dict(),
            "pack_digest": self.pack.digest(),
            "players": [p.to_dict() for p in self.players],
            "reader_index": self.reader_index,
            "phase": self.phase.value,
            "turn": self.turn.to_dict() if self.turn else None,
            "target_cursor": self.target_cursor,
            "event_deck": [c.to_dict() for c in self.event_deck],
            "event_discard": [c.to_dict() for c in self.event_discard],
            "power_deck": [k.value for k in self.power_deck],
            "power_discard": [k.value for k in self.power_discard],
            "rng": {"state": self.rng.state, "inc": self.rng.inc},
            "extra_turn_pending": self.extra_turn_pending,
            "winner": self.winner,
            "ready": sorted(self.ready),
            "turn_count": self.turn_count,
        }

    def digest(self) -> str:
        return sha256_hex(canonical_json(self.to_dict()))
