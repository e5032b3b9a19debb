"""Scripted players and the Monte Carlo balance simulator.

Policies decide votes (uniform / oracle-biased / stubborn / swayed),
self-explanations (a canned template per strategy), and spending (never,
or greedily playing any affordable card). ``simulate`` runs whole games
straight through the rules engine - no network - deriving one seed per
game from the master seed, and can write replayable session logs with
logical timestamps so reruns are byte-identical.

The oracle policy reads the assigned strategy out of the game state; that
is a simulator privilege, deliberately impossible over the wire where the
strategy is redacted until the summary.
"""

from __future__ import annotations

import asyncio
import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import protocol
from .core import events as ev
from .content import TextPack
from .core import engine
from .core.events import DiscussionStarted, SummaryRevealed
from .core.types import (
    STRATEGIES,
    GameConfig,
    GameState,
    Phase,
    PlayerState,
    PowerCardKind,
    Strategy,
)
from .errors import InvalidConfig
from .jsonutil import canonical_json
from .rng import Pcg32, derive_seed
from .server import dispatch
from .server.logs import SessionLogWriter

VOTE_POLICIES = ("uniform", "oracle", "stubborn", "swayed")
SPEND_POLICIES = ("never", "greedy")


@dataclass(frozen=True)
class BotPolicy:
    vote: str = "uniform"
    p_correct: float = 1.0  # oracle only
    spend: str = "never"

    def name(self) -> str:
        base = f"oracle:{self.p_correct}" if self.vote == "oracle" else self.vote
        return base if self.spend == "never" else f"{base}+{self.spend}"


def parse_policy(text: str) -> BotPolicy:
    """Parse "uniform", "oracle:0.9", "stubborn+greedy", etc."""
    spec = text.strip().lower()
    spend = "never"
    if "+" in spec:
        spec, spend = spec.split("+", 1)
    p_correct = 1.0
    if ":" in spec:
        spec, arg = spec.split(":", 1)
        try:
            p_correct = float(arg)
        except ValueError as exc:
            raise InvalidConfig(f"bad policy parameter {arg!r}") from exc
    if spec not in VOTE_POLICIES:
        raise InvalidConfig(f"unknown vote policy {spec!r}")
    if spend not in SPEND_POLICIES:
        raise InvalidConfig(f"unknown spend policy {spend!r}")
    if not 0.0 <= p_correct <= 1.0:
        raise InvalidConfig("oracle probability must be in [0, 1]")
    return BotPolicy(vote=spec, p_correct=p_correct, spend=spend)


def parse_policies(text: str, seats: int) -> list[BotPolicy]:
    """Comma-separated per-seat list; a single policy repeats for all seats."""
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) == 1:
        parts = parts * seats
    if len(parts) != seats:
        raise InvalidConfig(f"need 1 or {seats} policies, got {len(parts)}")
    return [parse_policy(p) for p in parts]


SE_TEMPLATES: dict[Strategy, str] = {
    Strategy.COMPREHENSION_MONITORING: (
        "I'm not sure I fully get this part yet, so let me slow down and check what it is actually saying."
    ),
    Strategy.PARAPHRASING: "So in my own words, this sentence is saying the same thing more simply.",
    Strategy.PREDICTION: "Based on this, I think the text is about to explain what happens next.",
    Strategy.ELABORATION: "This fits with something I already know from outside the text.",
    Strategy.BRIDGING: "This links back to what the earlier sentences told us about the same idea.",
}


def _uniform_strategy(rng: Pcg32) -> Strategy:
    return STRATEGIES[rng.randbound(len(STRATEGIES))]


def choose_vote(
    policy: BotPolicy,
    rng: Pcg32,
    round_no: int,
    assigned: Optional[Strategy],
    own_round1: Optional[Strategy],
    revealed_round1: Optional[dict[str, Strategy]],
) -> Strategy:
    """Pick a vote from what the bot can observe. ``assigned`` is only
    non-None for the oracle policy inside the simulator."""
    if policy.vote == "oracle" and assigned is not None:
        if rng.next_u32() / 2**32 < policy.p_correct:
            return assigned
        others = [s for s in STRATEGIES if s is not assigned]
        return others[rng.randbound(len(others))]
    if round_no == 2 and policy.vote == "stubborn" and own_round1 is not None:
        return own_round1
    if round_no == 2 and policy.vote == "swayed" and revealed_round1:
        counts = {s: 0 for s in STRATEGIES}
        for vote in revealed_round1.values():
            counts[vote] += 1
        best = max(counts.values())
        for s in STRATEGIES:
            if counts[s] == best:
                return s
    return _uniform_strategy(rng)


def greedy_card(
    state: GameState, mover: PlayerState
) -> Optional[protocol.PlayPowerCard]:
    """First affordable card in hand; freeze picks the next thawed seat."""
    for kind in mover.hand:
        if mover.points < state.config.power_card_costs[kind]:
            continue
        if kind is PowerCardKind.FREEZE_PLAYER:
            target = next(
                (
                    p.player_id
                    for p in state.players
                    if p.player_id != mover.player_id and not p.frozen
                ),
                None,
            )
            if target is None:
                continue
            return protocol.PlayPowerCard(kind=kind, target=target)
        return protocol.PlayPowerCard(kind=kind)
    return None


def bot_act(
    state: GameState,
    player_id: str,
    policy: BotPolicy,
    rng: Pcg32,
    plays_left: int = 0,
) -> Optional[protocol.Command]:
    """The next legal command for this bot given the current phase, or None
    when it is another player's move."""
    turn = state.turn
    if state.phase is Phase.READING:
        if turn is not None and turn.reader_id == player_id:
            return protocol.SubmitSE(text=SE_TEMPLATES[turn.assigned_strategy])
        return None
    if state.phase in (Phase.IDENTIFICATION, Phase.REVOTE):
        assert turn is not None
        if player_id == turn.reader_id:
            return None
        round_no = 1 if state.phase is Phase.IDENTIFICATION else 2
        votes = turn.round1_votes if round_no == 1 else (turn.round2_votes or {})
        if player_id in votes:
            return None
        strategy = choose_vote(
            policy,
            rng,
            round_no,
            assigned=turn.assigned_strategy if policy.vote == "oracle" else None,
            own_round1=turn.round1_votes.get(player_id),
            revealed_round1=dict(turn.round1_votes) if round_no == 2 else None,
        )
        return protocol.Vote(strategy=strategy)
    if state.phase is Phase.DISCUSSION:
        if player_id in state.ready:
            return None
        return protocol.Ready()
    if state.phase is Phase.MOVEMENT:
        mover = state.reader
        if mover.player_id != player_id:
            return None
        if policy.spend == "greedy" and plays_left > 0:
            card = greedy_card(state, mover)
            if card is not None:
                return card
        return protocol.Roll()
    return None


@dataclass
class SimReport:
    games: int
    unfinished: int
    total_turns: int
    mean_turns: float
    p50_turns: int
    p95_turns: int
    unanimity_rate: float
    majority_rate: float
    discussion_rate: float
    mean_final_points: list[float]
    winner_distribution: list[float]
    policies: list[str]
    seed: int

    def to_dict(self) -> dict:
        return {
            "games": self.games,
            "unfinished": self.unfinished,
            "total_turns": self.total_turns,
            "mean_turns": self.mean_turns,
            "p50_turns": self.p50_turns,
            "p95_turns": self.p95_turns,
            "unanimity_rate": self.unanimity_rate,
            "majority_rate": self.majority_rate,
            "discussion_rate": self.discussion_rate,
            "mean_final_points": self.mean_final_points,
            "winner_distribution": self.winner_distribution,
            "policies": self.policies,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict()) + "\n"


def percentile(values: list[int], q: float) -> int:
    """Nearest-rank percentile: the ceil(q*n)-th smallest value."""
    if not values:
        return 0
    ordered = sorted(values)
    rank = math.ceil(round(q * len(ordered), 9))
    return ordered[max(0, min(len(ordered), rank) - 1)]


@dataclass
class GameRow:
    index: int
    seed: int
    turns: int
    winner_seat: Optional[int]
    final_points: list[int]


def run_game(
    config: GameConfig,
    policies: Sequence[BotPolicy],
    pack: TextPack,
    game_seed: int,
    bot_seed: int,
    turn_cap: int,
    log_writer: Optional[SessionLogWriter] = None,
    lobby_id: str = "sim",
    recorder=None,
) -> tuple[GameState, dict]:
    """Play one full bot game through the engine; returns the final state
    and the per-game tally of summary outcomes."""
    roster = [(f"p{i + 1}", f"Bot {i + 1}") for i in range(len(policies))]
    by_player = {f"p{i + 1}": policy for i, policy in enumerate(policies)}
    state, _events = engine.new_game(config, pack, roster, game_seed)
    if log_writer is not None:
        log_writer.write_header(lobby_id, game_seed, config, pack, roster, started_at=0.0)
    bot_rng = Pcg32.seeded(bot_seed)
    stats = {"turns": 0, "unanimous": 0, "majority": 0, "discussion": 0}
    step = 0
    plays_left = 0
    order = [p.player_id for p in state.players]
    while state.phase is not Phase.FINISHED and state.turn_count < turn_cap:
        if state.phase is Phase.MOVEMENT and plays_left == 0:
            plays_left = len(state.reader.hand)
        command = None
        actor = None
        for pid in order:
            command = bot_act(state, pid, by_player[pid], bot_rng, plays_left)
            if command is not None:
                actor = pid
                break
        assert command is not None and actor is not None, f"no bot can act in {state.phase}"
        if isinstance(command, protocol.PlayPowerCard):
            plays_left -= 1
        elif isinstance(command, protocol.Roll):
            plays_left = 0
        events = dispatch.apply_command(state, actor, command)
        if log_writer is not None:
            log_writer.write_command(float(step), actor, command)
        if recorder is not None:
            recorder(state, actor, command, events)
        step += 1
        for event in events:
            if isinstance(event, SummaryRevealed):
                stats["turns"] += 1
                if event.unanimous:
                    stats["unanimous"] += 1
                if event.majority_strategy is not None:
                    stats["majority"] += 1
            elif isinstance(event, DiscussionStarted):
                stats["discussion"] += 1
    if log_writer is not None:
        log_writer.write_digest(float(step), state)
    return state, stats


def simulate(
    config: GameConfig,
    policies: Sequence[BotPolicy],
    pack: TextPack,
    n_games: int,
    seed: int,
    log_dir: Optional[os.PathLike] = None,
    rows_out: Optional[list[GameRow]] = None,
) -> SimReport:
    """Run ``n_games`` independent bot games and aggregate the report.

    Per-game seeds derive from the master seed via SplitMix64, so any game
    can be reproduced alone, and the whole batch is deterministic.
    """
    config.validate()
    if n_games < 1:
        raise InvalidConfig("n_games must be >= 1")
    if not (config.min_players <= len(policies) <= config.max_players):
        raise InvalidConfig(
            f"{len(policies)} seats outside {config.min_players}..{config.max_players}"
        )
    turn_cap = 10 * config.board_length
    seats = len(policies)
    turns_per_game: list[int] = []
    totals = {"turns": 0, "unanimous": 0, "majority": 0, "discussion": 0}
    points_sum = [0] * seats
    wins = [0] * seats
    unfinished = 0
    log_path = Path(log_dir) if log_dir is not None else None
    if log_path is not None:
        log_path.mkdir(parents=True, exist_ok=True)
    for i in range(n_games):
        game_seed = derive_seed(seed, 2 * i)
        bot_seed = derive_seed(seed, 2 * i + 1)
        writer = None
        if log_path is not None:
            writer = SessionLogWriter(open(log_path / f"game_{i:05d}.mblog", "wb"))
        try:
            state, stats = run_game(
                config,
                policies,
                pack,
                game_seed,
                bot_seed,
                turn_cap,
                log_writer=writer,
                lobby_id=f"sim-{seed}-{i}",
            )
        finally:
            if writer is not None:
                writer.close()
        turns_per_game.append(state.turn_count)
        for key in totals:
            totals[key] += stats[key]
        winner_seat = None
        if state.winner is None:
            unfinished += 1
        else:
            winner_seat = int(state.winner[1:]) - 1
            wins[winner_seat] += 1
        for j, player in enumerate(state.players):
            points_sum[j] += player.points
        if rows_out is not None:
            rows_out.append(
                GameRow(
                    index=i,
                    seed=game_seed,
                    turns=state.turn_count,
                    winner_seat=winner_seat,
                    final_points=[p.points for p in state.players],
                )
            )
    total_turns = totals["turns"]
    denom = max(1, total_turns)
    return SimReport(
        games=n_games,
        unfinished=unfinished,
        total_turns=total_turns,
        mean_turns=sum(turns_per_game) / n_games,
        p50_turns=percentile(turns_per_game, 0.50),
        p95_turns=percentile(turns_per_game, 0.95),
        unanimity_rate=totals["unanimous"] / denom,
        majority_rate=totals["majority"] / denom,
        discussion_rate=totals["discussion"] / denom,
        mean_final_points=[s / n_games for s in points_sum],
        winner_distribution=[w / n_games for w in wins],
        policies=[p.name() for p in policies],
        seed=seed,
    )


def write_csv(path: os.PathLike, rows: list[GameRow]) -> None:
    """Per-game rows for offline analysis."""
    seats = len(rows[0].final_points) if rows else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["game", "seed", "turns", "winner_seat"] + [f"points_p{i + 1}" for i in range(seats)]
        )
        for row in rows:
            writer.writerow(
                [row.index, row.seed, row.turns, "" if row.winner_seat is None else row.winner_seat]
                + row.final_points
            )


# --- networked bots (real protocol clients over TCP) -------------------------


class NetBot:
    """A scripted player speaking the wire protocol, used in integration
    tests. It sees exactly what a human client sees, so the oracle policy
    is off limits here: the assigned strategy is redacted until summary.

    Records every raw inbound line in ``transcript`` so tests can scan the
    bytes a real guesser received.
    """

    def __init__(
        self,
        host: str,
        port: int,
        name: str,
        policy: BotPolicy,
        vote_seed: int,
        lobby_id: Optional[str] = None,
        create_pack: Optional[str] = None,
        start_at_players: Optional[int] = None,
        config_overrides: Optional[dict] = None,
    ):
        if policy.vote == "oracle":
            raise InvalidConfig("oracle bots cannot attach over the wire")
        self.host = host
        self.port = port
        self.name = name
        self.policy = policy
        self.rng = Pcg32.seeded(vote_seed)
        self.lobby_id = lobby_id
        self.create_pack = create_pack
        self.start_at_players = start_at_players
        self.config_overrides = config_overrides or {}
        self.transcript: list[bytes] = []
        self.player_id: Optional[str] = None
        self.winner_id: Optional[str] = None
        self.errors: list[protocol.ErrorEvent] = []
        self._costs = GameConfig().power_card_costs
        self._assigned: Optional[Strategy] = None  # set only when we read
        self._own_round1: Optional[Strategy] = None
        self._revealed_round1: Optional[dict[str, Strategy]] = None
        self._hand: list[PowerCardKind] = []
        self._points = 0
        self._positions: dict[str, int] = {}
        self._frozen: set[str] = set()
        self._started = False
        self.lobby_ready = asyncio.Event()
        self.done = asyncio.Event()

    async def run(self) -> None:
        reader, writer = await asyncio.open_connection(self.host, self.port, limit=256 * 1024)
        self._writer = writer
        try:
            if self.create_pack is not None:
                self._send(protocol.Join(name=self.name))
                self._send(
                    protocol.CreateLobby(
                        config_overrides=self.config_overrides, pack=self.create_pack
                    )
                )
            else:
                assert self.lobby_id is not None
                self._send(protocol.Join(name=self.name, lobby=self.lobby_id))
            while not self.done.is_set():
                line = await reader.readline()
                if not line:
                    break
                self.transcript.append(line)
                self._on_event(protocol.decode(line))
        finally:
            writer.close()

    def _send(self, command: protocol.Command) -> None:
        self._writer.write(protocol.encode(protocol.envelope(command)))

    def _on_event(self, env: protocol.Envelope) -> None:
        payload = env.payload
        if isinstance(payload, protocol.LobbyState):
            self.lobby_id = payload.lobby_id
            self._costs = {
                PowerCardKind(k): c for k, c in payload.config["power_card_costs"].items()
            }
            self.lobby_ready.set()
            if (
                self.start_at_players is not None
                and not self._started
                and len(payload.players) >= self.start_at_players
            ):
                self._started = True
                self._send(protocol.StartGame())
        elif isinstance(payload, protocol.GameStarted):
            for p in payload.snapshot["players"]:
                self._positions[p["player_id"]] = p["token_position"]
                if p["display_name"] == self.name:
                    self.player_id = p["player_id"]
            self._hand = []
            self._points = 0
        elif isinstance(payload, ev.TurnAssigned):
            self._own_round1 = None
            self._revealed_round1 = None
            self._assigned = payload.assigned_strategy
            if payload.reader_id == self.player_id:
                assert self._assigned is not None
                self._send(protocol.SubmitSE(text=SE_TEMPLATES[self._assigned]))
        elif isinstance(payload, ev.SEPosted):
            if payload.reader_id != self.player_id:
                self._vote(round_no=1)
        elif isinstance(payload, ev.SummaryRevealed):
            self._revealed_round1 = dict(payload.votes)
            self._points = payload.points.get(self.player_id or "", self._points)
        elif isinstance(payload, ev.DiscussionStarted):
            self._send(protocol.Ready())
        elif isinstance(payload, ev.RevoteStarted):
            if not self._is_reader():
                self._vote(round_no=2)
        elif isinstance(payload, ev.FinalSummaryRevealed):
            self._points = payload.points.get(self.player_id or "", self._points)
        elif isinstance(payload, ev.MovementWindow):
            if payload.mover_id == self.player_id:
                self._movement_turn()
        elif isinstance(payload, ev.PowerCardPlayed):
            self._points = payload.points.get(self.player_id or "", self._points)
            if payload.player_id == self.player_id and payload.drawn is not None:
                self._hand.append(payload.drawn)
            if payload.target_id is not None:
                self._frozen.add(payload.target_id)
        elif isinstance(payload, ev.MovementResolved):
            self._positions.update(payload.positions)
            if payload.mover_id == self.player_id and payload.power_drawn is not None:
                self._hand.append(payload.power_drawn)
        elif isinstance(payload, ev.GameOver):
            self.winner_id = payload.winner_id
            self.done.set()
        elif isinstance(payload, protocol.ErrorEvent):
            self.errors.append(payload)

    def _is_reader(self) -> bool:
        return self._assigned is not None

    def _vote(self, round_no: int) -> None:
        strategy = choose_vote(
            self.policy,
            self.rng,
            round_no,
            assigned=None,
            own_round1=self._own_round1,
            revealed_round1=self._revealed_round1,
        )
        if round_no == 1:
            self._own_round1 = strategy
        self._send(protocol.Vote(strategy=strategy))

    def _movement_turn(self) -> None:
        if self.policy.spend == "greedy":
            # Play what we can afford from our mirrored hand; the server
            # re-checks everything, so a stale mirror only costs an error
            # event, never a wedged game.
            points = self._points
            hand = list(self._hand)
            for kind in hand:
                cost = self._costs[kind]
                if points < cost:
                    continue
                target = None
                if kind is PowerCardKind.FREEZE_PLAYER:
                    target = next(
                        (
                            pid
                            for pid in sorted(self._positions)
                            if pid != self.player_id and pid not in self._frozen
                        ),
                        None,
                    )
                    if target is None:
                        continue
                self._send(protocol.PlayPowerCard(kind=kind, target=target))
                self._hand.remove(kind)
                points -= cost
        self._send(protocol.Roll())


async def run_networked_game(
    host: str,
    port: int,
    n_players: int,
    policy: BotPolicy,
    seed: int,
    pack: str,
    config_overrides: Optional[dict] = None,
    timeout: float = 30.0,
) -> list[NetBot]:
    """Attach ``n_players`` protocol bots to a live server, play one full
    game, and return the bots with their recorded transcripts."""
    host_bot = NetBot(
        host,
        port,
        name="Bot 1",
        policy=policy,
        vote_seed=derive_seed(seed, 1),
        create_pack=pack,
        start_at_players=n_players,
        config_overrides=config_overrides,
    )
    bots = [host_bot]
    tasks = [asyncio.create_task(host_bot.run())]
    await asyncio.wait_for(host_bot.lobby_ready.wait(), timeout)
    for i in range(2, n_players + 1):
        bot = NetBot(
            host,
            port,
            name=f"Bot {i}",
            policy=policy,
            vote_seed=derive_seed(seed, i),
            lobby_id=host_bot.lobby_id,
        )
        bots.append(bot)
        tasks.append(asyncio.create_task(bot.run()))
    await asyncio.wait_for(
        asyncio.gather(*(bot.done.wait() for bot in bots)), timeout
    )
    for task in tasks:
        task.cancel()
    return bots
