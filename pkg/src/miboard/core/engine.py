"""Rules engine: every state-changing game operation.

Operations validate all preconditions before mutating anything, so a
raised ``GameError`` always leaves the state untouched. Each operation
returns the list of :class:`GameEvent` describing what happened; callers
(server session, simulator) broadcast or observe those events.

All randomness comes from ``state.rng``; applying the same action sequence
to a state built from the same seed/config/pack/roster reproduces every
intermediate state bit for bit.
"""

from __future__ import annotations

from collections import Counter
from typing import Mapping, Optional, Sequence

from .. import content
from ..errors import (
    AlreadyAltered,
    ContentError,
    AlreadySwapped,
    AlreadyVoted,
    CardNotHeld,
    DuplicatePlayerId,
    EmptyExplanation,
    InsufficientPoints,
    InvalidPack,
    InvalidTarget,
    NotCurrentPlayer,
    NotReader,
    ReaderCannotVote,
    RosterSizeOutOfRange,
    UnknownPlayer,
    VoterSetMismatch,
    WrongPhase,
)
from ..rng import Pcg32
from .events import (
    DiscussionStarted,
    FinalSummaryRevealed,
    GameEvent,
    GameOver,
    MovementResolved,
    MovementWindow,
    PowerCardPlayed,
    RevoteStarted,
    SEPosted,
    StakeAltered,
    StrategySwapped,
    SummaryRevealed,
    TurnAssigned,
    TurnVoided,
    VoteRecorded,
)
from .types import (
    STRATEGIES,
    EventCard,
    EventCardKind,
    GameConfig,
    GameState,
    PHASE_EDGES,
    Phase,
    PlayerState,
    PowerCardKind,
    Strategy,
    TurnRecord,
    VoteOutcome,
)


def _transition(state: GameState, new_phase: Phase) -> None:
    edge = (state.phase, new_phase)
    if edge not in PHASE_EDGES:
        raise AssertionError(f"illegal phase transition {edge[0].value} -> {edge[1].value}")
    state.phase = new_phase


def _points(state: GameState) -> dict[str, int]:
    return {p.player_id: p.points for p in state.players}


def _positions(state: GameState) -> dict[str, int]:
    return {p.player_id: p.token_position for p in state.players}


def new_game(
    config: GameConfig,
    pack: content.TextPack,
    roster: Sequence[tuple[str, str]],
    seed: int,
) -> tuple[GameState, list[GameEvent]]:
    """Start a game: seed the RNG, shuffle both decks (event deck first),
    seat the roster in order, and assign the first turn.

    ``roster`` is an ordered sequence of (player_id, display_name).
    """
    config.validate()
    try:
        content.validate_pack(pack)
    except ContentError as exc:
        raise InvalidPack(str(exc)) from exc
    if not (config.min_players <= len(roster) <= config.max_players):
        raise RosterSizeOutOfRange(
            f"roster size {len(roster)} outside {config.min_players}..{config.max_players}"
        )
    ids = [player_id for player_id, _name in roster]
    if len(set(ids)) != len(ids):
        raise DuplicatePlayerId("roster ids must be unique")

    rng = Pcg32.seeded(seed)
    event_deck = list(config.event_deck_spec)
    rng.shuffle(event_deck)
    power_deck = list(config.power_deck_spec)
    rng.shuffle(power_deck)

    state = GameState(
        config=config,
        pack=pack,
        players=[PlayerState(player_id=pid, display_name=name) for pid, name in roster],
        rng=rng,
        reader_index=0,
        phase=Phase.READING,
        event_deck=event_deck,
        power_deck=power_deck,
    )
    return state, begin_reading(state)


def begin_reading(state: GameState) -> list[GameEvent]:
    """Assign the next target to the current reader and open the turn.

    Internal transition: runs from new_game, end_turn, and abandon_turn.
    The target cursor wraps to the first target once the pack is used up.
    """
    assert state.phase is Phase.READING and state.turn is None
    target_index = state.target_cursor if state.target_cursor < len(state.pack.targets) else 0
    state.target_cursor = target_index + 1
    view = content.target_view(state.pack, target_index)
    strategy = view.assigned_strategy
    if state.config.random_strategy_assignment:
        strategy = STRATEGIES[state.rng.randbound(len(STRATEGIES))]
    reader = state.reader
    state.turn = TurnRecord(
        reader_id=reader.player_id,
        target_index=target_index,
        assigned_strategy=strategy,
        stake=state.config.strategy_points[strategy],
    )
    return [
        TurnAssigned(
            reader_id=reader.player_id,
            target_index=target_index,
            sentence=view.sentence,
            context=view.context,
            assigned_strategy=strategy,
            stake=state.turn.stake,
        )
    ]


def alter_stake(state: GameState, player_id: str) -> list[GameEvent]:
    """Reader pays stake_alter_cost to multiply this turn's stake. Once per
    turn."""
    if state.phase is not Phase.READING:
        raise WrongPhase(f"cannot alter stake during {state.phase.value}")
    reader = state.reader
    if player_id != reader.player_id:
        raise NotReader(f"{player_id} is not the current reader")
    turn = state.turn
    assert turn is not None
    if turn.stake_altered:
        raise AlreadyAltered("stake already altered this turn")
    cost = state.config.stake_alter_cost
    if reader.points < cost:
        raise InsufficientPoints(f"need {cost} points, have {reader.points}")
    reader.points -= cost
    turn.stake *= state.config.stake_alter_multiplier
    turn.stake_altered = True
    return [StakeAltered(player_id=player_id, points=reader.points, stake=turn.stake)]


def swap_strategy(state: GameState, player_id: str) -> list[GameEvent]:
    """Reader pays strategy_swap_cost to replace the assigned strategy with
    a uniform draw over the other four. The stake resets to the new
    strategy's base value, keeping the multiplier if already altered."""
    if state.phase is not Phase.READING:
        raise WrongPhase(f"cannot swap strategy during {state.phase.value}")
    reader = state.reader
    if player_id != reader.player_id:
        raise NotReader(f"{player_id} is not the current reader")
    turn = state.turn
    assert turn is not None
    if turn.strategy_swapped:
        raise AlreadySwapped("strategy already swapped this turn")
    cost = state.config.strategy_swap_cost
    if reader.points < cost:
        raise InsufficientPoints(f"need {cost} points, have {reader.points}")
    reader.points -= cost
    others = [s for s in STRATEGIES if s is not turn.assigned_strategy]
    turn.assigned_strategy = others[state.rng.randbound(len(others))]
    turn.stake = state.config.strategy_points[turn.assigned_strategy]
    if turn.stake_altered:
        turn.stake *= state.config.stake_alter_multiplier
    turn.strategy_swapped = True
    return [
        StrategySwapped(
            player_id=player_id,
            points=reader.points,
            assigned_strategy=turn.assigned_strategy,
            stake=turn.stake,
        )
    ]


def submit_self_explanation(state: GameState, player_id: str, text: str) -> list[GameEvent]:
    """Reader posts the self-explanation; everyone moves to identification."""
    if state.phase is not Phase.READING:
        raise WrongPhase(f"cannot submit during {state.phase.value}")
    reader = state.reader
    if player_id != reader.player_id:
        raise NotReader(f"{player_id} is not the current reader")
    if not text.strip():
        raise EmptyExplanation("self-explanation must contain non-whitespace text")
    turn = state.turn
    assert turn is not None
    turn.self_explanation = text
    _transition(state, Phase.IDENTIFICATION)
    return [SEPosted(reader_id=player_id, text=text)]


def tally_votes(
    guesser_votes: Mapping[str, Strategy],
    assigned: Strategy,
    n_players: int,
) -> VoteOutcome:
    """Count guesser votes plus the reader's implicit vote for the assigned
    strategy. The majority is the unique strategy with at least
    ceil(n_players / 2) votes; a tie or no strategy reaching the threshold
    means no majority. Absent guessers abstain: they count toward
    n_players but toward no strategy.
    """
    if n_players < 2:
        raise ValueError(f"n_players must be >= 2, got {n_players}")
    if len(guesser_votes) > n_players - 1:
        raise ValueError("more guesser votes than guessers")
    counts: Counter[Strategy] = Counter(guesser_votes.values())
    counts[assigned] += 1
    threshold = (n_players + 1) // 2
    reaching = [s for s in STRATEGIES if counts[s] >= threshold]
    majority = reaching[0] if len(reaching) == 1 else None
    unanimous = len(guesser_votes) == n_players - 1 and all(
        v is assigned for v in guesser_votes.values()
    )
    return VoteOutcome(
        majority_strategy=majority,
        reader_in_majority=majority is assigned and majority is not None,
        unanimous=unanimous,
    )


def apply_stake_awards(state: GameState, outcome: VoteOutcome) -> list[GameEvent]:
    """Pay out the round-1 stake. Reader in majority: reader earns the full
    stake and each agreeing guesser half of it. Majority without the
    reader: agreeing guessers earn the stake divided by the configured
    divisor, the reader nothing. Unanimity additionally pays the agreement
    bonus to every player. No majority: no stake deltas."""
    if state.phase is not Phase.SUMMARY:
        raise WrongPhase(f"cannot apply stake awards during {state.phase.value}")
    turn = state.turn
    assert turn is not None
    stake = turn.stake
    deltas = {p.player_id: 0 for p in state.players}
    if outcome.majority_strategy is not None:
        agreeing = [
            pid for pid, vote in turn.round1_votes.items() if vote is outcome.majority_strategy
        ]
        if outcome.reader_in_majority:
            deltas[turn.reader_id] += stake
            for pid in agreeing:
                deltas[pid] += stake // 2
        else:
            for pid in agreeing:
                deltas[pid] += stake // state.config.minority_guesser_points_divisor
    if outcome.unanimous:
        for pid in deltas:
            deltas[pid] += state.config.agreement_bonus
    for player in state.players:
        player.points += deltas[player.player_id]
    outcome.deltas = deltas
    turn.outcome = outcome
    return [
        SummaryRevealed(
            assigned_strategy=turn.assigned_strategy,
            stake=stake,
            votes=dict(turn.round1_votes),
            majority_strategy=outcome.majority_strategy,
            reader_in_majority=outcome.reader_in_majority,
            unanimous=outcome.unanimous,
            deltas=dict(deltas),
            points=_points(state),
        )
    ]


def resolve_summary(state: GameState) -> list[GameEvent]:
    """Unanimity goes straight back to the board; any disagreement opens
    discussion."""
    if state.phase is not Phase.SUMMARY:
        raise WrongPhase(f"cannot resolve summary during {state.phase.value}")
    turn = state.turn
    if turn is None or turn.outcome is None:
        raise WrongPhase("summary not tallied yet")
    if turn.outcome.unanimous:
        return _enter_movement(state)
    _transition(state, Phase.DISCUSSION)
    state.ready.clear()
    return [DiscussionStarted()]


def mark_ready(state: GameState, player_id: str) -> list[GameEvent]:
    """Record that a player is done discussing; when every connected player
    is ready, the re-vote opens. Repeat Ready is a no-op."""
    if state.phase is not Phase.DISCUSSION:
        raise WrongPhase(f"cannot ready during {state.phase.value}")
    if state.player(player_id) is None:
        raise UnknownPlayer(f"no player {player_id}")
    state.ready.add(player_id)
    if all(not p.connected or p.player_id in state.ready for p in state.players):
        return resolve_discussion(state)
    return []


def resolve_discussion(state: GameState) -> list[GameEvent]:
    if state.phase is not Phase.DISCUSSION:
        raise WrongPhase(f"cannot resolve discussion during {state.phase.value}")
    turn = state.turn
    assert turn is not None
    turn.round2_votes = {}
    state.ready.clear()
    _transition(state, Phase.REVOTE)
    return [RevoteStarted()]


def cast_vote(
    state: GameState, player_id: str, strategy: Strategy, round_no: int
) -> list[GameEvent]:
    """Record an identification vote. Votes are immutable once cast. When
    every connected guesser has voted, the round closes."""
    if round_no == 1:
        if state.phase is not Phase.IDENTIFICATION:
            raise WrongPhase(f"round-1 votes only during identification, not {state.phase.value}")
    elif round_no == 2:
        if state.phase is not Phase.REVOTE:
            raise WrongPhase(f"round-2 votes only during revote, not {state.phase.value}")
    else:
        raise WrongPhase(f"no such vote round {round_no}")
    turn = state.turn
    assert turn is not None
    if state.player(player_id) is None:
        raise UnknownPlayer(f"no player {player_id}")
    if player_id == turn.reader_id:
        raise ReaderCannotVote("the reader's vote is implicit")
    votes = turn.round1_votes if round_no == 1 else turn.round2_votes
    assert votes is not None
    if player_id in votes:
        raise AlreadyVoted(f"{player_id} already voted in round {round_no}")
    votes[player_id] = strategy
    events: list[GameEvent] = [VoteRecorded(round=round_no, voter_count=len(votes))]
    events.extend(_maybe_close_votes(state))
    return events


def _maybe_close_votes(state: GameState) -> list[GameEvent]:
    """Close the current vote round if every connected guesser has cast."""
    turn = state.turn
    if turn is None:
        return []
    if state.phase is Phase.IDENTIFICATION:
        votes = turn.round1_votes
    elif state.phase is Phase.REVOTE:
        votes = turn.round2_votes if turn.round2_votes is not None else {}
    else:
        return []
    pending = [
        p
        for p in state.players
        if p.connected and p.player_id != turn.reader_id and p.player_id not in votes
    ]
    if pending:
        return []
    return _close_votes(state)


def _close_votes(state: GameState) -> list[GameEvent]:
    if state.phase is Phase.IDENTIFICATION:
        turn = state.turn
        assert turn is not None
        _transition(state, Phase.SUMMARY)
        outcome = tally_votes(turn.round1_votes, turn.assigned_strategy, len(state.players))
        events = apply_stake_awards(state, outcome)
        events.extend(resolve_summary(state))
        return events
    if state.phase is Phase.REVOTE:
        _transition(state, Phase.FINAL_SUMMARY)
        return resolve_final_summary(state)
    raise WrongPhase(f"no open vote round during {state.phase.value}")


def vote_timeout(state: GameState, round_no: int) -> list[GameEvent]:
    """Close the current vote round with whoever has voted; everyone else
    abstains."""
    expected = Phase.IDENTIFICATION if round_no == 1 else Phase.REVOTE
    if state.phase is not expected:
        raise WrongPhase(f"vote round {round_no} is not open during {state.phase.value}")
    return _close_votes(state)


def persuasion_awards(
    round1: Mapping[str, Optional[Strategy]],
    round2: Mapping[str, Optional[Strategy]],
    per_convert: int,
) -> dict[str, int]:
    """Pay persuasion points: for every voter whose round-2 vote differs
    from their round-1 vote, each round-1 holder of the newly adopted
    strategy earns ``per_convert``. ``None`` marks an abstention; an
    abstainer converts by voting in round 2 but can never be a persuader.

    Both maps must cover the same voter set (include the reader's implicit
    vote when the reader should be eligible as a persuader).
    """
    if set(round1) != set(round2):
        raise VoterSetMismatch("round-1 and round-2 voter sets differ")
    deltas = {pid: 0 for pid in round1}
    for voter in round2:
        adopted = round2[voter]
        if adopted is None or adopted is round1[voter]:
            continue
        for persuader in round1:
            if round1[persuader] is adopted:
                deltas[persuader] += per_convert
    return deltas


def resolve_final_summary(state: GameState) -> list[GameEvent]:
    """Apply persuasion awards from the re-vote (the round-1 stake award is
    final; round 2 pays persuasion only) and return to the board."""
    if state.phase is not Phase.FINAL_SUMMARY:
        raise WrongPhase(f"cannot resolve final summary during {state.phase.value}")
    turn = state.turn
    assert turn is not None and turn.round2_votes is not None
    round1: dict[str, Optional[Strategy]] = {turn.reader_id: turn.assigned_strategy}
    round2: dict[str, Optional[Strategy]] = {turn.reader_id: turn.assigned_strategy}
    for p in state.players:
        if p.player_id == turn.reader_id:
            continue
        round1[p.player_id] = turn.round1_votes.get(p.player_id)
        round2[p.player_id] = turn.round2_votes.get(p.player_id)
    deltas = persuasion_awards(round1, round2, state.config.persuasion_points)
    for player in state.players:
        player.points += deltas[player.player_id]
    events: list[GameEvent] = [
        FinalSummaryRevealed(
            votes=dict(turn.round2_votes),
            persuasion_deltas=deltas,
            points=_points(state),
        )
    ]
    events.extend(_enter_movement(state))
    return events


def _enter_movement(state: GameState) -> list[GameEvent]:
    _transition(state, Phase.MOVEMENT)
    return [MovementWindow(mover_id=state.reader.player_id)]


def play_power_card(
    state: GameState,
    player_id: str,
    kind: PowerCardKind,
    target_id: Optional[str] = None,
) -> list[GameEvent]:
    """Spend points to activate a held card during the movement window.
    freeze_player needs a live, different, not-yet-frozen target; the other
    kinds take no target."""
    if state.phase is not Phase.MOVEMENT:
        raise WrongPhase(f"cannot play cards during {state.phase.value}")
    mover = state.reader
    if player_id != mover.player_id:
        raise NotCurrentPlayer(f"{player_id} does not hold the movement window")
    if kind not in mover.hand:
        raise CardNotHeld(f"{kind.value} not in hand")
    cost = state.config.power_card_costs[kind]
    if mover.points < cost:
        raise InsufficientPoints(f"need {cost} points, have {mover.points}")
    target = None
    if kind is PowerCardKind.FREEZE_PLAYER:
        if target_id is None:
            raise InvalidTarget("freeze_player requires a target")
        target = state.player(target_id)
        if target is None:
            raise InvalidTarget(f"no player {target_id}")
        if target_id == player_id:
            raise InvalidTarget("cannot freeze yourself")
        if target.frozen:
            raise InvalidTarget(f"{target_id} is already frozen")
    elif target_id is not None:
        raise InvalidTarget(f"{kind.value} takes no target")

    mover.hand.remove(kind)
    state.power_discard.append(kind)
    mover.points -= cost
    drawn: Optional[PowerCardKind] = None
    if kind is PowerCardKind.EXTRA_TURN:
        state.extra_turn_pending = True
    elif kind is PowerCardKind.FREEZE_PLAYER:
        assert target is not None
        target.frozen = True
    elif kind is PowerCardKind.EXTRA_DRAW:
        drawn = _draw_power_card(state, mover)
    return [
        PowerCardPlayed(
            player_id=player_id,
            kind=kind,
            target_id=target_id,
            points=_points(state),
            drawn=drawn,
        )
    ]


def _draw_power_card(state: GameState, player: PlayerState) -> Optional[PowerCardKind]:
    """Draw the top power card into the player's hand; a full hand discards
    the draw. Empty deck reshuffles the discard pile first."""
    if not state.power_deck:
        if not state.power_discard:
            return None
        state.power_deck = state.power_discard
        state.power_discard = []
        state.rng.shuffle(state.power_deck)
    card = state.power_deck.pop()
    if len(player.hand) < state.config.hand_limit:
        player.hand.append(card)
    else:
        state.power_discard.append(card)
    return card


def _draw_event_card(state: GameState) -> EventCard:
    if not state.event_deck:
        state.event_deck = state.event_discard
        state.event_discard = []
        state.rng.shuffle(state.event_deck)
    return state.event_deck.pop()


def apply_event_card(state: GameState, card: EventCard) -> Optional[PowerCardKind]:
    """Apply one event card to the mover: move with clamping to the board,
    or draw a power card. Reaching the final cell wins. The card goes to
    the discard pile. Returns the power card drawn, if any."""
    if state.phase is not Phase.MOVEMENT:
        raise WrongPhase(f"no event cards during {state.phase.value}")
    mover = state.reader
    drawn: Optional[PowerCardKind] = None
    if card.kind is EventCardKind.MOVE_FORWARD:
        mover.token_position = min(mover.token_position + card.n, state.config.board_length)
        if mover.token_position >= state.config.board_length:
            _finish(state, mover)
    elif card.kind is EventCardKind.MOVE_BACKWARD:
        mover.token_position = max(mover.token_position - card.n, 0)
    else:
        drawn = _draw_power_card(state, mover)
    state.event_discard.append(card)
    return drawn


def _finish(state: GameState, winner: PlayerState) -> None:
    state.winner = winner.player_id
    _transition(state, Phase.FINISHED)


def roll_and_move(state: GameState) -> list[GameEvent]:
    """Close the power-card window: roll the die, move, check the finish,
    then draw and apply an Event Card, and finally pass the turn. The win
    check runs right after the die move and again after an event move."""
    if state.phase is not Phase.MOVEMENT:
        raise WrongPhase(f"cannot roll during {state.phase.value}")
    mover = state.reader
    roll = state.rng.roll_die(state.config.die_sides)
    mover.token_position = min(mover.token_position + roll, state.config.board_length)
    card: Optional[EventCard] = None
    drawn: Optional[PowerCardKind] = None
    if mover.token_position >= state.config.board_length:
        _finish(state, mover)
    else:
        card = _draw_event_card(state)
        drawn = apply_event_card(state, card)
    state.turn_count += 1
    events: list[GameEvent] = [
        MovementResolved(
            mover_id=mover.player_id,
            roll=roll,
            event_card=card,
            positions=_positions(state),
            power_drawn=drawn,
        )
    ]
    if state.winner is not None:
        events.append(
            GameOver(winner_id=state.winner, points=_points(state), positions=_positions(state))
        )
        return events
    events.extend(end_turn(state))
    return events


def powercard_window_timeout(state: GameState) -> list[GameEvent]:
    """A mover who never rolls is rolled for when the window times out."""
    return roll_and_move(state)


def end_turn(state: GameState) -> list[GameEvent]:
    """Pass the reader tag (or keep it if an extra turn is pending) and
    start the next reading. Frozen players are skipped and thawed as the
    tag passes over them."""
    if state.phase is not Phase.MOVEMENT:
        raise WrongPhase(f"cannot end turn during {state.phase.value}")
    if state.winner is not None:
        raise WrongPhase("game already finished")
    state.turn = None
    if state.extra_turn_pending:
        state.extra_turn_pending = False
    else:
        _advance_reader(state)
    _transition(state, Phase.READING)
    return begin_reading(state)


def _advance_reader(state: GameState) -> None:
    index = (state.reader_index + 1) % len(state.players)
    while state.players[index].frozen:
        state.players[index].frozen = False
        index = (index + 1) % len(state.players)
    state.reader_index = index


def abandon_turn(state: GameState) -> list[GameEvent]:
    """Void the current reading turn (reader lost): no awards, no movement;
    the reader tag advances and a fresh turn begins."""
    if state.phase is not Phase.READING:
        raise WrongPhase(f"cannot abandon turn during {state.phase.value}")
    turn = state.turn
    assert turn is not None
    events: list[GameEvent] = [TurnVoided(reader_id=turn.reader_id)]
    state.turn = None
    _advance_reader(state)
    _transition(state, Phase.READING)
    events.extend(begin_reading(state))
    return events


def reader_timeout(state: GameState) -> list[GameEvent]:
    return abandon_turn(state)


def discussion_timeout(state: GameState) -> list[GameEvent]:
    return resolve_discussion(state)


def set_connected(state: GameState, player_id: str, connected: bool) -> list[GameEvent]:
    """Flip a player's connection flag. A disconnect may complete a pending
    vote round or discussion (the departed player stops being waited on)."""
    player = state.player(player_id)
    if player is None:
        raise UnknownPlayer(f"no player {player_id}")
    player.connected = connected
    if connected:
        return []
    events = _maybe_close_votes(state)
    if not events and state.phase is Phase.DISCUSSION:
        if all(not p.connected or p.player_id in state.ready for p in state.players):
            events = resolve_discussion(state)
    return events
