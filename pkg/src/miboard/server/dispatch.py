"""Maps logged inputs (commands, timers, connection changes) onto engine
operations.

This is the single reducer boundary shared by the live server, the
simulator, and replay: whatever goes through here is exactly what a
session log records, so a log replayed through these functions reproduces
the live game.
"""

from __future__ import annotations

from typing import Optional

from .. import protocol
from ..core import engine
from ..core.events import GameEvent
from ..core.types import GameState, Phase
from ..errors import WrongPhase

# Commands that mutate game state (and therefore belong in the log and in
# replay). Chat and lobby traffic never reach the reducer.
GAME_COMMANDS = (
    protocol.SubmitSE,
    protocol.Vote,
    protocol.AlterStake,
    protocol.SwapStrategy,
    protocol.PlayPowerCard,
    protocol.Roll,
    protocol.Ready,
)

TIMER_VOTE = "vote_timeout"
TIMER_DISCUSSION = "discussion_timeout"
TIMER_POWERCARD_WINDOW = "powercard_window_timeout"
TIMER_READER = "reader_timeout"


def is_game_command(command: protocol.Command) -> bool:
    return isinstance(command, GAME_COMMANDS)


def apply_command(state: GameState, actor: str, command: protocol.Command) -> list[GameEvent]:
    """Apply one player command through the rules engine. Raises GameError
    (state untouched) when the command is illegal right now."""
    if isinstance(command, protocol.SubmitSE):
        return engine.submit_self_explanation(state, actor, command.text)
    if isinstance(command, protocol.Vote):
        if state.phase is Phase.IDENTIFICATION:
            round_no = 1
        elif state.phase is Phase.REVOTE:
            round_no = 2
        else:
            raise WrongPhase(f"no vote is open during {state.phase.value}")
        return engine.cast_vote(state, actor, command.strategy, round_no)
    if isinstance(command, protocol.AlterStake):
        return engine.alter_stake(state, actor)
    if isinstance(command, protocol.SwapStrategy):
        return engine.swap_strategy(state, actor)
    if isinstance(command, protocol.PlayPowerCard):
        return engine.play_power_card(state, actor, command.kind, command.target)
    if isinstance(command, protocol.Roll):
        return engine.roll_and_move(state)
    if isinstance(command, protocol.Ready):
        return engine.mark_ready(state, actor)
    raise WrongPhase(f"{type(command).__name__} is not a game action")


def apply_timer(state: GameState, kind: str, round_no: Optional[int] = None) -> list[GameEvent]:
    if kind == TIMER_VOTE:
        return engine.vote_timeout(state, round_no if round_no is not None else 1)
    if kind == TIMER_DISCUSSION:
        return engine.discussion_timeout(state)
    if kind == TIMER_POWERCARD_WINDOW:
        return engine.powercard_window_timeout(state)
    if kind == TIMER_READER:
        return engine.reader_timeout(state)
    raise WrongPhase(f"unknown timer kind {kind!r}")


def apply_connection(state: GameState, player_id: str, connected: bool) -> list[GameEvent]:
    return engine.set_connected(state, player_id, connected)
