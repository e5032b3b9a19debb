"""Server-core tests: lobbies, sessions, timers, redaction, rematch.

Drives GameServer directly through its line interface with an injected
clock, entropy source, and send collector - no sockets involved.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict

import pytest

from miboard import protocol
from miboard.core.types import Phase, Strategy
from miboard.server.logs import replay_file
from miboard.server.session import GameServer

from conftest import PACK_DOC, make_pack


class Harness:
    def __init__(self, tmp_path=None, seed_start=777):
        self.sent: dict[str, list[bytes]] = defaultdict(list)
        self.now = 1_000.0
        seeds = itertools.count(seed_start)
        self.server = GameServer(
            send=lambda cid, data: self.sent[cid].append(data),
            log_dir=tmp_path,
            clock=lambda: self.now,
            entropy=lambda: next(seeds),
        )
        self.server.register_pack("cells", make_pack())

    def connect(self, *conn_ids):
        for cid in conn_ids:
            self.server.on_connect(cid)

    def send(self, cid, payload, req=None):
        self.server.on_line(cid, protocol.encode(protocol.envelope(payload, req=req)))

    def events(self, cid, kind=None):
        envs = [protocol.decode(line) for line in self.sent[cid]]
        return [e for e in envs if kind is None or e.kind == kind]

    def last(self, cid, kind):
        matches = self.events(cid, kind)
        assert matches, f"{cid} never received {kind}"
        return matches[-1].payload

    def advance(self, seconds):
        self.now += seconds
        self.server.tick()


@pytest.fixture
def h(tmp_path):
    return Harness(tmp_path / "logs")


def start_lobby(h, names=("Ada", "Bea", "Cal", "Dan")):
    conns = [f"c{i}" for i in range(len(names))]
    h.connect(*conns)
    h.send(conns[0], protocol.Join(name=names[0]))
    h.send(conns[0], protocol.CreateLobby(pack="cells"))
    lobby_id = h.last(conns[0], "lobby_state").lobby_id
    for cid, name in zip(conns[1:], names[1:]):
        h.send(cid, protocol.Join(name=name, lobby=lobby_id))
    return conns, lobby_id


def start_game(h, names=("Ada", "Bea", "Cal", "Dan")):
    conns, lobby_id = start_lobby(h, names)
    h.send(conns[0], protocol.StartGame())
    return conns, lobby_id


def reader_conn(h, conns):
    """Whoever last received a turn_assigned with the strategy visible."""
    for cid in conns:
        turn = h.last(cid, "turn_assigned")
        if turn.assigned_strategy is not None:
            return cid, turn
    raise AssertionError("no reader found")


# --- lobby ------------------------------------------------------------------


def test_lobby_create_join_broadcasts(h):
    conns, lobby_id = start_lobby(h)
    state = h.last(conns[0], "lobby_state")
    assert state.state == "waiting"
    assert [p["name"] for p in state.players] == ["Ada", "Bea", "Cal", "Dan"]
    assert state.host_id == "p1"
    assert h.last(conns[3], "lobby_state").lobby_id == lobby_id


def test_join_validation(h):
    h.connect("x", "y")
    h.send("x", protocol.Join(name="Solo"))
    h.send("x", protocol.CreateLobby(pack="cells"))
    lobby_id = h.last("x", "lobby_state").lobby_id
    h.send("y", protocol.Join(name="Solo", lobby=lobby_id))
    assert h.last("y", "error").code == "duplicate_name"
    h.send("y", protocol.Join(name="Other", lobby="nope"))
    assert h.last("y", "error").code == "unknown_lobby"
    h.send("y", protocol.CreateLobby(pack="missing"), req="r1")
    err = h.last("y", "error")
    assert err.code == "unknown_pack" and err.request_id == "r1"


def test_lobby_full_and_late_join(h):
    names = tuple(f"N{i}" for i in range(6))
    conns, lobby_id = start_lobby(h, names)
    h.connect("late")
    h.send("late", protocol.Join(name="Late", lobby=lobby_id))
    assert h.last("late", "error").code == "lobby_full"
    h.send(conns[0], protocol.StartGame())
    h.connect("later")
    h.send("later", protocol.Join(name="Later", lobby=lobby_id))
    assert h.last("later", "error").code == "already_started"


def test_create_lobby_requires_name_and_valid_config(h):
    h.connect("z")
    h.send("z", protocol.CreateLobby(pack="cells"))
    assert h.last("z", "error").code == "not_joined"
    h.send("z", protocol.Join(name="Zed"))
    h.send("z", protocol.CreateLobby(config_overrides={"board_length": 1}, pack="cells"))
    assert h.last("z", "error").code == "invalid_config"


def test_start_game_guards(h):
    h.connect("a", "b")
    h.send("a", protocol.Join(name="A"))
    h.send("a", protocol.CreateLobby(pack="cells"))
    h.send("a", protocol.StartGame())
    assert h.last("a", "error").code == "not_enough_players"
    lobby_id = h.last("a", "lobby_state").lobby_id
    h.send("b", protocol.Join(name="B", lobby=lobby_id))
    h.send("b", protocol.StartGame())
    assert h.last("b", "error").code == "not_host"


def test_host_leave_promotes_next_member(h):
    conns, lobby_id = start_lobby(h, ("Ada", "Bea"))
    h.send(conns[0], protocol.Leave())
    state = h.last(conns[1], "lobby_state")
    assert [p["name"] for p in state.players] == ["Bea"]
    assert state.host_id == "p1"


# --- game start and redaction --------------------------------------------------


def test_game_started_snapshot_and_redacted_turn(h):
    conns, _ = start_game(h)
    snap = h.last(conns[0], "game_started").snapshot
    assert snap["board_length"] == 40
    assert snap["reader_id"] == "p1"
    assert len(snap["players"]) == 4
    assert "seed" not in json.dumps(snap)
    reader_turn = h.last(conns[0], "turn_assigned")
    assert reader_turn.assigned_strategy is not None
    assert reader_turn.stake is not None
    for cid in conns[1:]:
        guesser_turn = h.last(cid, "turn_assigned")
        assert guesser_turn.assigned_strategy is None
        assert guesser_turn.stake is None
        assert guesser_turn.sentence == reader_turn.sentence


def test_game_error_goes_to_sender_only(h):
    conns, _ = start_game(h)
    before = {cid: len(h.sent[cid]) for cid in conns}
    h.send(conns[1], protocol.Vote(strategy=Strategy.BRIDGING), req="v1")
    err = h.last(conns[1], "error")
    assert err.code == "wrong_phase" and err.request_id == "v1"
    for cid in (conns[0], conns[2], conns[3]):
        assert len(h.sent[cid]) == before[cid]


def drive_one_turn(h, conns, unanimous=True):
    """Play a full turn over the wire; returns (reader_cid, assigned)."""
    rcid, turn = reader_conn(h, conns)
    h.send(rcid, protocol.SubmitSE(text="I think this follows from the earlier sentence."))
    assigned = Strategy(turn.assigned_strategy)
    others = [s for s in Strategy if s is not assigned]
    guessers = [c for c in conns if c != rcid]
    for i, cid in enumerate(guessers):
        vote = assigned if unanimous or i > 0 else others[0]
        h.send(cid, protocol.Vote(strategy=vote))
    if not unanimous:
        for cid in conns:
            h.send(cid, protocol.Ready())
        for cid in guessers:
            h.send(cid, protocol.Vote(strategy=assigned))
    h.send(rcid, protocol.Roll())
    return rcid, assigned


def test_full_wire_game_to_game_over(h):
    conns, lobby_id = start_game(h)
    for i in range(500):
        game = h.server.lobbies[lobby_id].game
        if game.state.phase is Phase.FINISHED:
            break
        drive_one_turn(h, conns, unanimous=(i % 3 != 0))
    game = h.server.lobbies[lobby_id].game
    assert game.state.phase is Phase.FINISHED
    over = h.last(conns[0], "game_over")
    assert over.winner_id == game.state.winner
    for cid in conns:
        assert h.last(cid, "game_over").winner_id == over.winner_id


def test_seq_strictly_increasing_per_connection(h):
    conns, _ = start_game(h)
    for _ in range(3):
        drive_one_turn(h, conns)
    for cid in conns:
        seqs = [e.seq for e in h.events(cid)]
        assert all(s is not None for s in seqs)
        assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)


def test_summary_reveals_assigned_to_everyone(h):
    conns, _ = start_game(h)
    rcid, assigned = drive_one_turn(h, conns)
    for cid in conns:
        summary = h.last(cid, "summary_revealed")
        assert Strategy(summary.assigned_strategy) is assigned
        assert summary.unanimous


# --- chat ------------------------------------------------------------------------


def test_chat_open_in_waiting_lobby(h):
    conns, _ = start_lobby(h)
    h.send(conns[1], protocol.Chat(text="hello all"))
    for cid in conns:
        assert h.last(cid, "chat_relayed").text == "hello all"


def test_chat_muted_during_reading_and_identification(h):
    conns, _ = start_game(h)
    h.send(conns[1], protocol.Chat(text="psst"))
    assert h.last(conns[1], "error").code == "chat_muted"
    rcid, turn = reader_conn(h, conns)
    h.send(rcid, protocol.SubmitSE(text="my explanation"))
    h.send(conns[1], protocol.Chat(text="vote bridging!"))
    assert h.last(conns[1], "error").code == "chat_muted"


def test_chat_open_in_discussion_and_movement(h):
    conns, lobby_id = start_game(h)
    rcid, turn = reader_conn(h, conns)
    h.send(rcid, protocol.SubmitSE(text="my explanation"))
    assigned = Strategy(turn.assigned_strategy)
    others = [s for s in Strategy if s is not assigned]
    guessers = [c for c in conns if c != rcid]
    h.send(guessers[0], protocol.Vote(strategy=others[0]))
    for cid in guessers[1:]:
        h.send(cid, protocol.Vote(strategy=assigned))
    game = h.server.lobbies[lobby_id].game
    assert game.state.phase is Phase.DISCUSSION
    h.send(guessers[0], protocol.Chat(text="I still think it was something else"))
    assert h.last(conns[0], "chat_relayed").sender_name == "Bea"


# --- timers ----------------------------------------------------------------------


def test_vote_timeout_closes_round_with_abstentions(h):
    conns, lobby_id = start_game(h)
    rcid, turn = reader_conn(h, conns)
    h.send(rcid, protocol.SubmitSE(text="reading aloud"))
    guessers = [c for c in conns if c != rcid]
    h.send(guessers[0], protocol.Vote(strategy=Strategy(turn.assigned_strategy)))
    game = h.server.lobbies[lobby_id].game
    assert game.state.phase is Phase.IDENTIFICATION
    h.advance(game.state.config.vote_timeout + 1)
    assert game.state.phase in (Phase.DISCUSSION, Phase.MOVEMENT)
    summary = h.last(guessers[0], "summary_revealed")
    assert len(summary.votes) == 1


def test_discussion_and_revote_timeouts_cascade(h):
    conns, lobby_id = start_game(h)
    rcid, turn = reader_conn(h, conns)
    h.send(rcid, protocol.SubmitSE(text="reading aloud"))
    game = h.server.lobbies[lobby_id].game
    config = game.state.config
    h.advance(config.vote_timeout + 1)  # nobody voted: no majority
    assert game.state.phase is Phase.DISCUSSION
    h.advance(config.discussion_timeout + 1)
    assert game.state.phase is Phase.REVOTE
    h.advance(config.vote_timeout + 1)
    assert game.state.phase is Phase.MOVEMENT
    h.advance(config.powercard_window_timeout + 1)  # auto-roll
    assert game.state.phase in (Phase.READING, Phase.FINISHED)


def test_votes_do_not_extend_the_vote_deadline(h):
    conns, lobby_id = start_game(h)
    rcid, turn = reader_conn(h, conns)
    h.send(rcid, protocol.SubmitSE(text="reading aloud"))
    game = h.server.lobbies[lobby_id].game
    due_before = game.deadline.due
    h.advance(game.state.config.vote_timeout / 2)
    guessers = [c for c in conns if c != rcid]
    h.send(guessers[0], protocol.Vote(strategy=Strategy.PREDICTION))
    assert game.deadline.due == due_before


def test_disconnected_reader_turn_voided_after_timeout(h):
    conns, lobby_id = start_game(h)
    game = h.server.lobbies[lobby_id].game
    assert game.state.reader.player_id == "p1"
    h.server.on_disconnect(conns[0])
    assert not game.state.players[0].connected
    for cid in conns[1:]:
        assert h.last(cid, "player_connection").player_id == "p1"
    h.advance(game.state.config.reader_timeout + 1)
    assert game.state.reader.player_id == "p2"
    voided = h.last(conns[1], "turn_voided")
    assert voided.reader_id == "p1"
    assert all(p.points == 0 for p in game.state.players)


def test_disconnect_of_last_pending_voter_closes_round(h):
    conns, lobby_id = start_game(h)
    rcid, turn = reader_conn(h, conns)
    h.send(rcid, protocol.SubmitSE(text="reading aloud"))
    guessers = [c for c in conns if c != rcid]
    for cid in guessers[:-1]:
        h.send(cid, protocol.Vote(strategy=Strategy(turn.assigned_strategy)))
    game = h.server.lobbies[lobby_id].game
    assert game.state.phase is Phase.IDENTIFICATION
    h.server.on_disconnect(guessers[-1])
    assert game.state.phase in (Phase.MOVEMENT, Phase.DISCUSSION)


# --- logs and rematch ---------------------------------------------------------------


def test_session_log_replays_to_live_digest(h, tmp_path):
    conns, lobby_id = start_game(h)
    while h.server.lobbies[lobby_id].game.state.phase is not Phase.FINISHED:
        drive_one_turn(h, conns, unanimous=False)
    live = h.server.lobbies[lobby_id].game.state.digest()
    h.server.close()
    results = replay_file(h.server.log_dir / f"{lobby_id}.mblog")
    assert results[-1].verified
    assert results[-1].computed_digest == live


def test_rematch_starts_fresh_game_in_same_log(h):
    conns, lobby_id = start_game(h)
    game = h.server.lobbies[lobby_id].game
    while game.state.phase is not Phase.FINISHED:
        drive_one_turn(h, conns)
    first_digest = game.state.digest()
    for cid in conns[:-1]:
        h.send(cid, protocol.Rematch())
    assert h.last(conns[0], "rematch_recorded").count == 3
    assert game.state.phase is Phase.FINISHED
    h.send(conns[-1], protocol.Rematch())
    assert game.state.phase is Phase.READING
    assert all(p.points == 0 and p.token_position == 0 for p in game.state.players)
    snap = h.last(conns[1], "game_started").snapshot
    assert all(p["points"] == 0 for p in snap["players"])
    h.server.close()
    results = replay_file(h.server.log_dir / f"{lobby_id}.mblog")
    assert len(results) == 2
    assert results[0].computed_digest == first_digest
    assert all(r.recorded_digest == r.computed_digest for r in results)


def test_rematch_only_after_game_over(h):
    conns, _ = start_game(h)
    h.send(conns[0], protocol.Rematch())
    assert h.last(conns[0], "error").code == "wrong_phase"


def test_guessers_never_see_strategy_before_summary(h):
    """Per-turn transcript scan on one wire game."""
    conns, lobby_id = start_game(h)
    for i in range(30):
        if h.server.lobbies[lobby_id].game.state.phase is Phase.FINISHED:
            break
        drive_one_turn(h, conns, unanimous=(i % 2 == 0))
    for cid in conns:
        window_strategy = None
        for env in h.events(cid):
            if env.kind == "turn_assigned":
                window_strategy = "__pending__"
                continue
            if env.kind == "summary_revealed":
                window_strategy = None
                continue
            if window_strategy == "__pending__" and env.kind in (
                "se_posted",
                "vote_recorded",
                "stake_altered",
                "strategy_swapped",
            ):
                raw = protocol.encode(protocol.envelope(env.payload, seq=env.seq))
                for s in Strategy:
                    if env.kind != "se_posted":
                        assert s.value.encode() not in raw
