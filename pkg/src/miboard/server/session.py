"""Transport-agnostic server core: lobbies, live sessions, timers, logs.

``GameServer`` consumes raw inbound lines per connection and emits encoded
outbound lines through a ``send`` callback, so the whole server can be
driven in tests without sockets. Within a session every mutation
(command, timer, connection change) is applied one at a time in arrival
order; the transport layer must deliver each connection's lines in order
and never interleave calls into this class.

Clock and seed entropy are injectable for deterministic tests.
"""

from __future__ import annotations

import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .. import protocol
from ..content import TextPack, load_text_pack
from ..core.types import GameConfig, GameState, Phase
from ..errors import (
    AlreadyStarted,
    ChatMuted,
    DuplicateName,
    GameError,
    LobbyFull,
    MiboardError,
    NotEnoughPlayers,
    NotHost,
    NotInSession,
    NotJoined,
    ProtocolError,
    UnknownLobby,
    UnknownPack,
    WrongPhase,
)
from ..core import engine
from . import dispatch
from .logs import SessionLogWriter

# Chat stays open wherever coordination cannot corrupt a pending vote.
CHAT_OPEN_PHASES = frozenset(
    {Phase.SUMMARY, Phase.DISCUSSION, Phase.FINAL_SUMMARY, Phase.MOVEMENT, Phase.FINISHED}
)
MAX_CHAT_CHARS = 4096


@dataclass
class ClientConn:
    conn_id: str
    name: Optional[str] = None
    lobby_id: Optional[str] = None
    player_id: Optional[str] = None
    seq: int = 0


@dataclass
class Deadline:
    due: float
    kind: str
    round_no: Optional[int]
    marker: tuple


@dataclass
class LiveGame:
    state: GameState
    writer: Optional[SessionLogWriter]
    conn_of_player: dict[str, Optional[str]]
    deadline: Optional[Deadline] = None
    rematch_votes: set[str] = field(default_factory=set)
    over_logged: bool = False


@dataclass
class Lobby:
    lobby_id: str
    host_conn: str
    config: GameConfig
    pack_name: str
    pack: TextPack
    member_conns: list[str] = field(default_factory=list)
    state: str = "waiting"  # waiting | in_game
    game: Optional[LiveGame] = None


class GameServer:
    """All lobbies and sessions behind one inbound-line interface."""

    def __init__(
        self,
        send: Callable[[str, bytes], None],
        log_dir: Optional[Path] = None,
        clock: Callable[[], float] = time.time,
        entropy: Callable[[], int] = lambda: secrets.randbits(63),
        base_config: Optional[GameConfig] = None,
    ):
        self._send = send
        self.log_dir = Path(log_dir) if log_dir is not None else None
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock
        self.entropy = entropy
        self.base_config = base_config if base_config is not None else GameConfig()
        self.packs: dict[str, TextPack] = {}
        self.conns: dict[str, ClientConn] = {}
        self.lobbies: dict[str, Lobby] = {}
        self._lobby_counter = 0

    # --- pack registry -----------------------------------------------------

    def register_pack(self, name: str, pack: TextPack) -> None:
        self.packs[name] = pack

    def load_pack_dir(self, directory: Path) -> int:
        count = 0
        for path in sorted(Path(directory).glob("*.json")):
            self.register_pack(path.stem, load_text_pack(path.read_bytes()))
            count += 1
        return count

    def default_pack_name(self) -> Optional[str]:
        return min(self.packs) if self.packs else None

    # --- connection lifecycle ------------------------------------------------

    def on_connect(self, conn_id: str) -> None:
        self.conns[conn_id] = ClientConn(conn_id=conn_id)

    def on_disconnect(self, conn_id: str) -> None:
        conn = self.conns.pop(conn_id, None)
        if conn is None or conn.lobby_id is None:
            return
        lobby = self.lobbies.get(conn.lobby_id)
        if lobby is None:
            return
        if lobby.state == "waiting":
            self._leave_waiting_lobby(lobby, conn)
        else:
            self._detach_player(lobby, conn)

    def close(self) -> None:
        """Flush a digest for any game still running and close all logs."""
        for lobby in self.lobbies.values():
            game = lobby.game
            if game is not None and game.writer is not None:
                if not game.over_logged:
                    game.writer.write_digest(self.clock(), game.state)
                    game.over_logged = True
                game.writer.close()
                game.writer = None

    # --- inbound ---------------------------------------------------------------

    def on_line(self, conn_id: str, line: bytes) -> None:
        conn = self.conns.get(conn_id)
        if conn is None:
            return
        try:
            env = protocol.decode(line)
        except ProtocolError as exc:
            self._error(conn, exc.code, str(exc), None)
            return
        if not isinstance(env.payload, protocol.Command):
            self._error(conn, "bad_field_type", "clients may only send commands", env.req)
            return
        try:
            self._handle(conn, env.payload, env.req)
        except MiboardError as exc:
            self._error(conn, exc.code, str(exc), env.req)

    def _handle(self, conn: ClientConn, command: protocol.Command, req: Optional[str]) -> None:
        if isinstance(command, protocol.Join):
            self._cmd_join(conn, command)
        elif isinstance(command, protocol.CreateLobby):
            self._cmd_create_lobby(conn, command)
        elif isinstance(command, protocol.StartGame):
            self._cmd_start_game(conn)
        elif isinstance(command, protocol.Chat):
            self._cmd_chat(conn, command)
        elif isinstance(command, protocol.Rematch):
            self._cmd_rematch(conn)
        elif isinstance(command, protocol.Leave):
            self._cmd_leave(conn)
        elif dispatch.is_game_command(command):
            self._cmd_game(conn, command)
        else:
            raise WrongPhase(f"{type(command).__name__} not handled")

    # --- lobby commands -----------------------------------------------------------

    def _cmd_join(self, conn: ClientConn, command: protocol.Join) -> None:
        name = command.name.strip()
        if not name:
            raise DuplicateName("name must be non-empty")
        conn.name = name
        if command.lobby is None:
            return
        if conn.lobby_id is not None:
            raise AlreadyStarted("already in a lobby")
        lobby = self.lobbies.get(command.lobby)
        if lobby is None:
            raise UnknownLobby(f"no lobby {command.lobby!r}")
        if lobby.state != "waiting":
            raise AlreadyStarted("game already started")
        if len(lobby.member_conns) >= lobby.config.max_players:
            raise LobbyFull(f"lobby at {lobby.config.max_players} players")
        names = {self.conns[c].name for c in lobby.member_conns}
        if name in names:
            raise DuplicateName(f"name {name!r} already taken")
        lobby.member_conns.append(conn.conn_id)
        conn.lobby_id = lobby.lobby_id
        self._broadcast_lobby_state(lobby)

    def _cmd_create_lobby(self, conn: ClientConn, command: protocol.CreateLobby) -> None:
        if conn.name is None:
            raise NotJoined("send join with a name first")
        if conn.lobby_id is not None:
            raise AlreadyStarted("already in a lobby")
        config = GameConfig.from_dict({**self.base_config.to_dict(), **(command.config_overrides or {})})
        pack_name = command.pack if command.pack is not None else self.default_pack_name()
        if pack_name is None or pack_name not in self.packs:
            raise UnknownPack(f"no pack {pack_name!r}")
        self._lobby_counter += 1
        lobby_id = f"L{self._lobby_counter:04d}-{secrets.token_hex(3)}"
        lobby = Lobby(
            lobby_id=lobby_id,
            host_conn=conn.conn_id,
            config=config,
            pack_name=pack_name,
            pack=self.packs[pack_name],
            member_conns=[conn.conn_id],
        )
        self.lobbies[lobby_id] = lobby
        conn.lobby_id = lobby_id
        self._broadcast_lobby_state(lobby)

    def _cmd_start_game(self, conn: ClientConn) -> None:
        lobby = self._lobby_of(conn)
        if conn.conn_id != lobby.host_conn:
            raise NotHost("only the host can start the game")
        if lobby.state != "waiting":
            raise AlreadyStarted("game already started")
        if len(lobby.member_conns) < lobby.config.min_players:
            raise NotEnoughPlayers(
                f"need {lobby.config.min_players} players, have {len(lobby.member_conns)}"
            )
        roster = []
        conn_of_player: dict[str, Optional[str]] = {}
        for i, member in enumerate(lobby.member_conns):
            player_id = f"p{i + 1}"
            member_conn = self.conns[member]
            member_conn.player_id = player_id
            roster.append((player_id, member_conn.name or player_id))
            conn_of_player[player_id] = member
        seed = self.entropy()
        state, events = engine.new_game(lobby.config, lobby.pack, roster, seed)
        writer = None
        if self.log_dir is not None:
            writer = SessionLogWriter.open(self.log_dir / f"{lobby.lobby_id}.mblog")
        game = LiveGame(state=state, writer=writer, conn_of_player=conn_of_player)
        if writer is not None:
            writer.write_header(lobby.lobby_id, seed, lobby.config, lobby.pack, roster, self.clock())
        lobby.state = "in_game"
        lobby.game = game
        self._broadcast_event(lobby, protocol.GameStarted(snapshot=protocol.public_snapshot(state)))
        self._broadcast_game_events(lobby, events)
        self._rearm_timers(game)

    def _cmd_leave(self, conn: ClientConn) -> None:
        if conn.lobby_id is None:
            return
        lobby = self.lobbies.get(conn.lobby_id)
        if lobby is None:
            conn.lobby_id = None
            return
        if lobby.state == "waiting":
            self._leave_waiting_lobby(lobby, conn)
        else:
            self._detach_player(lobby, conn)

    def _leave_waiting_lobby(self, lobby: Lobby, conn: ClientConn) -> None:
        if conn.conn_id in lobby.member_conns:
            lobby.member_conns.remove(conn.conn_id)
        conn.lobby_id = None
        if not lobby.member_conns:
            del self.lobbies[lobby.lobby_id]
            return
        if lobby.host_conn == conn.conn_id:
            lobby.host_conn = lobby.member_conns[0]
        self._broadcast_lobby_state(lobby)

    def _detach_player(self, lobby: Lobby, conn: ClientConn) -> None:
        """In-game departure: the seat stays, flagged disconnected."""
        game = lobby.game
        player_id = conn.player_id
        conn.lobby_id = None
        conn.player_id = None
        if conn.conn_id in lobby.member_conns:
            lobby.member_conns.remove(conn.conn_id)
        if game is None or player_id is None:
            return
        if game.conn_of_player.get(player_id) == conn.conn_id:
            game.conn_of_player[player_id] = None
        now = self.clock()
        if game.writer is not None:
            game.writer.write_connection(now, player_id, False)
        events = dispatch.apply_connection(game.state, player_id, False)
        self._broadcast_event(lobby, protocol.PlayerConnection(player_id=player_id, connected=False))
        self._broadcast_game_events(lobby, events)
        self._after_mutation(lobby)

    # --- chat ------------------------------------------------------------------

    def _cmd_chat(self, conn: ClientConn, command: protocol.Chat) -> None:
        lobby = self._lobby_of(conn)
        text = command.text[:MAX_CHAT_CHARS]
        if lobby.state == "waiting":
            sender_id = self._provisional_id(lobby, conn.conn_id)
        else:
            assert lobby.game is not None
            if lobby.game.state.phase not in CHAT_OPEN_PHASES:
                raise ChatMuted(f"chat is muted during {lobby.game.state.phase.value}")
            sender_id = conn.player_id or conn.conn_id
            if lobby.game.writer is not None:
                lobby.game.writer.write_command(self.clock(), sender_id, protocol.Chat(text=text))
        self._broadcast_event(
            lobby,
            protocol.ChatRelayed(sender_id=sender_id, sender_name=conn.name or "?", text=text),
        )

    # --- in-game commands ----------------------------------------------------------

    def _cmd_game(self, conn: ClientConn, command: protocol.Command) -> None:
        lobby = self._lobby_of(conn)
        game = lobby.game
        if lobby.state != "in_game" or game is None or conn.player_id is None:
            raise NotInSession("no game running")
        events = dispatch.apply_command(game.state, conn.player_id, command)
        if game.writer is not None:
            game.writer.write_command(self.clock(), conn.player_id, command)
        self._broadcast_game_events(lobby, events)
        self._after_mutation(lobby)

    def _cmd_rematch(self, conn: ClientConn) -> None:
        lobby = self._lobby_of(conn)
        game = lobby.game
        if lobby.state != "in_game" or game is None or conn.player_id is None:
            raise NotInSession("no game running")
        if game.state.phase is not Phase.FINISHED:
            raise WrongPhase("rematch only after the game ends")
        game.rematch_votes.add(conn.player_id)
        self._broadcast_event(lobby, protocol.RematchRecorded(count=len(game.rematch_votes)))
        connected = [p.player_id for p in game.state.players if p.connected]
        if connected and all(pid in game.rematch_votes for pid in connected):
            self._start_rematch(lobby, connected)

    def _start_rematch(self, lobby: Lobby, connected: list[str]) -> None:
        game = lobby.game
        assert game is not None
        if len(connected) < lobby.config.min_players:
            raise NotEnoughPlayers("too few connected players for a rematch")
        old_players = {p.player_id: p for p in game.state.players}
        roster = [(pid, old_players[pid].display_name) for pid in connected]
        seed = self.entropy()
        state, events = engine.new_game(lobby.config, lobby.pack, roster, seed)
        game.state = state
        game.conn_of_player = {pid: game.conn_of_player.get(pid) for pid in connected}
        game.rematch_votes.clear()
        game.over_logged = False
        if game.writer is not None:
            game.writer.write_header(lobby.lobby_id, seed, lobby.config, lobby.pack, roster, self.clock())
        self._broadcast_event(lobby, protocol.GameStarted(snapshot=protocol.public_snapshot(state)))
        self._broadcast_game_events(lobby, events)
        self._rearm_timers(game)

    # --- timers -----------------------------------------------------------------

    def tick(self, now: Optional[float] = None) -> None:
        """Fire every due timer; called periodically by the transport."""
        now = self.clock() if now is None else now
        for lobby in list(self.lobbies.values()):
            game = lobby.game
            if game is None:
                continue
            for _ in range(100):
                deadline = game.deadline
                if deadline is None or now < deadline.due:
                    break
                game.deadline = None
                try:
                    events = dispatch.apply_timer(game.state, deadline.kind, deadline.round_no)
                except GameError:
                    # The phase moved on in the same instant; marker math
                    # should prevent this, but a stale timer must never
                    # kill the session.
                    self._rearm_timers(game, now)
                    continue
                if game.writer is not None:
                    game.writer.write_timer(now, deadline.kind, deadline.round_no)
                self._broadcast_game_events(lobby, events)
                self._after_mutation(lobby, now)

    def _phase_marker(self, state: GameState) -> tuple:
        reader_connected = state.reader.connected if state.phase is Phase.READING else None
        return (state.phase.value, state.target_cursor, state.turn_count, reader_connected)

    def _rearm_timers(self, game: LiveGame, now: Optional[float] = None) -> None:
        state = game.state
        marker = self._phase_marker(state)
        if game.deadline is not None and game.deadline.marker == marker:
            return
        now = self.clock() if now is None else now
        config = state.config
        deadline: Optional[Deadline] = None
        if state.phase is Phase.IDENTIFICATION:
            deadline = Deadline(now + config.vote_timeout, dispatch.TIMER_VOTE, 1, marker)
        elif state.phase is Phase.REVOTE:
            deadline = Deadline(now + config.vote_timeout, dispatch.TIMER_VOTE, 2, marker)
        elif state.phase is Phase.DISCUSSION:
            deadline = Deadline(now + config.discussion_timeout, dispatch.TIMER_DISCUSSION, None, marker)
        elif state.phase is Phase.MOVEMENT:
            deadline = Deadline(
                now + config.powercard_window_timeout, dispatch.TIMER_POWERCARD_WINDOW, None, marker
            )
        elif state.phase is Phase.READING and not state.reader.connected:
            deadline = Deadline(now + config.reader_timeout, dispatch.TIMER_READER, None, marker)
        game.deadline = deadline

    def _after_mutation(self, lobby: Lobby, now: Optional[float] = None) -> None:
        game = lobby.game
        assert game is not None
        if game.state.phase is Phase.FINISHED and not game.over_logged:
            if game.writer is not None:
                game.writer.write_digest(self.clock() if now is None else now, game.state)
            game.over_logged = True
            game.deadline = None
            return
        self._rearm_timers(game, now)

    # --- outbound ---------------------------------------------------------------

    def _lobby_of(self, conn: ClientConn) -> Lobby:
        if conn.lobby_id is None or conn.lobby_id not in self.lobbies:
            raise NotInSession("not in a lobby")
        return self.lobbies[conn.lobby_id]

    def _provisional_id(self, lobby: Lobby, conn_id: str) -> str:
        return f"p{lobby.member_conns.index(conn_id) + 1}"

    def _error(self, conn: ClientConn, code: str, message: str, req: Optional[str]) -> None:
        self._push(conn, protocol.ErrorEvent(code=code, message=message, request_id=req))

    def _push(self, conn: ClientConn, payload) -> None:
        conn.seq += 1
        self._send(conn.conn_id, protocol.encode(protocol.envelope(payload, seq=conn.seq)))

    def _broadcast_lobby_state(self, lobby: Lobby) -> None:
        players = [
            {"id": self._provisional_id(lobby, c), "name": self.conns[c].name or "?"}
            for c in lobby.member_conns
        ]
        event = protocol.LobbyState(
            lobby_id=lobby.lobby_id,
            host_id=self._provisional_id(lobby, lobby.host_conn),
            players=players,
            config=lobby.config.to_dict(),
            pack=lobby.pack_name,
            state=lobby.state,
        )
        self._broadcast_event(lobby, event)

    def _broadcast_event(self, lobby: Lobby, event) -> None:
        for member in lobby.member_conns:
            conn = self.conns.get(member)
            if conn is not None:
                self._push(conn, event)

    def _broadcast_game_events(self, lobby: Lobby, events) -> None:
        game = lobby.game
        assert game is not None
        recipients = [
            (player_id, self.conns[conn_id])
            for player_id, conn_id in game.conn_of_player.items()
            if conn_id is not None and conn_id in self.conns
        ]
        for event in events:
            for player_id, conn in recipients:
                self._push(conn, protocol.redact_for(player_id, event, game.state))
