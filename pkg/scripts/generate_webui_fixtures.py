#!/usr/bin/env python3
"""Generate the golden transcript fixture for the browser client tests.

Drives the real server core through one scripted 3-player game, recording
everything the second player (Bea) sends and receives, in order. The
frontend e2e test replays this script: every "send" step must be produced
by an actual DOM interaction, and every "recv" line is fed to the app.
"""

from __future__ import annotations

import json
import sys
from collections import defaultdict
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from miboard import protocol  # noqa: E402
from miboard.content import load_text_pack  # noqa: E402
from miboard.core.types import Phase, Strategy  # noqa: E402
from miboard.server.session import GameServer  # noqa: E402

PERSPECTIVE = "c2"
OUT = REPO / "frontend" / "tests" / "fixtures" / "scripted_game.json"

sent: dict[str, list[bytes]] = defaultdict(list)
steps: list[dict] = []
drained = 0


def drain() -> None:
    """Append any new lines received by the perspective connection."""
    global drained
    lines = sent[PERSPECTIVE]
    while drained < len(lines):
        steps.append({"dir": "recv", "line": lines[drained].decode().rstrip("\n")})
        drained += 1


def send(server: GameServer, conn: str, command: protocol.Command) -> None:
    if conn == PERSPECTIVE:
        encoded = protocol.encode(protocol.envelope(command)).decode().rstrip("\n")
        steps.append({"dir": "send", "line": encoded})
    server.on_line(conn, protocol.encode(protocol.envelope(command)))
    drain()


def main() -> None:
    server = GameServer(
        send=lambda cid, data: sent[cid].append(data),
        clock=lambda: 0.0,
        entropy=lambda: 20260808,
    )
    server.register_pack(
        "cells", load_text_pack((REPO / "packs" / "cell_division.json").read_bytes())
    )
    for conn in ("c1", "c2", "c3"):
        server.on_connect(conn)

    send(server, "c1", protocol.Join(name="Ada"))
    send(server, "c1", protocol.CreateLobby(config_overrides={"board_length": 10}, pack="cells"))
    lobby_id = next(iter(server.lobbies))
    send(server, "c2", protocol.Join(name="Bea", lobby=lobby_id))
    send(server, "c3", protocol.Join(name="Cal", lobby=lobby_id))
    send(server, "c2", protocol.Chat(text="hello everyone"))
    send(server, "c1", protocol.StartGame())

    lobby = server.lobbies[lobby_id]
    game = lobby.game
    conn_of = {"p1": "c1", "p2": "c2", "p3": "c3"}
    guesser_round1 = [Strategy.BRIDGING, Strategy.ELABORATION]  # never unanimous
    chatted = False

    for _turn in range(200):
        state = game.state
        if state.phase is Phase.FINISHED:
            break
        reader_id = state.reader.player_id
        reader_conn = conn_of[reader_id]
        send(server, reader_conn, protocol.SubmitSE(
            text="This links back to what the earlier sentences told us."
        ))
        guessers = [p for p in ("p1", "p2", "p3") if p != reader_id]
        for guesser, strategy in zip(guessers, guesser_round1):
            send(server, conn_of[guesser], protocol.Vote(strategy=strategy))
        assert game.state.phase is Phase.DISCUSSION
        if not chatted:
            send(server, "c2", protocol.Chat(text="I am not convinced it was bridging"))
            chatted = True
        for pid in ("p1", "p2", "p3"):
            send(server, conn_of[pid], protocol.Ready())
        assert game.state.phase is Phase.REVOTE
        for guesser in guessers:
            send(server, conn_of[guesser], protocol.Vote(strategy=Strategy.PARAPHRASING))
        assert game.state.phase in (Phase.MOVEMENT, Phase.FINISHED)
        if game.state.phase is Phase.MOVEMENT:
            send(server, reader_conn, protocol.Roll())

    assert game.state.phase is Phase.FINISHED, "scripted game never finished"
    send(server, "c2", protocol.Rematch())

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(
        json.dumps(
            {
                "myName": "Bea",
                "myPlayerId": "p2",
                "lobbyId": lobby_id,
                "winnerId": game.state.winner,
                "steps": steps,
            },
            indent=1,
        )
        + "\n"
    )
    sends = sum(1 for s in steps if s["dir"] == "send")
    recvs = len(steps) - sends
    print(f"wrote {OUT} ({sends} sends, {recvs} recvs, winner {game.state.winner})")


if __name__ == "__main__":
    main()
