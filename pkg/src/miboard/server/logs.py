"""Append-only session logs and deterministic replay.

A ``.mblog`` file is a sequence of wire-codec lines: a ``log_header``
opens each game (rematches append a fresh header to the same file),
followed by that game's inputs in applied order (``log_command``,
``log_timer``, ``log_connection``) and a closing ``log_digest`` of the
final state. Replaying the inputs from the header's seed/config/pack
must land on exactly the recorded digest.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Union

from .. import protocol
from ..content import TextPack, load_text_pack
from ..core import engine
from ..core.types import GameConfig, GameState
from ..errors import CorruptLog, MiboardError, VersionMismatch
from . import dispatch


class SessionLogWriter:
    """Writes one envelope per line. The live server flushes per line so
    logs survive a crash anywhere; batch writers (the simulator) skip the
    flush and rely on close()."""

    def __init__(self, stream: IO[bytes], flush_each: bool = False):
        self._stream = stream
        self._flush_each = flush_each

    @classmethod
    def open(cls, path: Union[str, os.PathLike]) -> "SessionLogWriter":
        return cls(open(path, "ab"), flush_each=True)

    def close(self) -> None:
        self._stream.close()

    def _write(self, payload) -> None:
        self._stream.write(protocol.encode(protocol.envelope(payload)))
        if self._flush_each:
            self._stream.flush()

    def write_header(
        self,
        lobby_id: str,
        seed: int,
        config: GameConfig,
        pack: TextPack,
        roster: list[tuple[str, str]],
        started_at: float,
    ) -> None:
        self._write(
            protocol.LogHeader(
                protocol=protocol.PROTOCOL_VERSION,
                lobby_id=lobby_id,
                seed=seed,
                config=config.to_dict(),
                pack=pack.to_dict(),
                pack_digest=pack.digest(),
                roster=[{"id": pid, "name": name} for pid, name in roster],
                started_at=started_at,
            )
        )

    def write_command(self, ts: float, actor: str, command: protocol.Command) -> None:
        self._write(protocol.LogCommand(ts=ts, actor=actor, command=command))

    def write_timer(self, ts: float, kind: str, round_no: Optional[int] = None) -> None:
        self._write(protocol.LogTimer(ts=ts, kind=kind, round=round_no))

    def write_connection(self, ts: float, player_id: str, connected: bool) -> None:
        self._write(protocol.LogConnection(ts=ts, player_id=player_id, connected=connected))

    def write_digest(self, ts: float, state: GameState) -> None:
        self._write(protocol.LogDigest(ts=ts, digest=state.digest(), turn_count=state.turn_count))


@dataclass
class ReplayResult:
    """Outcome of replaying one game segment of a log."""

    lobby_id: str
    final_state: GameState
    computed_digest: str
    recorded_digest: Optional[str]
    entries_applied: int

    @property
    def verified(self) -> bool:
        return self.recorded_digest is not None and self.recorded_digest == self.computed_digest


def read_log_lines(data: bytes) -> list[protocol.Envelope]:
    """Decode every line of a log. A file that does not end in a newline
    was cut off mid-write and is corrupt."""
    if not data:
        raise CorruptLog("empty log")
    if not data.endswith(b"\n"):
        raise CorruptLog("log truncated mid-line")
    envelopes = []
    for i, line in enumerate(data.splitlines()):
        try:
            envelopes.append(protocol.decode(line))
        except MiboardError as exc:
            raise CorruptLog(f"line {i + 1}: {exc}") from exc
    return envelopes


def replay_entries(entries: Iterable[protocol.Envelope], verify: bool = True) -> list[ReplayResult]:
    """Replay decoded log lines; returns one result per game segment.

    A ``log_digest`` line asserts the state at the moment it was written
    (entries may legitimately follow it, e.g. players disconnecting after
    game over), so each digest is checked in place as replay passes it.
    """
    results: list[ReplayResult] = []
    state: Optional[GameState] = None
    lobby_id = ""
    recorded: Optional[str] = None
    computed_at_digest: Optional[str] = None
    applied = 0

    def close_segment() -> None:
        nonlocal state, recorded, computed_at_digest, applied
        if state is None:
            return
        results.append(
            ReplayResult(
                lobby_id=lobby_id,
                final_state=state,
                computed_digest=computed_at_digest if recorded is not None else state.digest(),
                recorded_digest=recorded,
                entries_applied=applied,
            )
        )
        state, recorded, computed_at_digest, applied = None, None, None, 0

    for env in entries:
        payload = env.payload
        if isinstance(payload, protocol.LogHeader):
            close_segment()
            if payload.protocol != protocol.PROTOCOL_VERSION:
                raise VersionMismatch(f"log protocol {payload.protocol!r} unsupported")
            try:
                config = GameConfig.from_dict(payload.config)
                pack = load_text_pack(json.dumps(payload.pack))
                roster = [(entry["id"], entry["name"]) for entry in payload.roster]
                state, _events = engine.new_game(config, pack, roster, payload.seed)
            except MiboardError as exc:
                raise CorruptLog(f"bad header: {exc}") from exc
            if pack.digest() != payload.pack_digest:
                raise CorruptLog("pack digest does not match embedded pack")
            lobby_id = payload.lobby_id
            continue
        if state is None:
            raise CorruptLog("log entry before header")
        try:
            if isinstance(payload, protocol.LogCommand):
                if dispatch.is_game_command(payload.command):
                    dispatch.apply_command(state, payload.actor, payload.command)
                    applied += 1
            elif isinstance(payload, protocol.LogTimer):
                dispatch.apply_timer(state, payload.kind, payload.round)
                applied += 1
            elif isinstance(payload, protocol.LogConnection):
                dispatch.apply_connection(state, payload.player_id, payload.connected)
                applied += 1
            elif isinstance(payload, protocol.LogDigest):
                recorded = payload.digest
                computed_at_digest = state.digest()
                if verify and recorded != computed_at_digest:
                    raise CorruptLog(
                        f"digest mismatch for {lobby_id}: recorded {recorded[:12]}, "
                        f"replayed {computed_at_digest[:12]}"
                    )
            else:
                raise CorruptLog(f"unexpected {env.kind} entry in log")
        except MiboardError as exc:
            if isinstance(exc, CorruptLog):
                raise
            raise CorruptLog(f"entry {applied + 1} no longer applies: {exc}") from exc
    close_segment()
    if not results:
        raise CorruptLog("log has no game segments")
    return results


def replay_file(path: Union[str, os.PathLike], verify: bool = True) -> list[ReplayResult]:
    with open(path, "rb") as fh:
        data = fh.read()
    return replay_entries(read_log_lines(data), verify=verify)


def replay_bytes(data: bytes, verify: bool = True) -> list[ReplayResult]:
    return replay_entries(read_log_lines(data), verify=verify)
