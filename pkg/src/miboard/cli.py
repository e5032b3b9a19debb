"""Command-line entry point: serve, simulate, and replay.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bots
from .content import load_text_pack
from .core.types import GameConfig
from .errors import MiboardError
from .server.logs import replay_file


class CliParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message: str):  # noqa: A002 - argparse signature
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> CliParser:
    parser = CliParser(prog="miboard", description="MiBoard game server and tools")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    serve = sub.add_parser("serve", parents=[], help="run the game server (blocks)")
    serve.add_argument(
        "--bind",
        default=os.environ.get("MIBOARD_BIND", "127.0.0.1:8765"),
        help="WebSocket bind address host:port (env MIBOARD_BIND)",
    )
    serve.add_argument("--tcp", default=None, help="also serve raw TCP on host:port")
    serve.add_argument("--packs", default="packs", help="directory of text pack JSON files")
    serve.add_argument("--config", default=None, help="GameConfig JSON file (lobby defaults)")
    serve.add_argument(
        "--log-dir",
        default=os.environ.get("MIBOARD_LOG_DIR", "logs"),
        help="directory for session logs (env MIBOARD_LOG_DIR)",
    )

    sim = sub.add_parser("simulate", help="run bot games and write a report")
    sim.add_argument("--players", type=int, default=4)
    sim.add_argument("--games", type=int, default=100)
    sim.add_argument("--seed", type=int, default=1)
    sim.add_argument(
        "--policies",
        default="uniform",
        help="per-seat comma list: uniform | oracle:P | stubborn | swayed, with +greedy",
    )
    sim.add_argument("--packs", default="packs", help="directory of text pack JSON files")
    sim.add_argument("--pack", default=None, help="pack name (file stem); default: first")
    sim.add_argument("--config", default=None, help="GameConfig JSON file")
    sim.add_argument("--report", default=None, help="write the JSON report here (default stdout)")
    sim.add_argument("--csv", default=None, help="also write per-game CSV rows here")
    sim.add_argument("--log-dir", default=None, help="write replayable per-game logs here")

    rep = sub.add_parser("replay", help="replay a session log and print digests")
    rep.add_argument("--log", required=True, help="path to a .mblog file")
    return parser


def load_config(path: Optional[str]) -> GameConfig:
    if path is None:
        return GameConfig()
    return GameConfig.from_dict(json.loads(Path(path).read_text()))


def _pick_pack(pack_dir: str, name: Optional[str]):
    directory = Path(pack_dir)
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise MiboardError(f"no packs found in {directory}")
    if name is None:
        return load_text_pack(paths[0].read_bytes())
    path = directory / f"{name}.json"
    if not path.exists():
        raise MiboardError(f"no pack {name!r} in {directory}")
    return load_text_pack(path.read_bytes())


def cmd_serve(args: argparse.Namespace) -> int:
    from .server.app import NetServer, parse_bind

    net = NetServer(
        pack_dir=Path(args.packs),
        log_dir=Path(args.log_dir),
        base_config=load_config(args.config),
    )
    ws_bind = parse_bind(args.bind)
    tcp_bind = parse_bind(args.tcp) if args.tcp else None
    print(f"serving ws://{ws_bind[0]}:{ws_bind[1]}/ws", file=sys.stderr)
    if tcp_bind:
        print(f"serving tcp on {tcp_bind[0]}:{tcp_bind[1]}", file=sys.stderr)
    try:
        asyncio.run(net.run(ws_bind=ws_bind, tcp_bind=tcp_bind))
    except KeyboardInterrupt:
        pass
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    pack = _pick_pack(args.packs, args.pack)
    policies = bots.parse_policies(args.policies, args.players)
    rows: list[bots.GameRow] = []
    report = bots.simulate(
        config,
        policies,
        pack,
        n_games=args.games,
        seed=args.seed,
        log_dir=Path(args.log_dir) if args.log_dir else None,
        rows_out=rows if args.csv else None,
    )
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        bots.write_csv(Path(args.csv), rows)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    results = replay_file(args.log)
    for result in results:
        state = result.final_state
        winner = state.winner or "-"
        status = "verified" if result.verified else (
            "no recorded digest" if result.recorded_digest is None else "MISMATCH"
        )
        print(
            f"{result.lobby_id}: {result.entries_applied} entries, "
            f"{state.turn_count} turns, winner {winner}, "
            f"digest {result.computed_digest} ({status})"
        )
    return 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "serve":
            return cmd_serve(args)
        if args.subcommand == "simulate":
            return cmd_simulate(args)
        if args.subcommand == "replay":
            return cmd_replay(args)
    except MiboardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
