"""Network bindings: raw TCP (one envelope per line) and WebSocket
(one envelope per text frame, endpoint ``/ws``).

Both transports feed the same :class:`GameServer` core; everything runs on
one asyncio loop, so per-session ordering falls out of the loop's
serialization. Outbound WebSocket sends go through a per-connection queue
drained by a sender task to keep frame order.
"""

from __future__ import annotations

import asyncio
import itertools
import logging
from pathlib import Path
from typing import Optional

from websockets.asyncio.server import serve as ws_serve

from ..core.types import GameConfig
from ..errors import OversizedLine
from ..protocol import MAX_LINE_BYTES
from .session import GameServer

logger = logging.getLogger(__name__)

TICK_INTERVAL = 0.2


def parse_bind(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"bind address must be host:port, got {text!r}")
    return host, int(port)


class NetServer:
    """Owns the GameServer core plus all live transport connections."""

    def __init__(
        self,
        pack_dir: Optional[Path] = None,
        log_dir: Optional[Path] = None,
        base_config: Optional[GameConfig] = None,
    ):
        self.core = GameServer(send=self._send, log_dir=log_dir, base_config=base_config)
        if pack_dir is not None:
            loaded = self.core.load_pack_dir(pack_dir)
            logger.info("loaded %d packs from %s", loaded, pack_dir)
        self._ids = itertools.count(1)
        self._tcp_writers: dict[str, asyncio.StreamWriter] = {}
        self._ws_queues: dict[str, asyncio.Queue] = {}

    # --- outbound ----------------------------------------------------------

    def _send(self, conn_id: str, data: bytes) -> None:
        writer = self._tcp_writers.get(conn_id)
        if writer is not None:
            if not writer.is_closing():
                writer.write(data)
            return
        queue = self._ws_queues.get(conn_id)
        if queue is not None:
            queue.put_nowait(data)

    # --- raw TCP -----------------------------------------------------------

    async def _handle_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        conn_id = f"t{next(self._ids)}"
        self._tcp_writers[conn_id] = writer
        self.core.on_connect(conn_id)
        try:
            while True:
                try:
                    line = await reader.readline()
                except (ValueError, asyncio.LimitOverrunError):
                    self.core.on_line(conn_id, b"x" * (MAX_LINE_BYTES + 1))  # surfaces OversizedLine
                    break
                if not line:
                    break
                self.core.on_line(conn_id, line)
        except (ConnectionResetError, BrokenPipeError):
            pass
        finally:
            self.core.on_disconnect(conn_id)
            self._tcp_writers.pop(conn_id, None)
            writer.close()

    async def serve_tcp(self, host: str, port: int) -> asyncio.AbstractServer:
        server = await asyncio.start_server(
            self._handle_tcp, host, port, limit=2 * MAX_LINE_BYTES
        )
        logger.info("tcp listening on %s:%d", host, port)
        return server

    # --- WebSocket -----------------------------------------------------------

    async def _handle_ws(self, websocket) -> None:
        path = websocket.request.path if websocket.request else "/"
        if path not in ("/ws", "/"):
            await websocket.close(code=1008, reason="unknown path")
            return
        conn_id = f"w{next(self._ids)}"
        queue: asyncio.Queue = asyncio.Queue()
        self._ws_queues[conn_id] = queue
        self.core.on_connect(conn_id)

        async def sender() -> None:
            while True:
                data = await queue.get()
                if data is None:
                    return
                await websocket.send(data.decode("utf-8").rstrip("\n"))

        sender_task = asyncio.create_task(sender())
        try:
            async for message in websocket:
                raw = message.encode("utf-8") if isinstance(message, str) else message
                self.core.on_line(conn_id, raw)
        except Exception:
            pass
        finally:
            self.core.on_disconnect(conn_id)
            self._ws_queues.pop(conn_id, None)
            queue.put_nowait(None)
            sender_task.cancel()

    async def serve_ws(self, host: str, port: int):
        server = await ws_serve(self._handle_ws, host, port, max_size=MAX_LINE_BYTES + 1024)
        logger.info("websocket listening on ws://%s:%d/ws", host, port)
        return server

    # --- lifecycle -----------------------------------------------------------

    async def tick_forever(self) -> None:
        while True:
            await asyncio.sleep(TICK_INTERVAL)
            self.core.tick()

    async def run(
        self,
        ws_bind: Optional[tuple[str, int]] = None,
        tcp_bind: Optional[tuple[str, int]] = None,
    ) -> None:
        """Serve until cancelled."""
        if ws_bind is None and tcp_bind is None:
            raise ValueError("nothing to serve: no bind address")
        servers = []
        if tcp_bind is not None:
            servers.append(await self.serve_tcp(*tcp_bind))
        if ws_bind is not None:
            servers.append(await self.serve_ws(*ws_bind))
        try:
            await self.tick_forever()
        finally:
            for server in servers:
                server.close()
            self.core.close()
