"""Websocket front door for a live simulation session.

One client per session: the session engine steps at a fixed wall-clock
rate, state broadcasts go out at a fixed (lower) rate, and the freshest
client command is applied atomically at the next step boundary. When the
client disconnects the session's record is persisted for headless replay.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from pathlib import Path
from typing import Optional

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from hybridsail.teleop import (
    BROADCAST_HZ,
    PROTOCOL_VERSION,
    STEPS_PER_SECOND,
    ProtocolError,
    SessionEngine,
    save_record,
)

log = logging.getLogger(__name__)

CLOSE_BUSY = 1013          # try again later: a client already owns the session
CLOSE_PROTOCOL = 1002      # protocol violation


class SessionServer:
    def __init__(self, engine: SessionEngine, out_dir: Optional[Path] = None):
        self.engine = engine
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.busy = False
        self.sessions_served = 0

    async def handler(self, ws) -> None:
        if self.busy:
            await ws.close(code=CLOSE_BUSY, reason="session in use")
            return
        self.busy = True
        self.engine.reset()
        stepper = asyncio.create_task(self._step_loop())
        broadcaster = asyncio.create_task(self._broadcast_loop(ws))
        try:
            await ws.send(json.dumps(self.engine.hello()))
            async for raw in ws:
                try:
                    reply = self._dispatch(raw)
                except ProtocolError as exc:
                    await ws.send(json.dumps({
                        "type": "error", "version": PROTOCOL_VERSION,
                        "code": "protocol", "message": str(exc)}))
                    await ws.close(code=CLOSE_PROTOCOL, reason=str(exc)[:100])
                    break
                if reply is not None:
                    await ws.send(json.dumps(reply))
        except ConnectionClosed:
            pass
        finally:
            stepper.cancel()
            broadcaster.cancel()
            self._persist()
            self.busy = False
            self.sessions_served += 1

    def _dispatch(self, raw) -> Optional[dict]:
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"not valid JSON: {exc}")
        if not isinstance(msg, dict) or "type" not in msg:
            raise ProtocolError("message must be an object with a 'type' field")
        kind = msg["type"]
        if kind == "command":
            self.engine.submit_command(msg)
            return None
        if kind == "control":
            return self.engine.control(msg)
        if kind == "ping":
            return {"type": "pong", "version": PROTOCOL_VERSION, "tick": self.engine.tick}
        raise ProtocolError(f"unknown message type {kind!r}")

    async def _step_loop(self) -> None:
        loop = asyncio.get_running_loop()
        next_step = loop.time()
        while True:
            period = 1.0 / (STEPS_PER_SECOND * self.engine.rate)
            self.engine.step_once()
            next_step += period
            delay = next_step - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_step = loop.time()  # fell behind; do not burst-step

    async def _broadcast_loop(self, ws) -> None:
        period = 1.0 / BROADCAST_HZ
        try:
            while True:
                await ws.send(json.dumps(self.engine.broadcast()))
                await asyncio.sleep(period)
        except ConnectionClosed:
            pass

    def _persist(self) -> None:
        if self.out_dir is None:
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        record = self.engine.finish()
        stamp = time.strftime("%Y%m%d-%H%M%S")
        path = self.out_dir / f"session-{stamp}-{self.sessions_served}.json"
        save_record(record, path)
        log.info("session record written to %s", path)


async def run_server(engine: SessionEngine, host: str, port: int,
                     out_dir: Optional[Path] = None,
                     ready: Optional[asyncio.Event] = None) -> None:
    """Serve one session endpoint until cancelled."""
    server = SessionServer(engine, out_dir=out_dir)
    async with serve(server.handler, host, port):
        log.info("teleop session server listening on ws://%s:%d", host, port)
        if ready is not None:
            ready.set()
        await asyncio.Future()
