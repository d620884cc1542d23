"""Websocket service exposing one session over a JSON message protocol.

Client -> server:  {"type": "command", "command": {seq, kind, payload}}
                   {"type": "sync_request"}
Server -> client:  {"type": "full_state", "snapshot": {...}}
                   {"type": "delta", "seq": N, "changes": [...]}
                   {"type": "error", "seq": N, "code": "...", "message": "..."}

Commands are funneled through one asyncio lock (single-writer), so every
command yields exactly one delta or error carrying its seq, and deltas are
broadcast to all connected clients in seq order with no gaps. A command with
seq 0 or no seq asks the server to assign the next one. New clients receive
full_state first; sync_request re-sends it at any time.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import socket
from pathlib import Path
from typing import Any

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .canon import canonical_hash
from .errors import PortInUseError, ProbekitError
from .graph import Graph
from .session import SessionCommand, SessionState

log = logging.getLogger("probekit.service")


def configure_logging() -> None:
    """Honor the PROBEKIT_LOG environment variable (DEBUG/INFO/WARNING/...)."""
    level = os.environ.get("PROBEKIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


class SessionHub:
    """Single session, single writer, many readers."""

    def __init__(self, state: SessionState | None = None,
                 session_id: str = "default", log_path: str | Path | None = None):
        self.state = state if state is not None else SessionState()
        self.session_id = session_id  # reserved for future multi-session use
        self.lock = asyncio.Lock()
        self.clients: list[WebSocket] = []
        self.command_log: list[SessionCommand] = []
        self._log_path = Path(log_path) if log_path else None

    def bootstrap_graph(self, graph: Graph) -> None:
        """Load a graph as command #1 so the recorded log stays replayable
        from an empty state on its own."""
        command = SessionCommand(self.state.applied_seq + 1, "LoadGraph",
                                 {"graph": graph.to_dict()})
        self.state.apply(command)
        self._record(command)

    def _record(self, command: SessionCommand) -> None:
        self.command_log.append(command)
        if self._log_path is not None:
            with self._log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(command.to_dict()) + "\n")

    def full_state_message(self) -> dict[str, Any]:
        return {"type": "full_state", "snapshot": self.state.snapshot(),
                "render": self.state.render_data()}

    async def handle_command(self, data: Any, issuer: WebSocket | None = None) -> None:
        """Apply one command and broadcast its delta, all under the writer
        lock so deltas reach every client in seq order with no gaps; errors
        go back to the issuing client only (the state did not change)."""
        async with self.lock:
            if not isinstance(data, dict):
                await self._send(issuer, {"type": "error", "seq": 0,
                                          "code": "InvalidPayload",
                                          "message": "command must be an object"})
                return
            if data.get("seq") in (None, 0):
                data = dict(data)
                data["seq"] = self.state.applied_seq + 1
            try:
                command = SessionCommand.from_dict(data)
                changes = self.state.apply(command)
            except ProbekitError as exc:
                await self._send(issuer, {"type": "error", "seq": data.get("seq", 0),
                                          "code": exc.code, "message": str(exc)})
                return
            self._record(command)
            await self._broadcast({"type": "delta", "seq": command.seq,
                                   "changes": changes})

    async def _send(self, client: WebSocket | None, message: dict[str, Any]) -> None:
        if client is not None:
            await client.send_json(message)

    async def _broadcast(self, message: dict[str, Any]) -> None:
        dead = []
        for client in self.clients:
            try:
                await client.send_json(message)
            except Exception:
                dead.append(client)
        for client in dead:
            if client in self.clients:
                self.clients.remove(client)


def create_app(hub: SessionHub, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="probekit")

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "session": hub.session_id,
                "applied_seq": hub.state.applied_seq}

    @app.get("/session/state")
    async def session_state():
        async with hub.lock:
            return hub.state.snapshot()

    @app.get("/session/hash")
    async def session_hash():
        async with hub.lock:
            return {"hash": canonical_hash(hub.state.snapshot()),
                    "applied_seq": hub.state.applied_seq}

    @app.get("/session/log")
    async def session_log():
        async with hub.lock:
            return {"commands": [c.to_dict() for c in hub.command_log]}

    @app.websocket("/ws")
    async def websocket_endpoint(websocket: WebSocket):
        await websocket.accept()
        async with hub.lock:
            hub.clients.append(websocket)
            await websocket.send_json(hub.full_state_message())
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    data = json.loads(raw)
                except json.JSONDecodeError:
                    await websocket.send_json({"type": "error", "seq": 0,
                                               "code": "MalformedMessage",
                                               "message": "invalid JSON"})
                    continue
                kind = data.get("type") if isinstance(data, dict) else None
                if kind == "command":
                    await hub.handle_command(data.get("command"), issuer=websocket)
                elif kind == "sync_request":
                    async with hub.lock:
                        await websocket.send_json(hub.full_state_message())
                else:
                    await websocket.send_json({"type": "error", "seq": 0,
                                               "code": "MalformedMessage",
                                               "message": f"unknown message type {kind!r}"})
        except WebSocketDisconnect:
            pass
        finally:
            if websocket in hub.clients:
                hub.clients.remove(websocket)

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")

    return app


def check_port_free(host: str, port: int) -> None:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
        except OSError as exc:
            raise PortInUseError(f"cannot bind {host}:{port}: {exc}") from exc


def serve(port: int = 8080, graph_path: str | None = None, host: str = "127.0.0.1",
          static_dir: str | None = None, log_path: str | None = None,
          session_id: str = "default", config_path: str | None = None) -> None:
    """Run the service (blocking). Raises PortInUse / BadGraphFile upfront."""
    configure_logging()
    check_port_free(host, port)
    from .cli import load_session_config

    cue_params, kappa = load_session_config(config_path)
    state = SessionState(cue_params=cue_params, kappa=kappa if kappa is not None else 1.0)
    hub = SessionHub(state, session_id=session_id, log_path=log_path)
    if graph_path is not None:
        hub.bootstrap_graph(Graph.load(graph_path))  # BadGraphFile on trouble
    app = create_app(hub, static_dir=static_dir)
    import uvicorn

    log.info("serving session %s on %s:%d", session_id, host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
