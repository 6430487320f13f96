"""HTTP + WebSocket host for live sessions.

Endpoints
---------
    POST /api/sessions          {"config": {...}} or {"experiment": n, "seed": k}
                                -> {"id": ..., "ws": "/ws/<id>"}
    GET  /api/sessions/{id}     session status JSON
    GET  /api/sessions/{id}/log the append-only event log (NDJSON)
    GET  /ws/{id}               the wire-protocol WebSocket
    GET  /                      the browser client, when a built frontend
                                directory is configured

Each session's state is touched only from the event loop (asyncio is the
serializer); its clock task ticks at the configured sample rate and appends
to the per-session log file as it goes.
"""

from __future__ import annotations

import asyncio
import json
import secrets
from pathlib import Path
from typing import Optional

from aiohttp import WSMsgType, web

from ..errors import CoadaptError, SessionStateError
from ..harness import ExperimentConfig, config_from_dict
from .replay import encode_log_entry
from .session import Session, SessionStatus
from . import wire


class _Hosted:
    def __init__(self, session: Session, data_dir: Path):
        self.session = session
        self.path = data_dir / f"{session.id}.ndjson"
        self.flushed = 0
        self.outbox: asyncio.Queue[dict] = asyncio.Queue()
        self.clock_task: Optional[asyncio.Task] = None

    def flush_log(self) -> None:
        entries = self.session.log[self.flushed:]
        if not entries:
            return
        with self.path.open("a", newline="\n") as fh:
            for entry in entries:
                fh.write(encode_log_entry(entry) + "\n")
        self.flushed = len(self.session.log)

    async def push(self, events: list[dict]) -> None:
        for event in events:
            await self.outbox.put(event)


def build_app(data_dir: str | Path, frontend_dir: Optional[str | Path] = None,
              turbo: bool = False) -> web.Application:
    """The aiohttp application.  `turbo` drops the clock sleep (tests)."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    app = web.Application()
    app["sessions"] = {}
    app["data_dir"] = data_dir
    app["turbo"] = turbo

    app.router.add_post("/api/sessions", _create_session)
    app.router.add_get("/api/sessions/{sid}", _session_status)
    app.router.add_get("/api/sessions/{sid}/log", _session_log)
    app.router.add_get("/ws/{sid}", _websocket)
    app.router.add_get("/healthz", _health)
    if frontend_dir is not None and (Path(frontend_dir) / "index.html").is_file():
        frontend = Path(frontend_dir)

        async def _index(_request):
            raise web.HTTPFound("/app/index.html")

        app.router.add_get("/", _index)
        app.router.add_static("/app", frontend)
    app.on_shutdown.append(_shutdown)
    return app


async def _health(_request) -> web.Response:
    return web.json_response({"ok": True})


async def _create_session(request: web.Request) -> web.Response:
    try:
        body = await request.json()
    except json.JSONDecodeError:
        return web.json_response({"error": "body must be JSON"}, status=400)
    try:
        if "config" in body:
            cfg = config_from_dict(body["config"])
        else:
            cfg = ExperimentConfig(experiment=int(body["experiment"]),
                                   seed=int(body.get("seed", 0)))
    except (KeyError, TypeError, ValueError, CoadaptError) as exc:
        return web.json_response({"error": f"invalid config: {exc}"}, status=400)
    sid = secrets.token_hex(8)
    hosted = _Hosted(Session(sid, cfg), request.app["data_dir"])
    hosted.flush_log()
    request.app["sessions"][sid] = hosted
    return web.json_response({"id": sid, "ws": f"/ws/{sid}"})


def _lookup(request: web.Request) -> _Hosted:
    sid = request.match_info["sid"]
    hosted = request.app["sessions"].get(sid)
    if hosted is None:
        raise web.HTTPNotFound(text=json.dumps({"error": f"no session {sid}"}),
                               content_type="application/json")
    return hosted


async def _session_status(request: web.Request) -> web.Response:
    hosted = _lookup(request)
    return web.json_response(hosted.session.describe())


async def _session_log(request: web.Request) -> web.Response:
    hosted = _lookup(request)
    hosted.flush_log()
    return web.FileResponse(hosted.path,
                            headers={"Content-Type": "application/x-ndjson"})


async def _clock(app: web.Application, hosted: _Hosted) -> None:
    session = hosted.session
    period = 1.0 / session.cfg.protocol.sample_rate_hz
    loop = asyncio.get_running_loop()
    next_due = loop.time() + period
    try:
        while session.status not in (SessionStatus.DONE,):
            if not app["turbo"]:
                delay = next_due - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                next_due += period
            else:
                await asyncio.sleep(0)
            if session.status in (SessionStatus.TRIAL, SessionStatus.REST):
                await hosted.push(session.tick())
            hosted.flush_log()
    except asyncio.CancelledError:
        pass
    finally:
        hosted.flush_log()


async def _websocket(request: web.Request) -> web.WebSocketResponse:
    hosted = _lookup(request)
    session = hosted.session
    ws = web.WebSocketResponse()
    await ws.prepare(request)

    if hosted.clock_task is None or hosted.clock_task.done():
        hosted.clock_task = asyncio.create_task(_clock(request.app, hosted))

    async def sender():
        while True:
            event = await hosted.outbox.get()
            await ws.send_str(wire.encode(event))

    send_task = asyncio.create_task(sender())
    try:
        async for msg in ws:
            if msg.type != WSMsgType.TEXT:
                continue
            try:
                event = wire.decode_client_event(msg.data)
            except SessionStateError as exc:
                await ws.send_str(wire.encode(wire.error("bad-message", str(exc))))
                continue
            await hosted.push(session.handle(event))
            hosted.flush_log()
            if session.status is SessionStatus.DONE:
                # drain remaining events before closing
                while not hosted.outbox.empty():
                    await ws.send_str(wire.encode(await hosted.outbox.get()))
                break
    finally:
        send_task.cancel()
        hosted.flush_log()
    await ws.close()
    return ws


async def _shutdown(app: web.Application) -> None:
    for hosted in app["sessions"].values():
        if hosted.clock_task is not None:
            hosted.clock_task.cancel()
        hosted.flush_log()


def serve(port: int, data_dir: str | Path, host: str = "127.0.0.1",
          frontend_dir: Optional[str | Path] = None) -> None:
    """Blocking entry point used by the CLI."""
    app = build_app(data_dir, frontend_dir=frontend_dir)
    web.run_app(app, host=host, port=port)
