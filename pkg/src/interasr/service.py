"""HTTP service exposing live interactive sessions.

Sessions are in-memory with idle-TTL eviction; a server restart forgets them.
Turns on one session are serialized (a second in-flight turn gets 409), while
distinct sessions proceed in parallel.
"""

from __future__ import annotations

import tempfile
import threading
import time
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool
from starlette.datastructures import UploadFile

from .agents import TemplateSet
from .errors import ConfigError, InterasrError
from .gateway import AudioRef, ModelGateway
from .session import Session

DEFAULT_TTL_SECONDS = 30 * 60

_ALLOWED_OVERRIDES = {"session_id"}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


class _SessionEntry:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.created_at = datetime.now(timezone.utc).isoformat()
        self.last_used = time.monotonic()


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self._entries: dict[str, _SessionEntry] = {}
        self._ttl = ttl_seconds
        self._lock = threading.Lock()

    def _evict(self) -> None:
        now = time.monotonic()
        dead = [sid for sid, e in self._entries.items() if now - e.last_used > self._ttl]
        for sid in dead:
            del self._entries[sid]

    def add(self, session: Session) -> _SessionEntry:
        with self._lock:
            self._evict()
            if session.session_id in self._entries:
                raise ApiError(409, "conflict", "session id already exists")
            entry = _SessionEntry(session)
            self._entries[session.session_id] = entry
            return entry

    def get(self, session_id: str) -> _SessionEntry:
        with self._lock:
            self._evict()
            entry = self._entries.get(session_id)
            if entry is None:
                raise ApiError(404, "not_found", f"unknown session {session_id!r}")
            entry.last_used = time.monotonic()
            return entry


def _snapshot(entry: _SessionEntry) -> dict:
    state = entry.session.state
    return {
        "session_id": state.session_id,
        "created_at": entry.created_at,
        "current_transcript": state.current_transcript,
        "turn_index": state.turn_index,
    }


def create_app(
    gateway: ModelGateway,
    templates: TemplateSet,
    ttl_seconds: float = DEFAULT_TTL_SECONDS,
    spool_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="interasr", docs_url=None, redoc_url=None)
    store = SessionStore(ttl_seconds=ttl_seconds)
    spool = Path(spool_dir) if spool_dir else Path(tempfile.mkdtemp(prefix="interasr-audio-"))
    spool.mkdir(parents=True, exist_ok=True)

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request):
        body = {}
        raw = await request.body()
        if raw:
            try:
                body = await request.json()
            except Exception:
                raise ApiError(400, "bad_request", "body must be a JSON object")
        if not isinstance(body, dict):
            raise ApiError(400, "bad_request", "body must be a JSON object")
        unknown = set(body) - _ALLOWED_OVERRIDES
        if unknown:
            raise ApiError(400, "bad_request", f"unknown override keys: {sorted(unknown)}")
        try:
            session = Session(gateway, templates, session_id=body.get("session_id"))
        except ConfigError as exc:
            raise ApiError(503, "backend_unavailable", str(exc))
        entry = store.add(session)
        return _snapshot(entry)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return _snapshot(store.get(session_id))

    @app.post("/v1/sessions/{session_id}/turns")
    async def post_turn(session_id: str, request: Request):
        entry = store.get(session_id)
        content_type = request.headers.get("content-type", "")
        audio: AudioRef | None = None
        text: str | None = None
        if content_type.startswith("multipart/"):
            form = await request.form()
            upload = form.get("audio")
            if not isinstance(upload, UploadFile):
                raise ApiError(400, "bad_request", "multipart body needs an 'audio' part")
            data = await upload.read()
            if not data:
                raise ApiError(400, "bad_request", "audio part is empty")
            path = spool / f"{session_id}-{entry.session.state.turn_index}-{upload.filename or 'clip'}"
            path.write_bytes(data)
            audio = AudioRef(locator=str(path))
        else:
            try:
                body = await request.json()
            except Exception:
                raise ApiError(400, "bad_request", "body must be JSON {\"text\": ...}")
            text = body.get("text") if isinstance(body, dict) else None
            if not text or not isinstance(text, str):
                raise ApiError(400, "bad_request", "body must carry a non-empty 'text'")

        if not entry.lock.acquire(blocking=False):
            raise ApiError(409, "turn_in_flight", "a turn is already in flight for this session")
        try:
            # Off the event loop: turns on other sessions stay responsive
            # while this (potentially slow) turn runs.
            record = await run_in_threadpool(entry.session.step, text=text, audio=audio)
        except InterasrError as exc:
            raise ApiError(502, "backend_error", str(exc))
        finally:
            entry.lock.release()
        if record.error is not None:
            return JSONResponse(
                status_code=502,
                content={"code": "backend_error", "message": record.error,
                         "turn": record.to_dict()},
            )
        return record.to_dict()

    @app.get("/v1/sessions/{session_id}/trajectory")
    def get_trajectory(session_id: str):
        entry = store.get(session_id)
        return [record.to_dict() for record in entry.session.trajectory()]

    return app


def serve(config_path: str, port: int = 8080, host: str = "127.0.0.1") -> None:
    """Blocking server entry point used by the CLI."""
    import uvicorn

    from .config import load_config

    config = load_config(config_path)
    gateway = config.build_gateway()
    app = create_app(gateway, config.load_templates())
    uvicorn.run(app, host=host, port=port, log_level="warning")
