"""HTTP surface of the gate service.

JSON over HTTP, one in-memory session store, per-session locks so
concurrent requests to the same session serialize. Every error leaves as
a uniform {"error": code, "detail": text} body. Endpoints are written as
sync handlers on purpose: the framework runs them on a thread pool, and
the per-session lock is what defines the consistency model.
"""

from __future__ import annotations

import json
import logging
import secrets
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..agents.common import greedy_checkpoint_policy
from ..config import AppConfig
from ..errors import (
    CheckpointError,
    ConfigurationError,
    GateClosedError,
    GaterlError,
    NotFoundError,
    OrderingError,
    SequencingError,
    SessionExpiredError,
    UpstreamError,
    UsageError,
    ValidationError,
)
from .chat import make_backend
from .core import CONDITIONS, GateSessionCore

log = logging.getLogger("gaterl.server")

_ERROR_MAP = {
    ValidationError: (400, "validation"),
    ConfigurationError: (400, "configuration"),
    CheckpointError: (400, "configuration"),
    NotFoundError: (404, "not_found"),
    SessionExpiredError: (410, "expired"),
    OrderingError: (409, "ordering"),
    SequencingError: (409, "sequencing"),
    UsageError: (409, "usage"),
    GateClosedError: (403, "gate_closed"),
    UpstreamError: (502, "upstream"),
}


def parse_timestamp(text: str) -> float:
    """ISO-8601 (UTC assumed when naive) -> epoch seconds."""
    if not isinstance(text, str) or not text:
        raise ValidationError("ts must be an ISO-8601 timestamp string")
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ValidationError(f"bad timestamp {text!r}: {exc}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def iso_utc(seconds: float) -> str:
    return datetime.fromtimestamp(seconds, tz=timezone.utc).isoformat()


class CreateSessionBody(BaseModel):
    condition: str
    checkpoint: str | None = None


class EventBody(BaseModel):
    type: str
    ts: str
    question_id: str | None = None
    correct: bool | None = None


class ChatBody(BaseModel):
    message: str


@dataclass
class Session:
    session_id: str
    condition: str
    core: GateSessionCore
    created_at: float
    last_activity: float
    stream: list = field(default_factory=list)  # events + chat markers, in order
    transcript: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def client_events(self) -> list:
        return [e for e in self.stream if e["type"] != "chat_ok"]


class SessionStore:
    """In-memory sessions with idle expiry; `clock` is injectable for tests."""

    def __init__(self, ttl_seconds: float, clock=time.time):
        self.ttl = ttl_seconds
        self.clock = clock
        self._sessions: dict = {}
        self._lock = threading.Lock()

    def create(self, condition: str, core: GateSessionCore) -> Session:
        now = self.clock()
        session = Session(
            session_id=secrets.token_urlsafe(16),
            condition=condition,
            core=core,
            created_at=now,
            last_activity=now,
        )
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise NotFoundError(f"unknown session {session_id!r}")
            if self.clock() - session.last_activity > self.ttl:
                del self._sessions[session_id]
                raise SessionExpiredError(f"session {session_id!r} expired")
        return session

    def touch(self, session: Session) -> None:
        session.last_activity = self.clock()

    def __len__(self) -> int:
        return len(self._sessions)


class Journal:
    """Optional append-only JSON-lines journal for crash recovery."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()

    def append(self, session_id: str, kind: str, data: dict) -> None:
        line = json.dumps({"session": session_id, "kind": kind, "data": data})
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")


def load_journal(path) -> list:
    """Parsed journal entries, in write order (recovery feeds them back
    through GateSessionCore via server.core.replay_events)."""
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def create_app(app_config: AppConfig = AppConfig(), clock=time.time) -> FastAPI:
    cfg = app_config.server
    app = FastAPI(title="gaterl gate service")
    store = SessionStore(cfg.session_ttl_seconds, clock)
    backend = make_backend(cfg.chat)
    journal = Journal(cfg.journal_path) if cfg.journal_path else None
    app.state.store = store
    app.state.config = app_config

    def _policy_for(body: CreateSessionBody):
        if body.condition != "rl":
            return None
        path = body.checkpoint or cfg.checkpoint
        if not path:
            raise ConfigurationError("rl condition requires a checkpoint path")
        return greedy_checkpoint_policy(path, app_config.training.features)

    @app.exception_handler(GaterlError)
    def _gaterl_error(_request: Request, exc: GaterlError):
        for cls, (status, code) in _ERROR_MAP.items():
            if isinstance(exc, cls):
                headers = {}
                if isinstance(exc, UpstreamError):
                    headers["Retry-After"] = str(exc.retry_after_seconds)
                return JSONResponse(
                    {"error": code, "detail": str(exc)}, status_code=status, headers=headers
                )
        return JSONResponse({"error": "internal", "detail": str(exc)}, status_code=500)

    @app.exception_handler(RequestValidationError)
    def _request_error(_request: Request, exc: RequestValidationError):
        return JSONResponse({"error": "validation", "detail": str(exc)}, status_code=400)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        if body.condition not in CONDITIONS:
            raise ValidationError(f"condition must be one of {CONDITIONS}")
        core = GateSessionCore(
            body.condition,
            policy=_policy_for(body),
            task_spec=app_config.tasks,
            tick_seconds=app_config.reward.tick_seconds,
        )
        session = store.create(body.condition, core)
        if journal:
            journal.append(
                session.session_id,
                "created",
                {"condition": body.condition, "checkpoint": body.checkpoint or ""},
            )
        log.info("session %s created (%s)", session.session_id, body.condition)
        return {"session_id": session.session_id}

    @app.post("/sessions/{session_id}/events")
    def ingest_event(session_id: str, body: EventBody):
        session = store.get(session_id)
        with session.lock:
            ts_seconds = parse_timestamp(body.ts)
            status = session.core.apply_event(
                body.type, ts_seconds, question_id=body.question_id, correct=body.correct
            )
            entry = {
                "type": body.type,
                "ts": body.ts,
                "ts_seconds": ts_seconds,
                "question_id": body.question_id,
                "correct": body.correct,
            }
            session.stream.append(entry)
            store.touch(session)
        if journal:
            journal.append(session_id, "event", entry)
        return status

    @app.get("/sessions/{session_id}/gate")
    def query_gate(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return session.core.gate_status()

    @app.post("/sessions/{session_id}/chat")
    def chat(session_id: str, body: ChatBody):
        session = store.get(session_id)
        with session.lock:
            if not session.core.ai_allowed:
                raise GateClosedError("the AI gate is closed for the current task")
            reply = backend.reply(body.message)
            session.core.note_chat_used()
            session.stream.append({"type": "chat_ok"})
            session.transcript.append({"role": "user", "content": body.message})
            session.transcript.append({"role": "assistant", "content": reply})
            store.touch(session)
        if journal:
            journal.append(session_id, "chat", {"message": body.message, "reply": reply})
        return {"reply": reply}

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return {
                "session_id": session.session_id,
                "condition": session.condition,
                "created_at": iso_utc(session.created_at),
                "tick_seconds": session.core.tick,
                "task": session.core.task_index,
                "question": session.core.question_index,
                "completed": session.core.completed,
                "ai_use_history": [bool(b) for b in session.core.history],
                "events": session.client_events(),
                "stream": list(session.stream),
                "decisions": session.core.decisions_as_dicts(),
                "transcript": list(session.transcript),
            }

    return app
