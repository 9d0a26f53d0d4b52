"""HTTP front door for analysis sessions.

Thin FastAPI wrapper over SessionManager: JSON in, pipeline events out.
Every response is derived from the session event log, so a client can rebuild
its view at any time from GET /sessions/{id}/events?after=<seq>; the /stream
variant delivers the same events as server-sent events with the sequence
number as the SSE id for reconnect-and-resume.
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .errors import (
    EmptyQuery,
    NothingToRefine,
    OrcaError,
    SessionBusy,
    UnknownArtifact,
    UnknownDatabaseId,
    UnknownSession,
)
from .sessions import PipelineEvent, SessionManager

_STATUS_CODES: tuple[tuple[type, int], ...] = (
    (UnknownSession, 404),
    (UnknownDatabaseId, 404),
    (UnknownArtifact, 404),
    (SessionBusy, 409),
    (NothingToRefine, 409),
    (EmptyQuery, 400),
)


class CreateSessionBody(BaseModel):
    database_id: str


class QueryBody(BaseModel):
    text: str
    graph_text: Optional[str] = None
    bindings: Optional[dict[str, list[str]]] = None
    treatment: Optional[str] = None
    outcome: Optional[str] = None
    injected_sql: Optional[str] = None


class FeedbackBody(BaseModel):
    text: str


def event_to_dict(event: PipelineEvent) -> dict:
    return {
        "session_id": event.session_id,
        "sequence": event.sequence,
        "stage": event.stage,
        "payload": event.payload,
        "terminal": event.terminal,
    }


def create_app(manager: SessionManager) -> FastAPI:
    app = FastAPI(title="orca", docs_url=None, redoc_url=None)
    # browser clients are served from a different origin than the API
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(OrcaError)
    async def handle_orca_error(request, exc: OrcaError):
        for klass, code in _STATUS_CODES:
            if isinstance(exc, klass):
                status = code
                break
        else:
            status = 422
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "databases": sorted(manager.databases),
            "sessions": len(manager._sessions),
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        session = manager.create_session(body.database_id)
        return {"session_id": session.session_id, "database_id": session.database_id}

    @app.post("/sessions/{session_id}/query")
    def submit_query(session_id: str, body: QueryBody):
        bindings = None
        if body.bindings is not None:
            bindings = {k: tuple(v) for k, v in body.bindings.items()}
        events = manager.submit_query(
            session_id,
            body.text,
            graph_text=body.graph_text,
            bindings=bindings,
            treatment=body.treatment,
            outcome=body.outcome,
            injected_sql=body.injected_sql,
        )
        return {"events": [event_to_dict(e) for e in events]}

    @app.post("/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, body: FeedbackBody):
        events = manager.submit_feedback(session_id, body.text)
        return {"events": [event_to_dict(e) for e in events]}

    @app.get("/sessions/{session_id}/events")
    def list_events(session_id: str, after: int = 0):
        events = manager.events_after(session_id, after)
        return {"events": [event_to_dict(e) for e in events]}

    @app.get("/sessions/{session_id}/events/stream")
    def stream_events(session_id: str, after: int = 0):
        events = manager.events_after(session_id, after)

        def generate():
            for event in events:
                data = json.dumps(event_to_dict(event), sort_keys=True)
                yield f"id: {event.sequence}\nevent: {event.stage}\ndata: {data}\n\n"

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/artifacts/{artifact_id}")
    def get_artifact(session_id: str, artifact_id: str):
        artifact = manager.get_artifact(session_id, artifact_id)
        return {
            "artifact_id": artifact.artifact_id,
            "kind": artifact.kind,
            "body": artifact.body,
        }

    return app
