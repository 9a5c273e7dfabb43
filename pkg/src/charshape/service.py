"""HTTP API over the conversation engine, one worker process, FastAPI."""
from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .concepts import (
    ConceptSuggester,
    FallbackSource,
    LiveSource,
    SnapshotSource,
    load_default_snapshot,
    load_snapshot,
)
from .config import AppConfig
from .domain import Session, is_valid_attribute_id
from .engine import ConversationEngine, EngineState
from .errors import (
    CharshapeError,
    EmptyValue,
    IndexOutOfRange,
    NoCandidatesPending,
    NotBotMessage,
    SessionNotFound,
    UnknownMessage,
)
from .generation import RemoteBackend, StubBackend
from .registry import load_default_registry, load_registry
from .storage import SessionStore, session_to_document, turn_output_to_dict


def build_engine(config: AppConfig) -> ConversationEngine:
    if config.registry_path:
        registry = load_registry(config.registry_path, synonyms_path=config.synonyms_path)
    else:
        registry = load_default_registry()
    snapshot = (
        load_snapshot(config.snapshot_path) if config.snapshot_path else load_default_snapshot()
    )
    snapshot_source = SnapshotSource(snapshot)
    if config.concept_source == "live":
        source = FallbackSource(LiveSource(config.concept_base_url), snapshot_source)
    else:
        source = snapshot_source
    if config.backend == "remote":
        if not config.backend_url:
            raise ValueError("backend=remote requires backend_url")
        backend = RemoteBackend(config.backend_url)
    else:
        backend = StubBackend(registry)
    return ConversationEngine(
        registry,
        ConceptSuggester(source, fetch_limit=config.concept_fetch_limit),
        backend,
        history_window=config.history_window,
        candidate_count=config.candidate_count,
    )


class CreateSessionBody(BaseModel):
    seed: int | None = None


class MessageBody(BaseModel):
    text: str


class PinBody(BaseModel):
    message_id: int


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error_code": code, "message": message})


def _state_summary(session: Session) -> dict:
    state: EngineState = session.engine_state
    return {
        "mode": state.mode.value,
        "phase": state.phase.value,
        "phase_attribute": state.phase_attribute,
        "attribute_count": len(session.character.attributes),
        "guided_defined_count": state.guided_defined_count,
        "message_count": len(session.transcript),
    }


def create_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig()
    engine = build_engine(config)
    store = SessionStore(config.store_dir)
    sessions: dict[str, Session] = {}
    locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()

    app = FastAPI(title="charshape", docs_url=None, redoc_url=None)
    app.state.engine = engine
    app.state.store = store

    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return _error(422, "validation_error", str(exc.errors()[:1]))

    @app.exception_handler(CharshapeError)
    async def on_domain_error(request: Request, exc: CharshapeError):
        return _error(500, exc.code, exc.message)

    def lock_for(session_id: str) -> threading.Lock:
        # one lock per session: requests against the same session serialize
        with registry_lock:
            return locks.setdefault(session_id, threading.Lock())

    def get_session(session_id: str) -> Session:
        found = sessions.get(session_id)
        if found is None:
            found = store.load_session(session_id)  # raises SessionNotFound
            sessions[session_id] = found
        return found

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody | None = None):
        seed = body.seed if body else None
        session, opening = engine.start_session(seed=seed)
        with lock_for(session.session_id):
            sessions[session.session_id] = session
            store.save_session(session)
        return {"session_id": session.session_id, "opening": turn_output_to_dict(opening)}

    @app.get("/api/sessions")
    def list_sessions():
        return {"sessions": [vars(s) for s in store.list_sessions()]}

    @app.get("/api/attributes")
    def list_attributes():
        return {
            "attributes": [
                {
                    "id": d.id,
                    "display_name": d.display_name,
                    "category": d.category.value,
                    "prompt": d.prompt,
                    "suggestible": d.suggestible,
                }
                for d in engine.registry
            ]
        }

    @app.get("/api/sessions/{session_id}")
    def get_session_document(session_id: str):
        try:
            with lock_for(session_id):
                session = get_session(session_id)
                return session_to_document(session)
        except SessionNotFound as exc:
            return _error(404, exc.code, exc.message)

    @app.post("/api/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        if not body.text.strip():
            return _error(422, "empty_text", "message text must be non-empty")
        try:
            with lock_for(session_id):
                session = get_session(session_id)
                output = engine.handle_user_message(session, body.text)
                store.save_session(session)
                return {
                    "turn": turn_output_to_dict(output),
                    "state_summary": _state_summary(session),
                }
        except SessionNotFound as exc:
            return _error(404, exc.code, exc.message)
        except EmptyValue as exc:
            return _error(422, "empty_text", exc.message)

    @app.post("/api/sessions/{session_id}/candidates/{index}")
    def choose_candidate(session_id: str, index: int):
        try:
            with lock_for(session_id):
                session = get_session(session_id)
                output = engine.handle_candidate_choice(session, index)
                store.save_session(session)
                return {"turn": turn_output_to_dict(output)}
        except SessionNotFound as exc:
            return _error(404, exc.code, exc.message)
        except NoCandidatesPending as exc:
            return _error(409, exc.code, exc.message)
        except IndexOutOfRange as exc:
            return _error(422, exc.code, exc.message)

    @app.delete("/api/sessions/{session_id}/attributes/{attribute_id}")
    def delete_attribute(session_id: str, attribute_id: str):
        if not is_valid_attribute_id(attribute_id):
            return _error(422, "invalid_attribute", f"malformed attribute id {attribute_id!r}")
        try:
            with lock_for(session_id):
                session = get_session(session_id)
                engine.handle_delete_attribute(session, attribute_id)
                store.save_session(session)
                return {"character": session_to_document(session)["character"]}
        except SessionNotFound as exc:
            return _error(404, exc.code, exc.message)

    @app.post("/api/sessions/{session_id}/pins")
    def pin(session_id: str, body: PinBody):
        try:
            with lock_for(session_id):
                session = get_session(session_id)
                engine.handle_pin(session, body.message_id)
                store.save_session(session)
                return {"pins": session_to_document(session)["pins"]}
        except SessionNotFound as exc:
            return _error(404, exc.code, exc.message)
        except (NotBotMessage, UnknownMessage) as exc:
            return _error(422, exc.code, exc.message)

    @app.delete("/api/sessions/{session_id}/pins/{message_id}")
    def unpin(session_id: str, message_id: int):
        try:
            with lock_for(session_id):
                session = get_session(session_id)
                engine.handle_unpin(session, message_id)
                store.save_session(session)
                return {"pins": session_to_document(session)["pins"]}
        except SessionNotFound as exc:
            return _error(404, exc.code, exc.message)

    if config.static_dir:
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
