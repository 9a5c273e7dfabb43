"""Session persistence: canonical JSON documents in a directory store."""
from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

from .domain import (
    AttributeValue,
    Author,
    Character,
    ChatMessage,
    MessageKind,
    Mode,
    PinnedStatement,
    Session,
    ValueSource,
)
from .engine import EngineState, Phase, TurnOutput
from .errors import CorruptDocument, SessionNotFound, StoreUnavailable, VersionMismatch
from .generation import GenerationCandidate

SCHEMA_VERSION = "1"

_SAFE_ID = re.compile(r"^[A-Za-z0-9_-]+$")


def session_to_document(session: Session) -> dict:
    """Canonical wire/disk form. Field order is fixed so equal sessions
    always serialize to identical bytes."""
    state: EngineState = session.engine_state
    return {
        "schema_version": SCHEMA_VERSION,
        "session_id": session.session_id,
        "seed": session.seed,
        "created_at": session.created_at,
        "engine_state": {
            "mode": state.mode.value,
            "phase": state.phase.value,
            "phase_attribute": state.phase_attribute,
            "pending_suggestion": state.pending_suggestion,
            "pending_candidates": [
                {"index": c.index, "text": c.text} for c in state.pending_candidates
            ],
            "guided_defined_ids": list(state.guided_defined_ids),
            "switch_hint_shown": state.switch_hint_shown,
            "suggestion_streak": state.suggestion_streak,
            "last_skipped": state.last_skipped,
            "turn_count": state.turn_count,
            "rng_state": state.rng_state,
        },
        "character": {
            "attributes": [
                {
                    "attribute": held.attribute,
                    "value": held.value,
                    "source": held.source.value,
                    "defined_at": held.defined_at,
                }
                for held in session.character.attributes.values()
            ],
            "rejected_values": {
                attr: list(values) for attr, values in session.character.rejected_values.items()
            },
        },
        "transcript": [
            {
                "id": m.id,
                "author": m.author.value,
                "text": m.text,
                "mode": m.mode.value,
                "kind": m.kind.value,
            }
            for m in session.transcript
        ],
        "pins": [{"message_id": p.message_id, "pinned_at": p.pinned_at} for p in session.pins],
    }


def document_to_session(doc: dict) -> Session:
    if not isinstance(doc, dict):
        raise CorruptDocument("session document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionMismatch(f"schema_version {version!r}, supported {SCHEMA_VERSION!r}")
    try:
        raw_state = doc["engine_state"]
        state = EngineState(
            mode=Mode(raw_state["mode"]),
            phase=Phase(raw_state["phase"]),
            phase_attribute=raw_state["phase_attribute"],
            pending_suggestion=raw_state["pending_suggestion"],
            pending_candidates=[
                GenerationCandidate(index=c["index"], text=c["text"])
                for c in raw_state["pending_candidates"]
            ],
            guided_defined_ids=list(raw_state["guided_defined_ids"]),
            switch_hint_shown=bool(raw_state["switch_hint_shown"]),
            suggestion_streak=int(raw_state["suggestion_streak"]),
            last_skipped=raw_state["last_skipped"],
            turn_count=int(raw_state["turn_count"]),
            rng_state=int(raw_state["rng_state"]),
        )
        character = Character()
        for entry in doc["character"]["attributes"]:
            character.attributes[entry["attribute"]] = AttributeValue(
                attribute=entry["attribute"],
                value=entry["value"],
                source=ValueSource(entry["source"]),
                defined_at=int(entry["defined_at"]),
            )
        for attr, values in doc["character"]["rejected_values"].items():
            character.rejected_values[attr] = list(values)
        transcript = [
            ChatMessage(
                id=int(m["id"]),
                author=Author(m["author"]),
                text=m["text"],
                mode=Mode(m["mode"]),
                kind=MessageKind(m["kind"]),
            )
            for m in doc["transcript"]
        ]
        pins = [
            PinnedStatement(message_id=int(p["message_id"]), pinned_at=int(p["pinned_at"]))
            for p in doc["pins"]
        ]
        return Session(
            session_id=doc["session_id"],
            seed=int(doc["seed"]),
            character=character,
            transcript=transcript,
            pins=pins,
            engine_state=state,
            created_at=doc["created_at"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptDocument(f"malformed session document: {exc}") from exc


def dump_document(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def turn_output_to_dict(out: TurnOutput) -> dict:
    return {
        "bot_messages": [
            {
                "id": m.id,
                "author": m.author.value,
                "text": m.text,
                "mode": m.mode.value,
                "kind": m.kind.value,
            }
            for m in out.bot_messages
        ],
        "quick_replies": list(out.quick_replies),
        "candidates": (
            None
            if out.candidates is None
            else [{"index": c.index, "text": c.text} for c in out.candidates]
        ),
        "character_delta": out.character_delta,
        "pin_delta": out.pin_delta,
        "error": out.error,
    }


@dataclass(frozen=True)
class SessionSummary:
    session_id: str
    name: str
    created_at: str
    message_count: int


class SessionStore:
    """One JSON file per session. Writes go through a temp file and an atomic
    rename, so a crash mid-save never leaves a torn document behind."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path_for(self, session_id: str) -> Path:
        if not _SAFE_ID.match(session_id):
            raise SessionNotFound(f"no session named {session_id!r}")
        return self.directory / f"{session_id}.json"

    def save_session(self, session: Session):
        path = self._path_for(session.session_id)
        payload = dump_document(session_to_document(session))
        with self._lock_for(session.session_id):
            try:
                self.directory.mkdir(parents=True, exist_ok=True)
                fd, tmp_name = tempfile.mkstemp(
                    prefix=f".{session.session_id}.", suffix=".tmp", dir=self.directory
                )
                try:
                    with os.fdopen(fd, "w", encoding="utf-8") as handle:
                        handle.write(payload)
                    os.replace(tmp_name, path)
                except BaseException:
                    try:
                        os.unlink(tmp_name)
                    except OSError:
                        pass
                    raise
            except OSError as exc:
                raise StoreUnavailable(f"cannot write session store: {exc}") from exc

    def load_session(self, session_id: str) -> Session:
        path = self._path_for(session_id)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise SessionNotFound(f"no session named {session_id!r}") from None
        except OSError as exc:
            raise StoreUnavailable(f"cannot read session store: {exc}") from exc
        try:
            doc = json.loads(text)
        except ValueError as exc:
            raise CorruptDocument(f"session file is not valid JSON: {exc}") from exc
        return document_to_session(doc)

    def list_sessions(self) -> list[SessionSummary]:
        """Newest first. Files that do not parse as session documents are
        skipped rather than taking the whole listing down."""
        if not self.directory.is_dir():
            return []
        summaries = []
        for path in self.directory.glob("*.json"):
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
                session = document_to_session(doc)
            except (OSError, ValueError, CorruptDocument, VersionMismatch):
                continue
            name = session.character.value_of("name") or "(unnamed)"
            summaries.append(
                SessionSummary(
                    session_id=session.session_id,
                    name=name,
                    created_at=session.created_at,
                    message_count=len(session.transcript),
                )
            )
        summaries.sort(key=lambda s: (s.created_at, s.session_id), reverse=True)
        return summaries
