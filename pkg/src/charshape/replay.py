"""Headless script replay and transcript statistics."""
from __future__ import annotations

import difflib
import json
import statistics
from dataclasses import dataclass
from pathlib import Path

from .concepts import ConceptSuggester, SnapshotSource, load_default_snapshot
from .domain import is_valid_attribute_id
from .engine import ConversationEngine
from .errors import CharshapeError, ExpectationMismatch, NoSessions, ScriptParseError
from .generation import StubBackend
from .registry import load_default_registry
from .storage import dump_document, session_to_document, turn_output_to_dict

REPLAY_CREATED_AT = "1970-01-01T00:00:00Z"

DOCUMENT_FORMAT = "charshape-replay"


@dataclass(frozen=True)
class ScriptAction:
    kind: str  # U | C | D | P
    text: str | None = None
    number: int | None = None


def parse_script(text: str) -> list[ScriptAction]:
    """Parse a replay script: U <text>, C <index>, D <attribute>, P <message_id>."""
    actions = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, arg = line.partition(" ")
        arg = arg.strip()
        if kind == "U":
            if not arg:
                raise ScriptParseError(f"line {lineno}: U needs message text", line=lineno)
            actions.append(ScriptAction(kind="U", text=arg))
        elif kind in ("C", "P"):
            try:
                number = int(arg)
            except ValueError:
                raise ScriptParseError(
                    f"line {lineno}: {kind} needs an integer argument", line=lineno
                ) from None
            actions.append(ScriptAction(kind=kind, number=number))
        elif kind == "D":
            if not is_valid_attribute_id(arg):
                raise ScriptParseError(
                    f"line {lineno}: D needs a well-formed attribute id", line=lineno
                )
            actions.append(ScriptAction(kind="D", text=arg))
        else:
            raise ScriptParseError(f"line {lineno}: unknown action {kind!r}", line=lineno)
    return actions


def offline_engine() -> ConversationEngine:
    """The acceptance profile: bundled registry, snapshot source, stub backend."""
    registry = load_default_registry()
    suggester = ConceptSuggester(SnapshotSource(load_default_snapshot()))
    return ConversationEngine(registry, suggester, StubBackend(registry))


def run_replay(
    actions: list[ScriptAction],
    seed: int,
    engine: ConversationEngine | None = None,
) -> dict:
    """Drive a fresh session through the script. Engine-level rejections (for
    example choosing a candidate when none are pending) are recorded as error
    entries rather than aborting, so every script replays to completion."""
    engine = engine or offline_engine()
    session, opening = engine.start_session(
        seed=seed, session_id=f"replay-{seed:016x}", created_at=REPLAY_CREATED_AT
    )
    turns = [{"action": "start", "output": turn_output_to_dict(opening)}]
    for action in actions:
        label = _action_label(action)
        try:
            if action.kind == "U":
                output = engine.handle_user_message(session, action.text)
            elif action.kind == "C":
                output = engine.handle_candidate_choice(session, action.number)
            elif action.kind == "D":
                output = engine.handle_delete_attribute(session, action.text)
            else:
                output = engine.handle_pin(session, action.number)
        except CharshapeError as exc:
            turns.append(
                {"action": label, "error": {"error_code": exc.code, "message": exc.message}}
            )
            continue
        turns.append({"action": label, "output": turn_output_to_dict(output)})
    return {
        "format": DOCUMENT_FORMAT,
        "seed": seed,
        "turns": turns,
        "final_session": session_to_document(session),
    }


def _action_label(action: ScriptAction) -> str:
    if action.kind in ("U", "D"):
        return f"{action.kind} {action.text}"
    return f"{action.kind} {action.number}"


def replay_file(script_path: str | Path, seed: int) -> str:
    actions = parse_script(Path(script_path).read_text(encoding="utf-8"))
    return dump_document(run_replay(actions, seed))


def compare_to_golden(produced: str, golden_path: str | Path) -> None:
    """Byte-compare a replay document against its committed golden copy."""
    expected = Path(golden_path).read_text(encoding="utf-8")
    if produced == expected:
        return
    diff = "\n".join(
        difflib.unified_diff(
            expected.splitlines(),
            produced.splitlines(),
            fromfile=str(golden_path),
            tofile="replayed",
            lineterm="",
        )
    )
    raise ExpectationMismatch(f"replay diverges from golden transcript:\n{diff}")


# --- transcript statistics -------------------------------------------------

@dataclass(frozen=True)
class TranscriptStats:
    counts: dict[str, int]
    mean: float
    stdev: float  # population standard deviation


def _transcript_length(doc: dict) -> int | None:
    if not isinstance(doc, dict):
        return None
    if isinstance(doc.get("transcript"), list):
        return len(doc["transcript"])
    final = doc.get("final_session")
    if isinstance(final, dict) and isinstance(final.get("transcript"), list):
        return len(final["transcript"])
    return None


def stats_for_dir(directory: str | Path) -> TranscriptStats:
    """Dialogue length (in chat messages) per stored session, with mean and
    population standard deviation. Accepts both session documents and replay
    documents."""
    directory = Path(directory)
    counts: dict[str, int] = {}
    if directory.is_dir():
        for path in sorted(directory.glob("*.json")):
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, ValueError):
                continue
            length = _transcript_length(doc)
            if length is not None:
                counts[path.stem] = length
    if not counts:
        raise NoSessions(f"no session documents under {directory}")
    values = list(counts.values())
    return TranscriptStats(
        counts=counts,
        mean=statistics.fmean(values),
        stdev=statistics.pstdev(values),
    )
