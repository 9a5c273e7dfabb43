"""Acceptance gate: the eleven product-level checks, each with a time budget.

Every check runs fully offline (stub reply backend, bundled concept
snapshot). Each test prints one PASS line with its runtime; a failure of
either the behavior or the budget fails the test.
"""
from __future__ import annotations

import json
import pathlib
import random
import threading
import time
from contextlib import contextmanager

import pytest
from fastapi.testclient import TestClient

from charshape.concepts import ConceptSuggester, SnapshotSource, load_default_snapshot
from charshape.config import AppConfig
from charshape.engine import SWITCH_HINT_CHIP, ConversationEngine, Phase
from charshape.errors import CharshapeError
from charshape.generation import StubBackend
from charshape.intents import RecognizerContext, load_corpus, recognize
from charshape.registry import bundled_data_path, load_default_registry
from charshape.replay import (
    compare_to_golden,
    offline_engine,
    parse_script,
    replay_file,
    run_replay,
    stats_for_dir,
)
from charshape.service import create_app
from charshape.simulate import random_actions
from charshape.storage import (
    SessionStore,
    document_to_session,
    dump_document,
    session_to_document,
)

GOLDEN_DIR = pathlib.Path(__file__).resolve().parents[1] / "goldens"


@contextmanager
def budget(label: str, seconds: float):
    started = time.perf_counter()
    yield
    elapsed = time.perf_counter() - started
    print(f"PASS {label} ({elapsed:.2f}s < {seconds:g}s)")
    assert elapsed < seconds, f"{label} exceeded its {seconds:g}s budget: {elapsed:.2f}s"


def _drive(engine, session, action):
    if action.kind == "U":
        return engine.handle_user_message(session, action.text)
    if action.kind == "C":
        return engine.handle_candidate_choice(session, action.number)
    if action.kind == "D":
        return engine.handle_delete_attribute(session, action.text)
    return engine.handle_pin(session, action.number)


def test_c01_attribute_catalog_is_complete():
    """31 attributes, all three character-bone categories, via both the
    library loader and the HTTP catalog."""
    with budget("attribute catalog", 1.0):
        registry = load_default_registry()
        assert len(registry) == 31
        assert {d.category.value for d in registry} == {
            "physiology", "psychology", "sociology",
        }
        app = create_app(AppConfig(store_dir="sessions-acceptance-unused"))
        with TestClient(app) as client:
            listed = client.get("/api/attributes").json()["attributes"]
        assert len(listed) == 31
        assert {a["category"] for a in listed} == {"physiology", "psychology", "sociology"}
        assert [a["id"] for a in listed] == [d.id for d in registry]


def test_c02_suggestion_accept_golden_replay():
    """Reject one concept suggestion, accept the next; the accepted value
    lands with suggestion provenance and the whole transcript is
    byte-identical to the frozen golden."""
    with budget("suggestion-accept golden", 1.0):
        produced = replay_file(GOLDEN_DIR / "suggestion_accept.script", 39)
        compare_to_golden(produced, GOLDEN_DIR / "suggestion_accept.golden.json")
        doc = json.loads(produced)
        held = {
            a["attribute"]: a for a in doc["final_session"]["character"]["attributes"]
        }
        assert held["biggest_fear"]["value"] == "zombie"
        assert held["biggest_fear"]["source"] == "suggestion_accepted"
        assert "physical examination" in doc["final_session"]["character"][
            "rejected_values"
        ]["biggest_fear"]


def test_c03_candidate_choice_golden_replay():
    """An open question yields exactly three candidate replies; choosing
    index 1 appends only that reply. Byte-identical to the golden."""
    with budget("candidate-choice golden", 1.0):
        produced = replay_file(GOLDEN_DIR / "candidate_choice.script", 15)
        compare_to_golden(produced, GOLDEN_DIR / "candidate_choice.golden.json")
        doc = json.loads(produced)
        offers = [
            t["output"]["candidates"]
            for t in doc["turns"]
            if t.get("output", {}).get("candidates")
        ]
        assert offers and len(offers[-1]) == 3
        chosen = offers[-1][1]["text"]
        others = [c["text"] for c in offers[-1] if c["text"] != chosen]
        transcript = [m["text"] for m in doc["final_session"]["transcript"]]
        assert chosen in transcript
        assert all(o not in transcript for o in others)


def test_c04_switch_hint_fires_exactly_once_on_the_third_definition():
    """Across 100 seeds, the "Let's chat" chip appears exactly once per
    session, exactly on the turn where the third attribute lands."""
    with budget("switch hint threshold", 5.0):
        registry = load_default_registry()
        suggester = ConceptSuggester(SnapshotSource(load_default_snapshot()))
        for seed in range(100):
            engine = ConversationEngine(registry, suggester, StubBackend(registry))
            session, opening = engine.start_session(seed=seed, session_id=f"h{seed}")
            hits = [SWITCH_HINT_CHIP in opening.quick_replies]
            for i in range(1, 6):
                out = engine.handle_user_message(session, f"value {i}")
                hits.append(SWITCH_HINT_CHIP in out.quick_replies)
            assert hits == [False, False, False, True, False, False], (seed, hits)
            assert session.engine_state.guided_defined_count == 5


def test_c05_thousand_step_replay_is_byte_deterministic():
    """A 1,000-action random script replayed twice with one seed produces
    byte-identical documents."""
    with budget("1000-step determinism", 10.0):
        registry = load_default_registry()
        actions = random_actions(random.Random(0xD06F00D), 1000, registry)
        assert len(actions) == 1000
        first = dump_document(run_replay(actions, seed=4242))
        second = dump_document(run_replay(actions, seed=4242))
        assert first == second


def test_c06_open_answers_are_conditioned_on_the_persona():
    """Asking about any defined attribute by display name makes its persona
    sentence the first candidate; after deleting the attribute it stops."""
    with budget("persona conditioning", 5.0):
        engine = offline_engine()
        registry = engine.registry
        session, _ = engine.start_session(seed=31337, session_id="persona")
        for i, definition in enumerate(registry):
            engine.handle_user_message(
                session, f"Your {definition.id.replace('_', ' ')} is value{i}."
            )
        engine.handle_user_message(session, "Let's chat")
        for i, definition in enumerate(registry):
            question = f"What is your {definition.display_name.lower()}?"
            sentence = definition.render_persona(f"value{i}")
            out = engine.handle_user_message(session, question)
            assert out.candidates is not None, definition.id
            assert out.candidates[0].text == sentence, definition.id

            engine.handle_delete_attribute(session, definition.id)
            out = engine.handle_user_message(session, question)
            assert out.candidates[0].text != sentence, definition.id
            # restore, so later questions see a full character sheet
            engine.handle_user_message(
                session, f"Your {definition.id.replace('_', ' ')} is value{i}."
            )


def test_c07_suggestions_never_repeat_rejected_or_current_values():
    """Scripted reject loops over seeds 0..99: every offer is fresh."""
    with budget("suggestion hygiene", 5.0):
        registry = load_default_registry()
        suggestible = [d.id for d in registry if d.suggestible]
        suggester = ConceptSuggester(SnapshotSource(load_default_snapshot()))
        offers_seen = 0
        for seed in range(100):
            engine = ConversationEngine(registry, suggester, StubBackend(registry))
            session, _ = engine.start_session(seed=seed, session_id=f"s{seed}")
            engine.handle_user_message(session, "Jane")
            picker = random.Random(seed)
            state = session.engine_state
            state.phase = Phase.AWAITING_VALUE
            state.phase_attribute = picker.choice(suggestible)
            for text in ("Give me a suggestion", "no", "no", "no", "no"):
                before_rejected = list(
                    session.character.rejected_for(state.phase_attribute or "")
                )
                before_current = session.character.value_of(state.phase_attribute or "")
                engine.handle_user_message(session, text)
                offered = state.pending_suggestion
                if offered is not None:
                    offers_seen += 1
                    assert offered not in before_rejected, (seed, offered)
                    assert offered != before_current, (seed, offered)
        assert offers_seen >= 200  # the loop really exercised the pool


def test_c08_labeled_utterances_all_classify_correctly():
    """The bundled labeled corpus (55 rows across modes and waits, including
    the scripted walkthrough lines) classifies at 100%."""
    with budget("intent corpus", 1.0):
        registry = load_default_registry()
        rows = load_corpus(bundled_data_path("intent_corpus.tsv"))
        assert len(rows) >= 40
        wrong = []
        for row in rows:
            ctx = RecognizerContext(
                mode=row.mode,
                awaiting=row.awaiting,
                registry=registry,
                awaiting_attribute=row.awaiting_attribute,
            )
            got = recognize(row.utterance, ctx)
            if got != row.expected:
                wrong.append((row.utterance, row.expected, got))
        assert not wrong, wrong
        texts = {row.utterance for row in rows}
        assert {"Your name is Jane.", "Let's chat", "What else could we describe?", "hi"} <= texts


def test_c09_persistence_roundtrip_and_deterministic_continuation(tmp_path):
    """load(save(s)) is the identity on 200 generated sessions, and a
    reloaded session continues exactly like the original."""
    with budget("persistence roundtrip", 10.0):
        registry = load_default_registry()
        store = SessionStore(tmp_path / "store")
        engine = offline_engine()
        for seed in range(200):
            rng = random.Random(seed)
            session, _ = engine.start_session(seed=seed, session_id=f"rt{seed}")
            for action in random_actions(rng, 8, registry):
                try:
                    _drive(engine, session, action)
                except CharshapeError:
                    pass
            store.save_session(session)
            reloaded = store.load_session(session.session_id)
            assert session_to_document(reloaded) == session_to_document(session)

            tail = random_actions(rng, 3, registry)
            for action in tail:
                for target in (session, reloaded):
                    try:
                        _drive(engine, target, action)
                    except CharshapeError:
                        pass
            assert session_to_document(reloaded) == session_to_document(session)


def test_c10_transcript_stats_match_hand_computed_values(tmp_path):
    """A synthetic store with lengths {60, 68} reports mean 64, SD 4."""
    with budget("stats", 1.0):
        for name, lines in (("a", 60), ("b", 68)):
            doc = {
                "schema_version": "1",
                "session_id": name,
                "seed": 0,
                "created_at": "2026-01-01T00:00:00Z",
                "engine_state": {},
                "character": {"attributes": [], "rejected_values": {}},
                "transcript": [{"id": i} for i in range(lines)],
                "pins": [],
            }
            (tmp_path / f"{name}.json").write_text(json.dumps(doc), encoding="utf-8")
        stats = stats_for_dir(tmp_path)
        assert stats.counts == {"a": 60, "b": 68}
        assert stats.mean == 64.0
        assert stats.stdev == 4.0


def test_c11_concurrent_messages_keep_the_transcript_totally_ordered(tmp_path):
    """50 parallel messages against one session: every update lands, ids
    stay dense, nothing interleaves mid-turn."""
    with budget("api hammer", 10.0):
        app = create_app(AppConfig(store_dir=str(tmp_path / "store")))
        with TestClient(app) as client:
            created = client.post("/api/sessions", json={"seed": 50}).json()
            sid = created["session_id"]
            statuses: list[int] = []
            lock = threading.Lock()

            def send(i: int):
                response = client.post(
                    f"/api/sessions/{sid}/messages",
                    json={"text": f"Your strange quirk is quirk number {i}."},
                )
                with lock:
                    statuses.append(response.status_code)

            threads = [threading.Thread(target=send, args=(i,)) for i in range(50)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert statuses == [200] * 50

            doc = client.get(f"/api/sessions/{sid}").json()
            transcript = doc["transcript"]
            assert [m["id"] for m in transcript] == list(range(len(transcript)))
            user_texts = [m["text"] for m in transcript if m["author"] == "user"]
            assert sorted(user_texts) == sorted(
                f"Your strange quirk is quirk number {i}." for i in range(50)
            )
            assert doc["engine_state"]["turn_count"] == 50
            # each user line is followed directly by that turn's bot reply
            for position, message in enumerate(transcript[:-1]):
                if message["author"] == "user":
                    assert transcript[position + 1]["author"] == "bot"

            reloaded = document_to_session(doc)
            assert reloaded.character.value_of("strange_quirk") is not None
