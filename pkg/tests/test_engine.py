from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charshape.concepts import ConceptSuggester
from charshape.domain import Author, MessageKind, Mode
from charshape.engine import (
    ALL_DEFINED_TEXT,
    BACKEND_DOWN_TEXT,
    GREETING_TEXT,
    HELP_GUIDED_TEXT,
    HELP_SUGGESTION_TEXT,
    NO_SUGGESTION_PENDING_TEXT,
    OPEN_MODE_CHIP,
    OUT_OF_IDEAS_TEXT,
    SKIP_TEXT,
    SOURCE_DOWN_TEXT,
    STREAK_CAP_TEXT,
    SWITCH_HINT_CHIP,
    SWITCH_HINT_THRESHOLD,
    SWITCH_OPEN_TEXT,
    TOO_LONG_TEXT,
    ConversationEngine,
    EngineState,
    Phase,
)
from charshape.errors import (
    BackendUnavailable,
    CharshapeError,
    EmptyValue,
    IndexOutOfRange,
    NoCandidatesPending,
    NotBotMessage,
    SourceUnavailable,
)
from charshape.generation import StubBackend
from charshape.registry import load_default_registry
from charshape.simulate import random_actions

CANONICAL_IDS = [d.id for d in load_default_registry()]


class ListSource:
    """Concept source canned with an explicit label list."""

    def __init__(self, labels):
        self.labels = labels

    def fetch_instances(self, node, limit):
        from charshape.concepts import ConceptEdge

        return [
            ConceptEdge(start_label=l, relation="IsA", end_node=node, weight=1.0)
            for l in self.labels[:limit]
        ]


class DownSource:
    def fetch_instances(self, node, limit):
        raise SourceUnavailable("idea source offline")


class DownBackend:
    def generate(self, request):
        raise BackendUnavailable("generation offline")


def _start(engine, seed=1):
    return engine.start_session(seed=seed, session_id="t", created_at="1970-01-01T00:00:00Z")


def _force_prompt(session, attribute):
    """Point the guided flow at a chosen attribute (white-box)."""
    state: EngineState = session.engine_state
    state.phase = Phase.AWAITING_VALUE
    state.phase_attribute = attribute
    state.pending_suggestion = None


def _texts(out):
    return [m.text for m in out.bot_messages]


class TestStartSession:
    def test_opening_turn(self, engine):
        session, out = _start(engine)
        assert _texts(out)[0] == GREETING_TEXT
        assert _texts(out)[1].endswith("?")
        assert session.engine_state.phase is Phase.AWAITING_NAME
        assert session.engine_state.phase_attribute == "name"
        # the name has no idea pool, so no suggestion chip
        assert out.quick_replies == ["What does that mean?", "Skip"]

    def test_seed_defaults_to_random(self, engine):
        a, _ = engine.start_session()
        b, _ = engine.start_session()
        assert a.seed != b.seed
        assert a.session_id != b.session_id

    def test_transcript_starts_with_the_two_bot_lines(self, engine):
        session, _ = _start(engine)
        assert [m.author for m in session.transcript] == [Author.BOT, Author.BOT]
        assert [m.id for m in session.transcript] == [0, 1]


class TestGuidedDefinitions:
    def test_name_answer_defines_and_advances(self, engine):
        session, _ = _start(engine)
        out = engine.handle_user_message(session, "Jane")
        assert session.character.value_of("name") == "Jane"
        assert out.character_delta == {
            "action": "set",
            "attribute": "name",
            "value": "Jane",
            "source": "user_typed",
        }
        assert _texts(out)[0] == "Thanks! I noted my name: Jane."
        assert _texts(out)[1].endswith("?")
        assert session.engine_state.phase is Phase.AWAITING_VALUE
        assert session.engine_state.guided_defined_ids == ["name"]

    def test_direct_define_overrides_the_prompt(self, engine):
        session, _ = _start(engine)
        out = engine.handle_user_message(session, "Your hobby is karaoke.")
        assert session.character.value_of("hobby") == "karaoke"
        assert session.character.value_of("name") is None
        assert "hobby" in _texts(out)[0]

    def test_overwrite_moves_old_value_to_rejected(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Your hair is red.")
        engine.handle_user_message(session, "Your hair is blue.")
        assert session.character.value_of("hair") == "blue"
        assert session.character.rejected_for("hair") == ["red"]

    def test_too_long_value_is_refused_conversationally(self, engine):
        session, _ = _start(engine)
        out = engine.handle_user_message(session, "x" * 300)
        assert _texts(out) == [TOO_LONG_TEXT]
        assert session.character.value_of("name") is None
        assert session.engine_state.phase is Phase.AWAITING_NAME

    def test_empty_message_raises(self, engine):
        session, _ = _start(engine)
        with pytest.raises(EmptyValue):
            engine.handle_user_message(session, "   ")

    def test_explanation_reprompts_without_state_change(self, engine):
        session, _ = _start(engine)
        out = engine.handle_user_message(session, "What does that mean?")
        assert out.bot_messages[0].kind is MessageKind.EXPLANATION
        assert out.bot_messages[1].kind is MessageKind.PROMPT
        assert session.engine_state.phase is Phase.AWAITING_NAME

    def test_unrecognized_gets_help(self, engine):
        session, _ = _start(engine)
        session.engine_state.phase = Phase.GREETING
        session.engine_state.phase_attribute = None
        out = engine.handle_user_message(session, "fnord blat")
        assert HELP_GUIDED_TEXT in _texts(out)


class TestSkip:
    def test_skip_moves_on(self, engine):
        session, _ = _start(engine)
        out = engine.handle_user_message(session, "skip")
        assert _texts(out)[0] == SKIP_TEXT
        assert _texts(out)[1].endswith("?")
        assert session.engine_state.phase_attribute != "name"

    def test_skipped_attribute_is_held_out_for_one_draw(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        # leave exactly two attributes undefined
        keep = {"name", "hobby", "backstory_event"}
        for attribute in CANONICAL_IDS:
            if attribute not in keep:
                engine.handle_user_message(
                    session, f"Your {attribute.replace('_', ' ')} is thing."
                )
        first = session.engine_state.phase_attribute
        assert first in ("hobby", "backstory_event")
        engine.handle_user_message(session, "skip")
        second = session.engine_state.phase_attribute
        assert second in ("hobby", "backstory_event") and second != first
        # skipping the only alternative brings the first one straight back
        engine.handle_user_message(session, "skip")
        assert session.engine_state.phase_attribute == first


class TestSuggestions:
    def test_offer_accept(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "biggest_fear")
        out = engine.handle_user_message(session, "Can you give me a suggestion?")
        offered = session.engine_state.pending_suggestion
        assert offered in ("physical examination", "zombie")
        assert _texts(out) == [f'How about "{offered}"?']
        assert out.bot_messages[0].kind is MessageKind.SUGGESTION
        assert out.quick_replies == ["Yes", "Something else", "Skip"]
        out = engine.handle_user_message(session, "yes")
        assert session.character.value_of("biggest_fear") == offered
        held = session.character.attributes["biggest_fear"]
        assert held.source.value == "suggestion_accepted"

    def test_reject_records_and_reoffers(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "biggest_fear")
        engine.handle_user_message(session, "Give me a suggestion")
        first = session.engine_state.pending_suggestion
        engine.handle_user_message(session, "no")
        second = session.engine_state.pending_suggestion
        assert second is not None and second != first
        assert session.character.rejected_for("biggest_fear") == [first]

    def test_asking_again_is_an_implicit_reject(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "biggest_fear")
        engine.handle_user_message(session, "Give me a suggestion")
        first = session.engine_state.pending_suggestion
        engine.handle_user_message(session, "another suggestion please")
        assert first in session.character.rejected_for("biggest_fear")
        assert session.engine_state.pending_suggestion != first

    def test_rejecting_everything_exhausts_the_pool(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "biggest_fear")
        engine.handle_user_message(session, "Give me a suggestion")
        engine.handle_user_message(session, "no")
        out = engine.handle_user_message(session, "no")
        assert OUT_OF_IDEAS_TEXT in _texts(out)
        assert session.engine_state.phase is Phase.AWAITING_VALUE
        assert len(session.character.rejected_for("biggest_fear")) == 2

    def test_typed_value_still_lands_after_exhaustion(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "biggest_fear")
        for text in ("Give me a suggestion", "no", "no"):
            engine.handle_user_message(session, text)
        engine.handle_user_message(session, "small talk")
        assert session.character.value_of("biggest_fear") == "small talk"

    def test_streak_cap_after_five_offers(self, registry):
        labels = [f"value {i}" for i in range(10)]
        engine = ConversationEngine(
            registry, ConceptSuggester(ListSource(labels)), StubBackend(registry)
        )
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "hobby")
        engine.handle_user_message(session, "Give me a suggestion")
        for _ in range(4):
            engine.handle_user_message(session, "no")
        assert session.engine_state.suggestion_streak == 5
        out = engine.handle_user_message(session, "no")
        assert STREAK_CAP_TEXT in _texts(out)
        assert session.engine_state.phase is Phase.AWAITING_VALUE
        assert session.engine_state.pending_suggestion is None

    def test_streak_resets_on_new_prompt(self, registry):
        labels = [f"value {i}" for i in range(10)]
        engine = ConversationEngine(
            registry, ConceptSuggester(ListSource(labels)), StubBackend(registry)
        )
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "hobby")
        engine.handle_user_message(session, "Give me a suggestion")
        engine.handle_user_message(session, "yes")
        assert session.engine_state.suggestion_streak == 0

    def test_not_suggestible_attribute(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "iq")
        out = engine.handle_user_message(session, "Give me a suggestion")
        assert _texts(out)[0] == "I have no idea pool for IQ. Just tell me!"
        assert session.engine_state.phase is Phase.AWAITING_VALUE
        assert "Give me a suggestion" not in out.quick_replies

    def test_source_down_reports_error_and_degrades(self, registry):
        engine = ConversationEngine(
            registry, ConceptSuggester(DownSource()), StubBackend(registry)
        )
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "biggest_fear")
        out = engine.handle_user_message(session, "Give me a suggestion")
        assert SOURCE_DOWN_TEXT in _texts(out)
        assert out.error == {
            "error_code": "source_unavailable",
            "message": "idea source offline",
        }
        assert session.engine_state.phase is Phase.AWAITING_VALUE

    def test_accept_without_offer_is_harmless(self, engine):
        session, _ = _start(engine)
        session.engine_state.phase = Phase.GREETING
        session.engine_state.phase_attribute = None
        out = engine.handle_user_message(session, "yes")
        assert NO_SUGGESTION_PENDING_TEXT in _texts(out)

    def test_unrecognized_while_offered_explains_the_choices(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        _force_prompt(session, "biggest_fear")
        engine.handle_user_message(session, "Give me a suggestion")
        out = engine.handle_user_message(session, "Your blorp is zap.")
        assert HELP_SUGGESTION_TEXT in _texts(out)


class TestSwitchHint:
    def test_hint_appears_exactly_when_third_guided_definition_lands(self, engine):
        session, _ = _start(engine)
        out = engine.handle_user_message(session, "Jane")
        assert SWITCH_HINT_CHIP not in out.quick_replies
        out = engine.handle_user_message(session, "Your hair is red.")
        assert SWITCH_HINT_CHIP not in out.quick_replies
        out = engine.handle_user_message(session, "Your hobby is chess.")
        assert out.quick_replies[-1] == SWITCH_HINT_CHIP
        assert session.engine_state.guided_defined_count == SWITCH_HINT_THRESHOLD

    def test_hint_never_repeats(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        engine.handle_user_message(session, "Your hair is red.")
        engine.handle_user_message(session, "Your hobby is chess.")
        out = engine.handle_user_message(session, "Your age is 30.")
        assert SWITCH_HINT_CHIP not in out.quick_replies

    def test_hint_does_not_refire_after_delete_and_redefine(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        engine.handle_user_message(session, "Your hair is red.")
        engine.handle_user_message(session, "Your hobby is chess.")
        engine.handle_delete_attribute(session, "hair")
        assert session.engine_state.guided_defined_count == 2
        out = engine.handle_user_message(session, "Your hair is blue.")
        assert SWITCH_HINT_CHIP not in out.quick_replies

    def test_chips_never_exceed_four(self, engine):
        session, _ = _start(engine)
        for text in ("Jane", "Your hair is red.", "Your hobby is chess."):
            out = engine.handle_user_message(session, text)
            assert len(out.quick_replies) <= 4


class TestOpenMode:
    def _to_open(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        out = engine.handle_user_message(session, "Let's chat")
        return session, out

    def test_switch_announces_and_rechips(self, engine):
        session, out = self._to_open(engine)
        assert SWITCH_OPEN_TEXT in _texts(out)
        assert session.engine_state.mode is Mode.OPEN
        assert session.engine_state.phase is Phase.OPEN_IDLE
        assert out.quick_replies == [OPEN_MODE_CHIP]

    def test_question_yields_three_candidates_outside_the_transcript(self, engine):
        session, _ = self._to_open(engine)
        before = len(session.transcript)
        out = engine.handle_user_message(session, "What is your name?")
        assert out.candidates is not None and len(out.candidates) == 3
        assert [c.index for c in out.candidates] == [0, 1, 2]
        # only the user line was appended; candidates wait outside
        assert len(session.transcript) == before + 1
        assert session.engine_state.phase is Phase.CANDIDATES_OFFERED

    def test_fact_question_is_answered_from_the_persona(self, engine):
        session, _ = self._to_open(engine)
        out = engine.handle_user_message(session, "What is your name?")
        assert out.candidates[0].text == "My name is Jane."

    def test_choice_appends_only_the_chosen_text(self, engine):
        session, _ = self._to_open(engine)
        out = engine.handle_user_message(session, "What is your name?")
        texts = [c.text for c in out.candidates]
        choice = engine.handle_candidate_choice(session, 1)
        assert choice.bot_messages[0].text == texts[1]
        assert choice.bot_messages[0].author is Author.BOT
        assert session.engine_state.phase is Phase.OPEN_IDLE
        assert session.engine_state.pending_candidates == []
        skipped = [texts[0], texts[2]]
        transcript_texts = [m.text for m in session.transcript]
        assert all(t not in transcript_texts for t in skipped)

    def test_choice_without_pending_candidates(self, engine):
        session, _ = self._to_open(engine)
        with pytest.raises(NoCandidatesPending):
            engine.handle_candidate_choice(session, 0)

    def test_choice_index_out_of_range(self, engine):
        session, _ = self._to_open(engine)
        engine.handle_user_message(session, "What is your name?")
        with pytest.raises(IndexOutOfRange):
            engine.handle_candidate_choice(session, 3)
        # the offer survives a bad index
        assert session.engine_state.phase is Phase.CANDIDATES_OFFERED
        engine.handle_candidate_choice(session, 2)

    def test_new_utterance_replaces_unchosen_candidates(self, engine):
        session, _ = self._to_open(engine)
        engine.handle_user_message(session, "What is your name?")
        engine.handle_user_message(session, "What do you like?")
        assert session.engine_state.phase is Phase.CANDIDATES_OFFERED
        assert len(session.engine_state.pending_candidates) == 3

    def test_define_inside_open_mode_stays_open(self, engine):
        session, _ = self._to_open(engine)
        engine.handle_user_message(session, "What is your name?")
        out = engine.handle_user_message(session, "Your hair is green.")
        assert session.character.value_of("hair") == "green"
        assert session.engine_state.mode is Mode.OPEN
        assert session.engine_state.phase is Phase.OPEN_IDLE
        assert session.engine_state.pending_candidates == []
        assert out.quick_replies == [OPEN_MODE_CHIP]

    def test_open_definitions_do_not_count_toward_the_hint_threshold(self, engine):
        session, out = self._to_open(engine)
        engine.handle_user_message(session, "Your hair is green.")
        out = engine.handle_user_message(session, "Your age is 30.")
        assert session.engine_state.guided_defined_count == 1  # just the name
        assert SWITCH_HINT_CHIP not in out.quick_replies

    def test_backend_down_is_reported_and_survivable(self, registry, suggester):
        engine = ConversationEngine(registry, suggester, DownBackend())
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        engine.handle_user_message(session, "Let's chat")
        out = engine.handle_user_message(session, "Tell me a story")
        assert BACKEND_DOWN_TEXT in _texts(out)
        assert out.error == {
            "error_code": "backend_unavailable",
            "message": "generation offline",
        }
        assert session.engine_state.phase is Phase.OPEN_IDLE
        assert out.candidates is None

    def test_switch_back_to_guided_resumes_prompting(self, engine):
        session, _ = self._to_open(engine)
        out = engine.handle_user_message(session, "What else could we describe?")
        assert session.engine_state.mode is Mode.GUIDED
        assert _texts(out)[0] == "Back to shaping."
        assert _texts(out)[1].endswith("?")
        assert session.engine_state.phase is Phase.AWAITING_VALUE


class TestCompletion:
    def test_all_defined_announcement(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        last = None
        for attribute in CANONICAL_IDS:
            if attribute == "name":
                continue
            last = engine.handle_user_message(
                session, f"Your {attribute.replace('_', ' ')} is thing."
            )
        assert ALL_DEFINED_TEXT in _texts(last)
        assert session.engine_state.phase is Phase.GREETING
        assert last.quick_replies[:1] in ([], [SWITCH_HINT_CHIP])
        assert len(session.character.attributes) == 31

    def test_greeting_after_completion_does_not_reprompt(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        for attribute in CANONICAL_IDS:
            if attribute != "name":
                engine.handle_user_message(
                    session, f"Your {attribute.replace('_', ' ')} is thing."
                )
        out = engine.handle_user_message(session, "hi")
        assert _texts(out) == ["Hi!"]


class TestPinsAndDeletes:
    def test_pin_and_unpin(self, engine):
        session, _ = _start(engine)
        out = engine.handle_pin(session, 0)
        assert out.pin_delta == {"action": "pin", "message_id": 0, "changed": True}
        assert session.pins[0].message_id == 0
        out = engine.handle_pin(session, 0)
        assert out.pin_delta["changed"] is False
        out = engine.handle_unpin(session, 0)
        assert out.pin_delta == {"action": "unpin", "message_id": 0, "changed": True}
        assert session.pins == []

    def test_pin_rejection_leaves_turn_count_alone(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        turns = session.engine_state.turn_count
        with pytest.raises(NotBotMessage):
            engine.handle_pin(session, 2)  # the user's own line
        assert session.engine_state.turn_count == turns

    def test_delete_updates_counts(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        out = engine.handle_delete_attribute(session, "name")
        assert out.character_delta == {
            "action": "delete",
            "attribute": "name",
            "changed": True,
        }
        assert session.character.value_of("name") is None
        assert session.engine_state.guided_defined_count == 0
        out = engine.handle_delete_attribute(session, "name")
        assert out.character_delta["changed"] is False

    def test_deleted_attribute_reenters_the_prompt_pool(self, engine):
        session, _ = _start(engine)
        engine.handle_user_message(session, "Jane")
        for attribute in CANONICAL_IDS:
            if attribute != "name":
                engine.handle_user_message(
                    session, f"Your {attribute.replace('_', ' ')} is thing."
                )
        engine.handle_delete_attribute(session, "hobby")
        out = engine.handle_user_message(session, "hello")
        # the greeting restate advances to the one hole in the sheet
        assert session.engine_state.phase_attribute == "hobby"
        assert _texts(out)[-1].endswith("?")


class TestDeterminism:
    def test_same_seed_same_conversation(self, registry, suggester):
        def run():
            engine = ConversationEngine(registry, suggester, StubBackend(registry))
            session, _ = _start(engine, seed=77)
            for text in (
                "Jane",
                "Give me a suggestion",
                "no",
                "skip",
                "Let's chat",
                "What is your name?",
            ):
                engine.handle_user_message(session, text)
            engine.handle_candidate_choice(session, 0)
            return [
                (m.id, m.author.value, m.text) for m in session.transcript
            ], session.engine_state.rng_state

        assert run() == run()

    def test_different_seeds_diverge(self, registry, suggester):
        def first_prompt(seed):
            engine = ConversationEngine(registry, suggester, StubBackend(registry))
            session, _ = _start(engine, seed=seed)
            engine.handle_user_message(session, "Jane")
            return session.engine_state.phase_attribute

        prompts = {first_prompt(seed) for seed in range(12)}
        assert len(prompts) > 1

    def test_rng_state_advances_only_when_consumed(self, engine):
        session, _ = _start(engine, seed=5)
        before = session.engine_state.rng_state
        engine.handle_user_message(session, "What does that mean?")
        assert session.engine_state.rng_state == before
        engine.handle_user_message(session, "Jane")
        assert session.engine_state.rng_state != before


def _apply(engine, session, action):
    try:
        if action.kind == "U":
            engine.handle_user_message(session, action.text)
        elif action.kind == "C":
            engine.handle_candidate_choice(session, action.number)
        elif action.kind == "D":
            engine.handle_delete_attribute(session, action.text)
        else:
            engine.handle_pin(session, action.number)
    except CharshapeError:
        pass


def _check_invariants(session):
    state: EngineState = session.engine_state
    open_phases = {Phase.OPEN_IDLE, Phase.CANDIDATES_OFFERED}
    if state.mode is Mode.OPEN:
        assert state.phase in open_phases
    else:
        assert state.phase not in open_phases
    assert [m.id for m in session.transcript] == list(range(len(session.transcript)))
    for attribute, held in session.character.attributes.items():
        assert held.value not in session.character.rejected_for(attribute)
    assert set(state.guided_defined_ids) <= set(session.character.attributes)
    assert state.guided_defined_count <= len(session.character.attributes)
    if state.pending_suggestion is not None:
        assert state.phase is Phase.SUGGESTION_OFFERED
    if state.pending_candidates:
        assert state.phase is Phase.CANDIDATES_OFFERED
    for pin in session.pins:
        message = session.message_by_id(pin.message_id)
        assert message is not None and message.author is Author.BOT
    if state.phase in (Phase.AWAITING_NAME, Phase.AWAITING_VALUE, Phase.SUGGESTION_OFFERED):
        assert state.phase_attribute is not None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_invariants_hold_under_random_behavior(registry_module, seed):
    from charshape.concepts import SnapshotSource, load_default_snapshot

    engine = ConversationEngine(
        registry_module,
        ConceptSuggester(SnapshotSource(load_default_snapshot())),
        StubBackend(registry_module),
    )
    session, _ = engine.start_session(seed=seed, session_id="inv")
    for action in random_actions(random.Random(seed), 40, registry_module):
        _apply(engine, session, action)
        _check_invariants(session)


@pytest.fixture(scope="module")
def registry_module():
    return load_default_registry()
