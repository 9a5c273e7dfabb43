"""Conversation engine: guided attribute shaping and open persona chat."""
from __future__ import annotations

import secrets
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .concepts import ConceptSuggester
from .domain import (
    AttributeValue,
    Author,
    Character,
    ChatMessage,
    MessageKind,
    Mode,
    Session,
    ValueSource,
    delete_attribute,
    pin_message,
    record_rejection,
    set_attribute,
    unpin_message,
)
from .errors import (
    BackendUnavailable,
    EmptyValue,
    Exhausted,
    IndexOutOfRange,
    MalformedResponse,
    NoCandidatesPending,
    NoEdges,
    NoneRemaining,
    NotSuggestible,
    SourceUnavailable,
    ValueTooLong,
)
from .generation import (
    GenerationCandidate,
    GenerationRequest,
    HistoryEntry,
    build_persona,
    generate_candidates,
    window_history,
)
from .intents import AwaitingKind, Intent, IntentKind, RecognizerContext, recognize
from .registry import AttributeDefinition, AttributeRegistry, draw_undefined
from .rng import SeededRng

SWITCH_HINT_THRESHOLD = 3
SUGGESTION_STREAK_CAP = 5

OPEN_MODE_CHIP = "What else could we describe?"
SWITCH_HINT_CHIP = "Let's chat"

GREETING_TEXT = (
    "Hi! Together we can shape a brand-new character. I will become that "
    "character as we go, so feel free to quiz me any time."
)
ALL_DEFINED_TEXT = (
    'That was the last one, the whole character sheet is filled in! '
    'Say "Let\'s chat" and talk to your creation.'
)
SWITCH_OPEN_TEXT = "Great, let's just chat! Ask me anything."
SWITCH_GUIDED_TEXT = "Back to shaping."
SKIP_TEXT = "Alright, skipping that one."
OUT_OF_IDEAS_TEXT = "I am out of ideas for this one. What would you say?"
STREAK_CAP_TEXT = (
    "I have offered five ideas already, so now I am curious about yours. "
    "What would you say?"
)
SOURCE_DOWN_TEXT = (
    "Sorry, I cannot reach my idea source right now. Just tell me your own value."
)
BACKEND_DOWN_TEXT = (
    "Sorry, I am lost for words right now. Give me a moment and ask again."
)
TOO_LONG_TEXT = "That is a bit long for me. Could you keep it under 200 characters?"
HELP_SUGGESTION_TEXT = (
    'There is a suggestion on the table. Say "yes" to take it, "no" for '
    'another idea, or "skip" to move on.'
)
HELP_GUIDED_TEXT = (
    'I did not catch that. You can set things directly, like "Your name is '
    'Jane.", or say "Let\'s chat" to just talk.'
)
NO_SUGGESTION_PENDING_TEXT = "There is no suggestion on the table right now."
NOT_SUGGESTIBLE_TEXT = "I have no idea pool for {display}. Just tell me!"
GREETING_REPLY_TEXT = "Hi!"


class Phase(Enum):
    # GREETING doubles as the guided idle state once every attribute is set.
    GREETING = "greeting"
    AWAITING_NAME = "awaiting_name"
    AWAITING_VALUE = "awaiting_value"
    SUGGESTION_OFFERED = "suggestion_offered"
    OPEN_IDLE = "open_idle"
    CANDIDATES_OFFERED = "candidates_offered"


@dataclass
class EngineState:
    mode: Mode = Mode.GUIDED
    phase: Phase = Phase.GREETING
    phase_attribute: str | None = None
    pending_suggestion: str | None = None
    pending_candidates: list[GenerationCandidate] = field(default_factory=list)
    guided_defined_ids: list[str] = field(default_factory=list)
    switch_hint_shown: bool = False
    suggestion_streak: int = 0
    last_skipped: str | None = None
    turn_count: int = 0
    rng_state: int = 0

    @property
    def guided_defined_count(self) -> int:
        return len(self.guided_defined_ids)


@dataclass
class TurnOutput:
    bot_messages: list[ChatMessage] = field(default_factory=list)
    quick_replies: list[str] = field(default_factory=list)
    candidates: list[GenerationCandidate] | None = None
    character_delta: dict | None = None
    pin_delta: dict | None = None
    error: dict | None = None


def _display(definition: AttributeDefinition) -> str:
    name = definition.display_name
    return name if name.isupper() else name[0].lower() + name[1:]


def now_rfc3339() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class ConversationEngine:
    """Applies one user action at a time to a session, deterministically."""

    def __init__(
        self,
        registry: AttributeRegistry,
        suggester: ConceptSuggester,
        backend,
        history_window: int = 10,
        candidate_count: int = 3,
    ):
        self.registry = registry
        self.suggester = suggester
        self.backend = backend
        self.history_window = history_window
        self.candidate_count = candidate_count

    # -- session lifecycle --------------------------------------------------

    def start_session(
        self,
        seed: int | None = None,
        session_id: str | None = None,
        created_at: str | None = None,
    ) -> tuple[Session, TurnOutput]:
        seed = secrets.randbits(64) if seed is None else seed
        session = Session(
            session_id=session_id or uuid.uuid4().hex,
            seed=seed,
            engine_state=EngineState(rng_state=seed),
            created_at=created_at or now_rfc3339(),
        )
        state: EngineState = session.engine_state
        out = TurnOutput()
        self._say(session, out, GREETING_TEXT, MessageKind.SYSTEM)
        name_def = self.registry.get("name")
        self._say(session, out, name_def.prompt, MessageKind.PROMPT)
        state.phase = Phase.AWAITING_NAME
        state.phase_attribute = "name"
        out.quick_replies = self._chips(state)
        return session, out

    # -- user actions -------------------------------------------------------

    def handle_user_message(self, session: Session, text: str) -> TurnOutput:
        if not text.strip():
            raise EmptyValue("message text is empty")
        state: EngineState = session.engine_state
        state.turn_count += 1
        rng = SeededRng(state.rng_state)
        out = TurnOutput()
        count_before = state.guided_defined_count

        self._append(session, Author.USER, text.strip(), MessageKind.UTTERANCE)
        intent = recognize(text, self._context(state))
        self._dispatch(session, state, rng, intent, out)

        if (
            state.mode is Mode.GUIDED
            and not state.switch_hint_shown
            and count_before < SWITCH_HINT_THRESHOLD <= state.guided_defined_count
        ):
            out.quick_replies = self._chips(state) + [SWITCH_HINT_CHIP]
            state.switch_hint_shown = True
        else:
            out.quick_replies = self._chips(state)

        state.rng_state = rng.state
        return out

    def handle_candidate_choice(self, session: Session, index: int) -> TurnOutput:
        state: EngineState = session.engine_state
        if state.phase is not Phase.CANDIDATES_OFFERED:
            raise NoCandidatesPending("no candidate replies are awaiting a choice")
        if not 0 <= index < len(state.pending_candidates):
            raise IndexOutOfRange(
                f"candidate index {index} not in 0..{len(state.pending_candidates) - 1}"
            )
        state.turn_count += 1
        out = TurnOutput()
        chosen = state.pending_candidates[index]
        self._say(session, out, chosen.text, MessageKind.UTTERANCE)
        state.pending_candidates = []
        state.phase = Phase.OPEN_IDLE
        out.quick_replies = self._chips(state)
        return out

    def handle_delete_attribute(self, session: Session, attribute_id: str) -> TurnOutput:
        state: EngineState = session.engine_state
        state.turn_count += 1
        existed = attribute_id in session.character.attributes
        delete_attribute(session.character, attribute_id)
        if attribute_id in state.guided_defined_ids:
            state.guided_defined_ids.remove(attribute_id)
        out = TurnOutput(
            character_delta={"action": "delete", "attribute": attribute_id, "changed": existed}
        )
        out.quick_replies = self._chips(state)
        return out

    def handle_pin(self, session: Session, message_id: int) -> TurnOutput:
        state: EngineState = session.engine_state
        changed = pin_message(session, message_id, pinned_at=state.turn_count + 1)
        state.turn_count += 1
        out = TurnOutput(pin_delta={"action": "pin", "message_id": message_id, "changed": changed})
        out.quick_replies = self._chips(state)
        return out

    def handle_unpin(self, session: Session, message_id: int) -> TurnOutput:
        state: EngineState = session.engine_state
        changed = unpin_message(session, message_id)
        state.turn_count += 1
        out = TurnOutput(
            pin_delta={"action": "unpin", "message_id": message_id, "changed": changed}
        )
        out.quick_replies = self._chips(state)
        return out

    # -- intent dispatch ----------------------------------------------------

    def _dispatch(
        self,
        session: Session,
        state: EngineState,
        rng: SeededRng,
        intent: Intent,
        out: TurnOutput,
    ):
        kind = intent.kind
        if kind is IntentKind.SWITCH_TO_OPEN:
            state.mode = Mode.OPEN
            state.phase = Phase.OPEN_IDLE
            state.phase_attribute = None
            state.pending_suggestion = None
            state.pending_candidates = []
            self._say(session, out, SWITCH_OPEN_TEXT, MessageKind.SYSTEM)
        elif kind is IntentKind.SWITCH_TO_GUIDED:
            state.mode = Mode.GUIDED
            state.pending_candidates = []
            self._say(session, out, SWITCH_GUIDED_TEXT, MessageKind.SYSTEM)
            self._advance_guided(session, state, rng, out)
        elif kind is IntentKind.DEFINE_ATTRIBUTE:
            self._apply_definition(
                session, state, rng, intent.attribute, intent.text, ValueSource.USER_TYPED, out
            )
        elif kind is IntentKind.PROVIDE_VALUE:
            self._apply_definition(
                session, state, rng, state.phase_attribute, intent.text, ValueSource.USER_TYPED, out
            )
        elif kind is IntentKind.REQUEST_SUGGESTION:
            self._handle_suggestion_request(session, state, rng, out)
        elif kind is IntentKind.ACCEPT_SUGGESTION:
            self._handle_accept(session, state, rng, out)
        elif kind is IntentKind.REJECT_SUGGESTION:
            self._handle_reject(session, state, rng, out)
        elif kind is IntentKind.REQUEST_EXPLANATION:
            self._handle_explanation(session, state, out)
        elif kind is IntentKind.SKIP_ATTRIBUTE:
            self._handle_skip(session, state, rng, out)
        elif kind is IntentKind.OPEN_UTTERANCE:
            self._handle_open_utterance(session, state, rng, out)
        elif kind is IntentKind.GREETING:
            self._say(session, out, GREETING_REPLY_TEXT, MessageKind.SYSTEM)
            self._restate(session, state, rng, out)
        else:
            help_text = (
                HELP_SUGGESTION_TEXT
                if state.phase is Phase.SUGGESTION_OFFERED
                else HELP_GUIDED_TEXT
            )
            self._say(session, out, help_text, MessageKind.SYSTEM)

    def _apply_definition(
        self,
        session: Session,
        state: EngineState,
        rng: SeededRng,
        attribute: str | None,
        value: str,
        source: ValueSource,
        out: TurnOutput,
    ):
        if attribute is None:
            self._say(session, out, HELP_GUIDED_TEXT, MessageKind.SYSTEM)
            return
        definition = self.registry.get(attribute)
        try:
            held = AttributeValue(
                attribute=attribute, value=value, source=source, defined_at=state.turn_count
            )
        except (EmptyValue, ValueTooLong):
            self._say(session, out, TOO_LONG_TEXT, MessageKind.SYSTEM)
            return
        set_attribute(session.character, held)
        if state.mode is Mode.GUIDED and attribute not in state.guided_defined_ids:
            state.guided_defined_ids.append(attribute)
        out.character_delta = {
            "action": "set",
            "attribute": attribute,
            "value": held.value,
            "source": source.value,
        }
        self._say(
            session,
            out,
            f"Thanks! I noted my {_display(definition)}: {held.value}.",
            MessageKind.SYSTEM,
        )
        if state.mode is Mode.GUIDED:
            state.pending_suggestion = None
            self._advance_guided(session, state, rng, out)
        else:
            state.phase = Phase.OPEN_IDLE
            state.pending_candidates = []

    def _handle_suggestion_request(
        self, session: Session, state: EngineState, rng: SeededRng, out: TurnOutput
    ):
        attribute = state.phase_attribute
        if attribute is None:
            self._say(session, out, HELP_GUIDED_TEXT, MessageKind.SYSTEM)
            return
        if state.phase is Phase.SUGGESTION_OFFERED and state.pending_suggestion:
            # asking again passes on the offer currently on the table
            record_rejection(session.character, attribute, state.pending_suggestion)
            state.pending_suggestion = None
        self._offer_suggestion(session, state, rng, attribute, out)

    def _offer_suggestion(
        self,
        session: Session,
        state: EngineState,
        rng: SeededRng,
        attribute: str,
        out: TurnOutput,
    ):
        definition = self.registry.get(attribute)
        if not definition.suggestible:
            self._say(
                session,
                out,
                NOT_SUGGESTIBLE_TEXT.format(display=_display(definition)),
                MessageKind.SYSTEM,
            )
            self._reprompt(session, state, definition, out)
            return
        if state.suggestion_streak >= SUGGESTION_STREAK_CAP:
            self._say(session, out, STREAK_CAP_TEXT, MessageKind.SYSTEM)
            state.phase = Phase.AWAITING_VALUE
            state.pending_suggestion = None
            return
        try:
            value = self.suggester.suggest_value(definition, session.character, rng)
        except (Exhausted, NoEdges):
            self._say(session, out, OUT_OF_IDEAS_TEXT, MessageKind.SYSTEM)
            state.phase = Phase.AWAITING_VALUE
            state.pending_suggestion = None
            return
        except SourceUnavailable as exc:
            self._say(session, out, SOURCE_DOWN_TEXT, MessageKind.SYSTEM)
            out.error = {"error_code": exc.code, "message": exc.message}
            state.phase = Phase.AWAITING_VALUE
            state.pending_suggestion = None
            return
        state.suggestion_streak += 1
        state.pending_suggestion = value
        state.phase = Phase.SUGGESTION_OFFERED
        self._say(session, out, f'How about "{value}"?', MessageKind.SUGGESTION)

    def _handle_accept(self, session: Session, state: EngineState, rng: SeededRng, out: TurnOutput):
        if state.phase is not Phase.SUGGESTION_OFFERED or state.pending_suggestion is None:
            self._say(session, out, NO_SUGGESTION_PENDING_TEXT, MessageKind.SYSTEM)
            return
        self._apply_definition(
            session,
            state,
            rng,
            state.phase_attribute,
            state.pending_suggestion,
            ValueSource.SUGGESTION_ACCEPTED,
            out,
        )

    def _handle_reject(self, session: Session, state: EngineState, rng: SeededRng, out: TurnOutput):
        if state.phase is not Phase.SUGGESTION_OFFERED or state.pending_suggestion is None:
            self._say(session, out, NO_SUGGESTION_PENDING_TEXT, MessageKind.SYSTEM)
            return
        attribute = state.phase_attribute
        record_rejection(session.character, attribute, state.pending_suggestion)
        state.pending_suggestion = None
        self._offer_suggestion(session, state, rng, attribute, out)

    def _handle_explanation(self, session: Session, state: EngineState, out: TurnOutput):
        attribute = state.phase_attribute
        if attribute is None:
            self._say(session, out, HELP_GUIDED_TEXT, MessageKind.SYSTEM)
            return
        definition = self.registry.get(attribute)
        self._say(session, out, definition.explanation, MessageKind.EXPLANATION)
        self._reprompt(session, state, definition, out)

    def _handle_skip(self, session: Session, state: EngineState, rng: SeededRng, out: TurnOutput):
        attribute = state.phase_attribute
        if attribute is None:
            self._say(session, out, HELP_GUIDED_TEXT, MessageKind.SYSTEM)
            return
        state.last_skipped = attribute
        state.pending_suggestion = None
        self._say(session, out, SKIP_TEXT, MessageKind.SYSTEM)
        self._advance_guided(session, state, rng, out)

    def _handle_open_utterance(
        self, session: Session, state: EngineState, rng: SeededRng, out: TurnOutput
    ):
        persona = [p.text for p in build_persona(session.character, self.registry)]
        history = [
            HistoryEntry(role=m.author.value, text=m.text) for m in session.transcript
        ]
        request = GenerationRequest(
            persona=persona,
            history=window_history(history, self.history_window),
            n=self.candidate_count,
            seed=rng.next(),
        )
        try:
            candidates = generate_candidates(request, self.backend)
        except (BackendUnavailable, MalformedResponse) as exc:
            self._say(session, out, BACKEND_DOWN_TEXT, MessageKind.SYSTEM)
            out.error = {"error_code": exc.code, "message": exc.message}
            state.pending_candidates = []
            state.phase = Phase.OPEN_IDLE
            return
        state.pending_candidates = candidates
        state.phase = Phase.CANDIDATES_OFFERED
        out.candidates = list(candidates)

    # -- guided flow helpers --------------------------------------------------

    def _advance_guided(self, session: Session, state: EngineState, rng: SeededRng, out: TurnOutput):
        exclude = []
        if state.last_skipped is not None:
            exclude.append(state.last_skipped)
            state.last_skipped = None  # the skip holds for exactly one draw
        if "name" not in session.character.attributes:
            exclude.append("name")  # the name is asked up front, never drawn
        try:
            definition = draw_undefined(
                self.registry, session.character, rng, exclude=tuple(exclude)
            )
        except NoneRemaining:
            self._say(session, out, ALL_DEFINED_TEXT, MessageKind.SYSTEM)
            state.phase = Phase.GREETING
            state.phase_attribute = None
            state.pending_suggestion = None
            state.suggestion_streak = 0
            return
        state.phase = Phase.AWAITING_VALUE
        state.phase_attribute = definition.id
        state.pending_suggestion = None
        state.suggestion_streak = 0
        self._say(session, out, definition.prompt, MessageKind.PROMPT)

    def _reprompt(self, session: Session, state: EngineState, definition, out: TurnOutput):
        if state.phase is Phase.SUGGESTION_OFFERED and state.pending_suggestion:
            self._say(
                session,
                out,
                f'Still on offer: "{state.pending_suggestion}". Yes or no?',
                MessageKind.SUGGESTION,
            )
        else:
            self._say(session, out, definition.prompt, MessageKind.PROMPT)

    def _restate(self, session: Session, state: EngineState, rng: SeededRng, out: TurnOutput):
        if state.phase in (Phase.AWAITING_NAME, Phase.AWAITING_VALUE, Phase.SUGGESTION_OFFERED):
            self._reprompt(session, state, self.registry.get(state.phase_attribute), out)
        elif state.mode is Mode.GUIDED:
            if len(session.character.attributes) < len(self.registry):
                self._advance_guided(session, state, rng, out)

    # -- plumbing -------------------------------------------------------------

    def _context(self, state: EngineState) -> RecognizerContext:
        if state.phase in (Phase.AWAITING_NAME, Phase.AWAITING_VALUE):
            awaiting = AwaitingKind.VALUE_FOR
        elif state.phase is Phase.SUGGESTION_OFFERED:
            awaiting = AwaitingKind.ACCEPT_REJECT
        else:
            awaiting = AwaitingKind.NONE
        return RecognizerContext(
            mode=state.mode,
            awaiting=awaiting,
            registry=self.registry,
            awaiting_attribute=state.phase_attribute,
        )

    def _append(self, session: Session, author: Author, text: str, kind: MessageKind) -> ChatMessage:
        state: EngineState = session.engine_state
        message = ChatMessage(
            id=len(session.transcript), author=author, text=text, mode=state.mode, kind=kind
        )
        session.transcript.append(message)
        return message

    def _say(self, session: Session, out: TurnOutput, text: str, kind: MessageKind) -> ChatMessage:
        message = self._append(session, Author.BOT, text, kind)
        out.bot_messages.append(message)
        return message

    def _chips(self, state: EngineState) -> list[str]:
        if state.mode is Mode.OPEN:
            return [OPEN_MODE_CHIP]
        if state.phase in (Phase.AWAITING_NAME, Phase.AWAITING_VALUE):
            definition = self.registry.get(state.phase_attribute)
            chips = ["Give me a suggestion"] if definition.suggestible else []
            return chips + ["What does that mean?", "Skip"]
        if state.phase is Phase.SUGGESTION_OFFERED:
            return ["Yes", "Something else", "Skip"]
        return []
