"""Core value types: character state, chat transcript, pins, session."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import EmptyValue, NotBotMessage, UnknownMessage, ValueTooLong

ATTRIBUTE_ID_RE = re.compile(r"^[a-z][a-z0-9_]*$")

MAX_VALUE_LEN = 200


def is_valid_attribute_id(token: str) -> bool:
    return bool(ATTRIBUTE_ID_RE.match(token))


class ValueSource(Enum):
    USER_TYPED = "user_typed"
    SUGGESTION_ACCEPTED = "suggestion_accepted"


class Author(Enum):
    USER = "user"
    BOT = "bot"


class Mode(Enum):
    GUIDED = "guided"
    OPEN = "open"


class MessageKind(Enum):
    UTTERANCE = "utterance"
    PROMPT = "prompt"
    EXPLANATION = "explanation"
    SUGGESTION = "suggestion"
    SYSTEM = "system"


def clean_value(raw: str) -> str:
    """Trim a user-supplied attribute value and enforce the 1..200 char bounds."""
    value = raw.strip()
    if not value:
        raise EmptyValue("attribute value is empty after trimming")
    if len(value) > MAX_VALUE_LEN:
        raise ValueTooLong(f"attribute value exceeds {MAX_VALUE_LEN} characters")
    return value


@dataclass
class AttributeValue:
    attribute: str
    value: str
    source: ValueSource
    defined_at: int  # turn index of the definition event

    def __post_init__(self):
        self.value = clean_value(self.value)


@dataclass
class Character:
    """Insertion-ordered attribute map plus per-attribute rejected suggestion values.

    rejected_values keeps list-with-set-semantics (no duplicates) so iteration
    order is reproducible across runs; a real set would not be.
    """

    attributes: dict[str, AttributeValue] = field(default_factory=dict)
    rejected_values: dict[str, list[str]] = field(default_factory=dict)

    def value_of(self, attribute: str) -> str | None:
        held = self.attributes.get(attribute)
        return held.value if held else None

    def rejected_for(self, attribute: str) -> list[str]:
        return self.rejected_values.get(attribute, [])


def set_attribute(character: Character, value: AttributeValue) -> Character:
    """Define or overwrite one attribute. The old value, if any, joins the
    rejected list so it is never suggested again; the new value leaves it."""
    old = character.attributes.get(value.attribute)
    if old is not None and old.value != value.value:
        _reject(character, value.attribute, old.value)
    rejected = character.rejected_values.get(value.attribute)
    if rejected and value.value in rejected:
        rejected.remove(value.value)
    character.attributes[value.attribute] = value
    return character


def record_rejection(character: Character, attribute: str, value: str) -> Character:
    current = character.value_of(attribute)
    if value != current:
        _reject(character, attribute, value)
    return character


def _reject(character: Character, attribute: str, value: str):
    bucket = character.rejected_values.setdefault(attribute, [])
    if value not in bucket:
        bucket.append(value)


def delete_attribute(character: Character, attribute: str) -> Character:
    """Remove an attribute; removing one that is absent is a quiet no-op."""
    character.attributes.pop(attribute, None)
    return character


@dataclass
class ChatMessage:
    id: int
    author: Author
    text: str
    mode: Mode
    kind: MessageKind


@dataclass
class PinnedStatement:
    message_id: int
    pinned_at: int


@dataclass
class Session:
    session_id: str
    seed: int
    character: Character = field(default_factory=Character)
    transcript: list[ChatMessage] = field(default_factory=list)
    pins: list[PinnedStatement] = field(default_factory=list)
    engine_state: Any = None  # owned by the conversation engine
    created_at: str = "1970-01-01T00:00:00Z"

    def message_by_id(self, message_id: int) -> ChatMessage | None:
        if 0 <= message_id < len(self.transcript):
            return self.transcript[message_id]
        return None


def pin_message(session: Session, message_id: int, pinned_at: int) -> bool:
    """Pin a bot statement. Returns False when it was already pinned."""
    message = session.message_by_id(message_id)
    if message is None:
        raise UnknownMessage(f"no message with id {message_id}")
    if message.author is not Author.BOT:
        raise NotBotMessage("only bot statements can be pinned")
    if any(p.message_id == message_id for p in session.pins):
        return False
    session.pins.append(PinnedStatement(message_id=message_id, pinned_at=pinned_at))
    return True


def unpin_message(session: Session, message_id: int) -> bool:
    """Remove a pin. Returns False when no such pin existed."""
    for i, p in enumerate(session.pins):
        if p.message_id == message_id:
            del session.pins[i]
            return True
    return False
