"""Rule-based intent recognition for user utterances."""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .domain import Mode
from .errors import RegistryParseError
from .registry import AttributeRegistry


class IntentKind(Enum):
    GREETING = "greeting"
    DEFINE_ATTRIBUTE = "define_attribute"
    PROVIDE_VALUE = "provide_value"
    REQUEST_SUGGESTION = "request_suggestion"
    REQUEST_EXPLANATION = "request_explanation"
    ACCEPT_SUGGESTION = "accept_suggestion"
    REJECT_SUGGESTION = "reject_suggestion"
    SKIP_ATTRIBUTE = "skip_attribute"
    SWITCH_TO_OPEN = "switch_to_open"
    SWITCH_TO_GUIDED = "switch_to_guided"
    OPEN_UTTERANCE = "open_utterance"
    UNRECOGNIZED = "unrecognized"


@dataclass(frozen=True)
class Intent:
    kind: IntentKind
    attribute: str | None = None
    text: str | None = None


class AwaitingKind(Enum):
    NONE = "none"
    VALUE_FOR = "value_for"
    ACCEPT_REJECT = "accept_reject"


@dataclass
class RecognizerContext:
    mode: Mode
    awaiting: AwaitingKind
    registry: AttributeRegistry
    awaiting_attribute: str | None = None


def normalize(text: str) -> list[str]:
    """Lowercase, swap punctuation for spaces (apostrophes survive), split."""
    text = text.lower().replace("’", "'")
    kept = [ch if (ch.isalnum() or ch == "'" or ch.isspace()) else " " for ch in text]
    return "".join(kept).split()


# Exact-utterance mode switches, recognized in both modes before anything else.
_SWITCH_TO_OPEN = {("let's", "chat"), ("lets", "chat")}
_SWITCH_TO_GUIDED = {("what", "else", "could", "we", "describe")}

# Guided control lexicons; phrases match as contiguous token runs anywhere in
# the utterance, longest run first, ties broken by this listing order.
_CONTROL_LEXICONS: list[tuple[IntentKind, tuple[str, ...]]] = [
    (IntentKind.REQUEST_SUGGESTION, ("suggest", "suggestion", "suggestions", "idea", "ideas")),
    (IntentKind.REQUEST_EXPLANATION, ("explain", "what does that mean", "meaning")),
    (IntentKind.ACCEPT_SUGGESTION, ("yes", "ok", "okay", "sure", "accept", "i like it", "take it")),
    (IntentKind.REJECT_SUGGESTION, ("no", "nope", "something else", "next suggestion")),
    (IntentKind.SKIP_ATTRIBUTE, ("skip", "next", "pass")),
]

_GREETINGS = {
    ("hi",), ("hello",), ("hey",), ("howdy",), ("hiya",), ("greetings",),
    ("good", "morning"), ("good", "afternoon"), ("good", "evening"),
}

_DEFINE_RE = re.compile(r"^\s*your\s+(.+?)\s+is\s+(.+)$", re.IGNORECASE | re.DOTALL)


def _contains_run(tokens: list[str], phrase: tuple[str, ...]) -> bool:
    width = len(phrase)
    return any(tuple(tokens[i : i + width]) == phrase for i in range(len(tokens) - width + 1))


def _match_control(tokens: list[str]) -> IntentKind | None:
    hits: list[tuple[int, int, IntentKind]] = []
    for order, (kind, phrases) in enumerate(_CONTROL_LEXICONS):
        for phrase in phrases:
            phrase_tokens = tuple(phrase.split())
            if _contains_run(tokens, phrase_tokens):
                hits.append((-len(phrase_tokens), order, kind))
    if not hits:
        return None
    hits.sort()
    return hits[0][2]


def synonym_map(registry: AttributeRegistry) -> dict[str, str]:
    return {form: d.id for d in registry for form in d.synonyms}


def _try_define(raw: str, registry: AttributeRegistry) -> Intent | None:
    matched = _DEFINE_RE.match(raw)
    if not matched:
        return None
    attr_phrase = " ".join(normalize(matched.group(1)))
    attribute = synonym_map(registry).get(attr_phrase)
    if attribute is None:
        return None
    value = re.sub(r"[.!?\s]+$", "", matched.group(2)).strip()
    if not value:
        return None
    return Intent(IntentKind.DEFINE_ATTRIBUTE, attribute=attribute, text=value)


def recognize(utterance: str, ctx: RecognizerContext) -> Intent:
    """Classify one utterance. Rules apply in fixed priority order, so e.g.
    a mode switch always beats treating the text as an attribute value."""
    raw = utterance.strip()
    tokens = normalize(raw)

    if tuple(tokens) in _SWITCH_TO_OPEN:
        return Intent(IntentKind.SWITCH_TO_OPEN)
    if tuple(tokens) in _SWITCH_TO_GUIDED:
        return Intent(IntentKind.SWITCH_TO_GUIDED)

    defined = _try_define(raw, ctx.registry)
    if defined is not None:
        return defined

    if ctx.mode is Mode.GUIDED:
        control = _match_control(tokens)
        if control is not None:
            return Intent(control)

    if ctx.awaiting is AwaitingKind.VALUE_FOR:
        return Intent(IntentKind.PROVIDE_VALUE, text=raw)

    if ctx.mode is Mode.OPEN:
        return Intent(IntentKind.OPEN_UTTERANCE, text=raw)

    if tuple(tokens) in _GREETINGS:
        return Intent(IntentKind.GREETING)

    return Intent(IntentKind.UNRECOGNIZED, text=raw)


# --- labeled corpus -------------------------------------------------------

@dataclass(frozen=True)
class CorpusRow:
    mode: Mode
    awaiting: AwaitingKind
    awaiting_attribute: str | None
    utterance: str
    expected: Intent


def _parse_expected(spec: str) -> Intent:
    kind_raw, _, rest = spec.partition(":")
    kind = IntentKind(kind_raw)
    if kind is IntentKind.DEFINE_ATTRIBUTE:
        attribute, _, value = rest.partition(":")
        return Intent(kind, attribute=attribute, text=value)
    if kind in (IntentKind.PROVIDE_VALUE, IntentKind.OPEN_UTTERANCE, IntentKind.UNRECOGNIZED):
        return Intent(kind, text=rest)
    return Intent(kind)


def load_corpus(path: str | Path) -> list[CorpusRow]:
    """Read the labeled utterance file: mode, awaiting, utterance, expected."""
    rows = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise RegistryParseError(f"corpus line {lineno}: need 4 fields", line=lineno)
        mode_raw, awaiting_raw, utterance, expected_raw = fields
        awaiting_attr = None
        if awaiting_raw.startswith("value_for:"):
            awaiting = AwaitingKind.VALUE_FOR
            awaiting_attr = awaiting_raw.split(":", 1)[1]
        else:
            awaiting = AwaitingKind(awaiting_raw)
        rows.append(
            CorpusRow(
                mode=Mode(mode_raw),
                awaiting=awaiting,
                awaiting_attribute=awaiting_attr,
                utterance=utterance,
                expected=_parse_expected(expected_raw),
            )
        )
    return rows
