"""Candidate reply generation: persona assembly plus stub and remote backends."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import httpx

from .domain import Character
from .errors import BackendUnavailable, MalformedResponse
from .intents import normalize
from .registry import AttributeDefinition, AttributeRegistry, bundled_data_path
from .rng import fnv1a64

DEFAULT_CANDIDATES = 3
HISTORY_WINDOW = 10
PERSONA_BUDGET = 20  # sentence cap applied by the remote adapter
GENERIC_REPLY_COUNT = 32


@dataclass(frozen=True)
class PersonaSentence:
    attribute: str
    text: str


@dataclass(frozen=True)
class HistoryEntry:
    role: str  # "user" | "bot"
    text: str


@dataclass
class GenerationRequest:
    persona: list[str]
    history: list[HistoryEntry]
    n: int = DEFAULT_CANDIDATES
    seed: int = 0


@dataclass(frozen=True)
class GenerationCandidate:
    index: int
    text: str


def build_persona(character: Character, registry: AttributeRegistry) -> list[PersonaSentence]:
    """One sentence per defined attribute, in definition order."""
    sentences = []
    for attribute, held in character.attributes.items():
        definition = registry.get(attribute)
        sentences.append(
            PersonaSentence(attribute=attribute, text=definition.render_persona(held.value))
        )
    return sentences


def window_history(history: list[HistoryEntry], max_turns: int = HISTORY_WINDOW) -> list[HistoryEntry]:
    if max_turns <= 0:
        return []
    return history[-max_turns:]


def hash_request(request: GenerationRequest) -> int:
    """Canonical FNV-1a digest of a request; the stub's only entropy source."""
    canonical = (
        "\n".join(request.persona)
        + "\x1f"
        + "\n".join(f"{entry.role}\t{entry.text}" for entry in request.history)
        + "\x1f"
        + str(request.seed)
    )
    return fnv1a64(canonical.encode("utf-8"))


@lru_cache(maxsize=1)
def generic_replies() -> tuple[str, ...]:
    lines = bundled_data_path("generic_replies.txt").read_text(encoding="utf-8").splitlines()
    replies = tuple(line.strip() for line in lines if line.strip())
    if len(replies) != GENERIC_REPLY_COUNT:
        raise MalformedResponse(
            f"generic reply table must hold {GENERIC_REPLY_COUNT} entries, found {len(replies)}"
        )
    return replies


def _template_halves(definition: AttributeDefinition) -> tuple[str, str]:
    prefix, _, suffix = definition.persona_template.partition("{value}")
    return prefix, suffix


def _sentence_for(definition: AttributeDefinition, persona: list[str]) -> str | None:
    prefix, suffix = _template_halves(definition)
    for sentence in persona:
        if (
            sentence.startswith(prefix)
            and sentence.endswith(suffix)
            and len(sentence) > len(prefix) + len(suffix)
        ):
            return sentence
    return None


def _synonym_hit(tokens: list[str], definition: AttributeDefinition) -> bool:
    for form in definition.synonyms:
        phrase = tuple(form.split())
        width = len(phrase)
        if any(tuple(tokens[i : i + width]) == phrase for i in range(len(tokens) - width + 1)):
            return True
    return False


class StubBackend:
    """Deterministic offline backend.

    If the latest user line names a defined attribute, the first candidate is
    that attribute's persona sentence verbatim and the second a softened
    variant; everything else comes from the generic reply table, indexed by
    the request hash so consecutive picks never repeat.
    """

    def __init__(self, registry: AttributeRegistry):
        self.registry = registry

    def generate(self, request: GenerationRequest) -> list[str]:
        if request.n < 1:
            raise ValueError("n must be positive")
        if request.n > GENERIC_REPLY_COUNT:
            raise ValueError(f"stub backend serves at most {GENERIC_REPLY_COUNT} candidates")
        table = generic_replies()
        digest = hash_request(request)

        fact = self._match_fact(request)
        candidates: list[str] = []
        if fact is not None:
            candidates.append(fact)
            if request.n >= 2:
                candidates.append("Well, " + fact[:1].lower() + fact[1:])
        offset = 0
        while len(candidates) < request.n:
            candidates.append(table[(digest + offset) % GENERIC_REPLY_COUNT])
            offset += 1
        return candidates

    def _match_fact(self, request: GenerationRequest) -> str | None:
        last_user = next((e for e in reversed(request.history) if e.role == "user"), None)
        if last_user is None:
            return None
        tokens = normalize(last_user.text)
        for definition in self.registry:
            if _synonym_hit(tokens, definition):
                sentence = _sentence_for(definition, request.persona)
                if sentence is not None:
                    return sentence
        return None


class RemoteBackend:
    """HTTP adapter for a hosted generation service."""

    def __init__(self, base_url: str, client: httpx.Client | None = None, timeout: float = 15.0):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)

    def _post(self, body: dict) -> httpx.Response:
        response = self._client.post(f"{self.base_url}/generate", json=body)
        if response.status_code >= 500:
            raise httpx.HTTPStatusError(
                "server error", request=response.request, response=response
            )
        return response

    def generate(self, request: GenerationRequest) -> list[str]:
        persona = request.persona[-PERSONA_BUDGET:]  # oldest-defined sentences go first
        body = {
            "persona": persona,
            "history": [{"role": e.role, "text": e.text} for e in request.history],
            "n": request.n,
            "seed": request.seed,
        }
        try:
            response = self._post(body)
        except httpx.HTTPError:
            try:
                response = self._post(body)  # one retry
            except httpx.HTTPError as exc:
                raise BackendUnavailable(f"generation service unreachable: {exc}") from exc
        try:
            payload = response.json()
        except ValueError as exc:
            raise MalformedResponse("generation service returned non-JSON") from exc
        candidates = payload.get("candidates") if isinstance(payload, dict) else None
        if not isinstance(candidates, list):
            raise MalformedResponse("generation response missing candidates list")
        texts = [str(c).strip() for c in candidates]
        if len(texts) != request.n or any(not t for t in texts):
            raise MalformedResponse("generation response has wrong arity or empty texts")
        return texts


def generate_candidates(request: GenerationRequest, backend) -> list[GenerationCandidate]:
    """Single entry point the engine calls; enforces the arity contract."""
    texts = backend.generate(request)
    if len(texts) != request.n or any(not t.strip() for t in texts):
        raise MalformedResponse("backend produced wrong arity or empty candidates")
    return [GenerationCandidate(index=i, text=t) for i, t in enumerate(texts)]
