"""Attribute registry: the 31 askable character attributes and their metadata."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib.resources import files
from pathlib import Path

from .domain import Character, is_valid_attribute_id
from .errors import (
    NoneRemaining,
    RegistryParseError,
    RegistryValidationError,
    UnknownAttribute,
)
from .rng import SeededRng

EXPECTED_COUNT = 31
FIELD_COUNT = 7


class Category(Enum):
    PHYSIOLOGY = "physiology"
    PSYCHOLOGY = "psychology"
    SOCIOLOGY = "sociology"


@dataclass(frozen=True)
class AttributeDefinition:
    id: str
    category: Category
    display_name: str
    prompt: str  # the question the bot asks, always ends with "?"
    explanation: str
    persona_template: str  # contains "{value}" exactly once
    concept_node: str | None = None
    synonyms: tuple[str, ...] = ()

    @property
    def suggestible(self) -> bool:
        return self.concept_node is not None

    def render_persona(self, value: str) -> str:
        return self.persona_template.replace("{value}", value)


@dataclass
class AttributeRegistry:
    definitions: list[AttributeDefinition]
    by_id: dict[str, AttributeDefinition] = field(init=False)

    def __post_init__(self):
        self.by_id = {d.id: d for d in self.definitions}

    def __len__(self) -> int:
        return len(self.definitions)

    def __iter__(self):
        return iter(self.definitions)

    def get(self, attribute_id: str) -> AttributeDefinition:
        try:
            return self.by_id[attribute_id]
        except KeyError:
            raise UnknownAttribute(f"no attribute named {attribute_id!r}") from None

    def has(self, attribute_id: str) -> bool:
        return attribute_id in self.by_id


def _parse_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def load_registry(
    path: str | Path,
    synonyms_path: str | Path | None = None,
    strict: bool = True,
) -> AttributeRegistry:
    """Parse the tab-separated registry file.

    strict additionally enforces the full complement: exactly 31 entries with
    every category represented.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise RegistryParseError(f"cannot read registry file: {exc}") from exc

    definitions: list[AttributeDefinition] = []
    seen: set[str] = set()
    for lineno, line in _parse_lines(text):
        fields = line.split("\t")
        if len(fields) != FIELD_COUNT:
            raise RegistryParseError(
                f"line {lineno}: expected {FIELD_COUNT} tab-separated fields, got {len(fields)}",
                line=lineno,
            )
        attr_id, category_raw, display_name, prompt, explanation, template, node = (
            f.strip() for f in fields
        )
        if not is_valid_attribute_id(attr_id):
            raise RegistryValidationError(f"line {lineno}: bad attribute id {attr_id!r}")
        if attr_id in seen:
            raise RegistryValidationError(f"duplicate attribute id {attr_id!r}")
        seen.add(attr_id)
        try:
            category = Category(category_raw)
        except ValueError:
            raise RegistryValidationError(
                f"line {lineno}: unknown category {category_raw!r}"
            ) from None
        if not display_name or not explanation:
            raise RegistryValidationError(f"line {lineno}: empty field for {attr_id!r}")
        if not prompt.endswith("?"):
            raise RegistryValidationError(
                f"line {lineno}: prompt for {attr_id!r} must end with '?'"
            )
        if template.count("{value}") != 1:
            raise RegistryValidationError(
                f"line {lineno}: persona template for {attr_id!r} must contain "
                "'{value}' exactly once"
            )
        definitions.append(
            AttributeDefinition(
                id=attr_id,
                category=category,
                display_name=display_name,
                prompt=prompt,
                explanation=explanation,
                persona_template=template,
                concept_node=None if node == "-" else node,
            )
        )

    if strict:
        if len(definitions) != EXPECTED_COUNT:
            raise RegistryValidationError(
                f"expected exactly {EXPECTED_COUNT} attributes, found {len(definitions)}"
            )
        present = {d.category for d in definitions}
        if present != set(Category):
            missing = sorted(c.value for c in set(Category) - present)
            raise RegistryValidationError(f"categories without attributes: {missing}")

    registry = AttributeRegistry(definitions)
    if synonyms_path is not None:
        _attach_synonyms(registry, synonyms_path)
    else:
        _attach_synonyms(registry, None)
    return registry


def _attach_synonyms(registry: AttributeRegistry, path: str | Path | None):
    extra: dict[str, list[str]] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise RegistryParseError(f"cannot read synonym file: {exc}") from exc
        for lineno, line in _parse_lines(text):
            fields = [f.strip() for f in line.split("\t")]
            if len(fields) != 2 or not all(fields):
                raise RegistryParseError(
                    f"line {lineno}: synonym rows need exactly id<TAB>synonym",
                    line=lineno,
                )
            attr_id, synonym = fields
            if not registry.has(attr_id):
                raise RegistryValidationError(
                    f"line {lineno}: synonym for unknown attribute {attr_id!r}"
                )
            extra.setdefault(attr_id, []).append(synonym.lower())

    owner: dict[str, str] = {}
    refreshed = []
    for definition in registry.definitions:
        forms: list[str] = []
        for form in (
            definition.display_name.lower(),
            definition.id.replace("_", " "),
            *extra.get(definition.id, []),
        ):
            if form not in forms:
                forms.append(form)
        for form in forms:
            if owner.get(form, definition.id) != definition.id:
                raise RegistryValidationError(
                    f"synonym {form!r} maps to both {owner[form]!r} and {definition.id!r}"
                )
            owner[form] = definition.id
        refreshed.append(
            AttributeDefinition(
                id=definition.id,
                category=definition.category,
                display_name=definition.display_name,
                prompt=definition.prompt,
                explanation=definition.explanation,
                persona_template=definition.persona_template,
                concept_node=definition.concept_node,
                synonyms=tuple(forms),
            )
        )
    registry.definitions = refreshed
    registry.by_id = {d.id: d for d in refreshed}


def bundled_data_path(name: str) -> Path:
    return Path(str(files("charshape").joinpath("data", name)))


def load_default_registry(strict: bool = True) -> AttributeRegistry:
    return load_registry(
        bundled_data_path("attributes.tsv"),
        synonyms_path=bundled_data_path("synonyms.tsv"),
        strict=strict,
    )


def draw_undefined(
    registry: AttributeRegistry,
    character: Character,
    rng: SeededRng,
    exclude: tuple[str, ...] = (),
) -> AttributeDefinition:
    """Pick one still-undefined attribute, uniformly by the seeded stream.

    The candidate list keeps registry order, so a given rng state always lands
    on the same attribute. `exclude` trims the pool for caller-side rules
    (skip-for-one-draw, hold back the name until it is set); when the trim
    would empty a non-empty pool, it is ignored rather than starving the draw.
    """
    undefined = [d for d in registry if d.id not in character.attributes]
    if not undefined:
        raise NoneRemaining("every attribute is already defined")
    pool = [d for d in undefined if d.id not in exclude] or undefined
    return pool[rng.next_index(len(pool))]


def explanation_for(registry: AttributeRegistry, attribute_id: str) -> str:
    return registry.get(attribute_id).explanation
