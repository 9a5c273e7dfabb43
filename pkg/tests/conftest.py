from __future__ import annotations

import pytest

from charshape.concepts import ConceptSuggester, SnapshotSource, load_default_snapshot
from charshape.engine import ConversationEngine
from charshape.generation import StubBackend
from charshape.registry import AttributeRegistry, load_default_registry


@pytest.fixture(scope="session")
def registry() -> AttributeRegistry:
    return load_default_registry()


@pytest.fixture()
def suggester(registry) -> ConceptSuggester:
    return ConceptSuggester(SnapshotSource(load_default_snapshot()))


@pytest.fixture()
def engine(registry, suggester) -> ConversationEngine:
    return ConversationEngine(registry, suggester, StubBackend(registry))
