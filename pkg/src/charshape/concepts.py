"""Concept-graph value suggestions: offline edge snapshot plus a live is-a query client."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .domain import Character
from .errors import Exhausted, NoEdges, NotSuggestible, SourceUnavailable
from .registry import AttributeDefinition
from .rng import SeededRng

_ARTICLES = {"a", "an", "the"}


def clean_label(raw: str) -> str:
    """Turn a stored edge label into display text: underscores to spaces,
    leading articles dropped."""
    words = raw.replace("_", " ").split()
    while len(words) > 1 and words[0].lower() in _ARTICLES:
        words = words[1:]
    return " ".join(words)


@dataclass(frozen=True)
class ConceptEdge:
    start_label: str
    relation: str
    end_node: str
    weight: float


@dataclass
class ConceptSnapshot:
    version: str
    by_node: dict[str, list[ConceptEdge]] = field(default_factory=dict)

    def edges_for(self, node: str) -> list[ConceptEdge]:
        return self.by_node.get(node, [])


def load_snapshot(path: str | Path) -> ConceptSnapshot:
    """Read the bundled tab-separated edge file. A broken snapshot means the
    offline source cannot serve anything, hence SourceUnavailable."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SourceUnavailable(f"cannot read concept snapshot: {exc}") from exc
    version = "unversioned"
    by_node: dict[str, list[ConceptEdge]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line[1:].strip().lower().startswith("version:"):
                version = line.split(":", 1)[1].strip()
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise SourceUnavailable(f"snapshot line {lineno}: need node, label, weight")
        node, label, weight_raw = (f.strip() for f in fields)
        try:
            weight = float(weight_raw)
        except ValueError:
            raise SourceUnavailable(f"snapshot line {lineno}: bad weight {weight_raw!r}") from None
        if weight < 0:
            raise SourceUnavailable(f"snapshot line {lineno}: negative weight")
        by_node.setdefault(node, []).append(
            ConceptEdge(start_label=label, relation="IsA", end_node=node, weight=weight)
        )
    return ConceptSnapshot(version=version, by_node=by_node)


class SnapshotSource:
    """Serves is-a edges straight from the loaded snapshot, stored order kept."""

    def __init__(self, snapshot: ConceptSnapshot):
        self.snapshot = snapshot

    def fetch_instances(self, node: str, limit: int) -> list[ConceptEdge]:
        if not node:
            raise ValueError("node must be non-empty")
        edges = self.snapshot.edges_for(node)
        if not edges:
            raise NoEdges(f"snapshot has no is-a edges ending at {node!r}")
        return edges[:limit]


class LiveSource:
    """Queries a hosted concept graph for `X is-a <node>` edges."""

    def __init__(self, base_url: str, client: httpx.Client | None = None, timeout: float = 5.0):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)

    def fetch_instances(self, node: str, limit: int) -> list[ConceptEdge]:
        if not node:
            raise ValueError("node must be non-empty")
        params = {"end": f"/c/en/{node}", "rel": "/r/IsA", "limit": str(limit)}
        payload = None
        for attempt in range(2):  # one retry, then give up
            try:
                response = self._client.get(f"{self.base_url}/query", params=params)
                response.raise_for_status()
                payload = response.json()
                break
            except (httpx.HTTPError, ValueError) as exc:
                if attempt == 1:
                    raise SourceUnavailable(f"concept query failed: {exc}") from exc
        edges = []
        for entry in payload.get("edges", []) if isinstance(payload, dict) else []:
            start = entry.get("start") or {}
            label = start.get("label")
            if not label:
                continue
            edges.append(
                ConceptEdge(
                    start_label=str(label),
                    relation="IsA",
                    end_node=node,
                    weight=float(entry.get("weight", 1.0)),
                )
            )
        if not edges:
            raise NoEdges(f"no is-a edges ending at {node!r}")
        return edges[:limit]


class FallbackSource:
    """Live first; any live failure falls back to the snapshot."""

    def __init__(self, live: LiveSource, snapshot_source: SnapshotSource):
        self.live = live
        self.snapshot_source = snapshot_source

    def fetch_instances(self, node: str, limit: int) -> list[ConceptEdge]:
        try:
            return self.live.fetch_instances(node, limit)
        except (SourceUnavailable, NoEdges):
            return self.snapshot_source.fetch_instances(node, limit)


class ConceptSuggester:
    """Turns registry concept nodes into concrete value suggestions."""

    def __init__(self, source, fetch_limit: int = 10):
        self.source = source
        self.fetch_limit = fetch_limit
        self._cache: dict[tuple[str, int], list[str]] = {}
        self._lock = threading.Lock()

    def labels_for(self, node: str, limit: int | None = None) -> list[str]:
        """Cleaned, de-duplicated labels for one node; cached per (node, limit)."""
        limit = self.fetch_limit if limit is None else limit
        key = (node, limit)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return list(cached)
        edges = self.source.fetch_instances(node, limit)
        labels: list[str] = []
        for edge in edges:
            label = clean_label(edge.start_label)
            if label and label not in labels:
                labels.append(label)
        with self._lock:
            self._cache[key] = labels
        return list(labels)

    def suggest_value(
        self,
        definition: AttributeDefinition,
        character: Character,
        rng: SeededRng,
    ) -> str:
        if not definition.suggestible:
            raise NotSuggestible(f"{definition.id} has no concept node")
        labels = self.labels_for(definition.concept_node)
        rejected = character.rejected_for(definition.id)
        current = character.value_of(definition.id)
        candidates = [l for l in labels if l not in rejected and l != current]
        if not candidates:
            raise Exhausted(f"every known value for {definition.id} was rejected")
        return candidates[rng.next_index(len(candidates))]


def load_default_snapshot() -> ConceptSnapshot:
    from .registry import bundled_data_path

    return load_snapshot(bundled_data_path("concept_snapshot.tsv"))
