"""Immutable in-memory knowledge graph.

Entities and relations are interned to dense integer ids in first-appearance
order; triples are a duplicate-free set with forward and inverse adjacency
indices so walks can follow a relation in either direction.  A graph is
frozen after construction and safe to share across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from .errors import DomainError, ParseError

EntityId = int
RelationId = int


class Direction(Enum):
    """Orientation of one relation step: along the stored edge or against it."""

    FORWARD = "forward"
    INVERSE = "inverse"

    def flipped(self) -> "Direction":
        return Direction.INVERSE if self is Direction.FORWARD else Direction.FORWARD


@dataclass(frozen=True, order=True)
class Triple:
    head: EntityId
    relation: RelationId
    tail: EntityId


class _SymbolTable:
    """Bijective label <-> dense id mapping, ids assigned in first-appearance order."""

    def __init__(self, kind: str):
        self._kind = kind
        self._labels: list[str] = []
        self._ids: dict[str, int] = {}

    def intern(self, label: str) -> int:
        existing = self._ids.get(label)
        if existing is not None:
            return existing
        new_id = len(self._labels)
        self._labels.append(label)
        self._ids[label] = new_id
        return new_id

    def id_of(self, label: str) -> int:
        try:
            return self._ids[label]
        except KeyError:
            raise DomainError(f"unknown {self._kind} label: {label!r}") from None

    def label_of(self, ident: int) -> str:
        if not 0 <= ident < len(self._labels):
            raise DomainError(f"unregistered {self._kind} id: {ident}")
        return self._labels[ident]

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    def __len__(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)


class KnowledgeGraph:
    """Frozen triple store with (head, relation) -> tails and
    (tail, relation) -> heads indices.

    Construct through :func:`load_triples` or :meth:`from_labeled_triples`;
    direct mutation is not supported.
    """

    def __init__(
        self,
        entities: _SymbolTable,
        relations: _SymbolTable,
        triples: frozenset[Triple],
    ):
        self._entities = entities
        self._relations = relations
        self._triples = triples
        fwd: dict[tuple[int, int], set[int]] = {}
        inv: dict[tuple[int, int], set[int]] = {}
        for tr in triples:
            fwd.setdefault((tr.head, tr.relation), set()).add(tr.tail)
            inv.setdefault((tr.tail, tr.relation), set()).add(tr.head)
        self._fwd = {k: frozenset(v) for k, v in fwd.items()}
        self._inv = {k: frozenset(v) for k, v in inv.items()}

    @classmethod
    def from_labeled_triples(cls, rows: Iterable[tuple[str, str, str]]) -> "KnowledgeGraph":
        entities = _SymbolTable("entity")
        relations = _SymbolTable("relation")
        triples = set()
        for head, rel, tail in rows:
            h = entities.intern(head)
            r = relations.intern(rel)
            t = entities.intern(tail)
            triples.add(Triple(h, r, t))
        return cls(entities, relations, frozenset(triples))

    # -- symbol lookups ------------------------------------------------

    @property
    def num_entities(self) -> int:
        return len(self._entities)

    @property
    def num_relations(self) -> int:
        return len(self._relations)

    @property
    def num_triples(self) -> int:
        return len(self._triples)

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    @property
    def entity_labels(self) -> tuple[str, ...]:
        return self._entities.labels

    @property
    def relation_labels(self) -> tuple[str, ...]:
        return self._relations.labels

    def entity_id(self, label: str) -> EntityId:
        return self._entities.id_of(label)

    def relation_id(self, label: str) -> RelationId:
        return self._relations.id_of(label)

    def entity_label(self, e: EntityId) -> str:
        return self._entities.label_of(e)

    def relation_label(self, r: RelationId) -> str:
        return self._relations.label_of(r)

    def has_entity(self, label: str) -> bool:
        return label in self._entities

    def has_relation(self, label: str) -> bool:
        return label in self._relations

    def _check_entity(self, e: EntityId) -> None:
        if not 0 <= e < len(self._entities):
            raise DomainError(f"unregistered entity id: {e}")

    def _check_relation(self, r: RelationId) -> None:
        if not 0 <= r < len(self._relations):
            raise DomainError(f"unregistered relation id: {r}")

    # -- membership and adjacency --------------------------------------

    def contains(self, h: EntityId, r: RelationId, t: EntityId) -> bool:
        """Whether the directed edge <h, r, t> is in the graph."""
        self._check_entity(h)
        self._check_relation(r)
        self._check_entity(t)
        return Triple(h, r, t) in self._triples

    def step_neighbors(
        self, e: EntityId, r: RelationId, direction: Direction
    ) -> frozenset[EntityId]:
        """Entities reachable from ``e`` by one ``r`` step.

        FORWARD yields tails of edges leaving ``e``; INVERSE yields heads of
        edges arriving at ``e``.
        """
        self._check_entity(e)
        self._check_relation(r)
        index = self._fwd if direction is Direction.FORWARD else self._inv
        return index.get((e, r), frozenset())

    # -- serialization --------------------------------------------------

    def to_lines(self) -> list[str]:
        """Triples as normalized TSV lines, sorted by id triple.

        Reloading the result yields a graph with identical counts and
        label-level membership (id assignments may differ).
        """
        return [
            f"{self.entity_label(t.head)}\t{self.relation_label(t.relation)}\t{self.entity_label(t.tail)}"
            for t in sorted(self._triples)
        ]

    def summary(self) -> str:
        return (
            f"entities: {self.num_entities}\n"
            f"relations: {self.num_relations}\n"
            f"triples: {self.num_triples}"
        )

    def __repr__(self) -> str:
        return (
            f"KnowledgeGraph(entities={self.num_entities}, "
            f"relations={self.num_relations}, triples={self.num_triples})"
        )


def _iter_lines(source: Iterable[str] | TextIO | str | Path) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    elif isinstance(source, io.TextIOBase):
        yield from source
    else:
        yield from source


def load_triples(source: Iterable[str] | TextIO | str | Path) -> KnowledgeGraph:
    """Build a graph from UTF-8 TSV: one ``head<TAB>relation<TAB>tail`` per line.

    Blank lines and lines whose first non-space character is ``#`` are
    skipped.  Labels may contain spaces but not tabs.  Duplicate triples are
    deduplicated; interning order is first appearance.

    Raises:
        ParseError: on a line with the wrong field count or an empty field.
    """
    rows: list[tuple[str, str, str]] = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\r\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 3:
            raise ParseError(
                f"expected 3 tab-separated fields, got {len(fields)}", line=lineno
            )
        if any(not f for f in fields):
            raise ParseError("empty field in triple", line=lineno)
        rows.append((fields[0], fields[1], fields[2]))
    return KnowledgeGraph.from_labeled_triples(rows)
