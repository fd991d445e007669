"""Path types and concrete path search between a query anchor and an item.

A path type is an ordered sequence of relation steps, each taken forward or
inverse.  Instances are simple paths: no entity appears twice within one
walk.  Paths are canonically oriented anchor -> item (entities[0] is the
user/query anchor, entities[-1] the item); the reversed-inverted type
describes the same walks read item -> anchor.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Iterable, TextIO

from .errors import DomainError, ParseError
from .graph import Direction, EntityId, KnowledgeGraph

INVERSE_SUFFIX = "^-"

DEFAULT_MAX_PATH_LENGTH = 4


@dataclass(frozen=True)
class RelationStep:
    relation: int
    direction: Direction

    def flipped(self) -> "RelationStep":
        return RelationStep(self.relation, self.direction.flipped())

    def sort_key(self) -> tuple[int, int]:
        return (self.relation, 0 if self.direction is Direction.FORWARD else 1)

    def label(self, g: KnowledgeGraph) -> str:
        suffix = INVERSE_SUFFIX if self.direction is Direction.INVERSE else ""
        return g.relation_label(self.relation) + suffix


@dataclass(frozen=True)
class PathType:
    """A fixed sequence of relation steps; instances are walks of this shape."""

    steps: tuple[RelationStep, ...]

    def __post_init__(self):
        if len(self.steps) < 1:
            raise DomainError("a path type needs at least one step")

    def __len__(self) -> int:
        return len(self.steps)

    def reversed(self) -> "PathType":
        """The same connection pattern read from the opposite endpoint."""
        return PathType(tuple(step.flipped() for step in reversed(self.steps)))

    def sort_key(self) -> tuple[tuple[int, int], ...]:
        return tuple(step.sort_key() for step in self.steps)

    def label(self, g: KnowledgeGraph) -> str:
        return ",".join(step.label(g) for step in self.steps)


@dataclass(frozen=True)
class PathInstance:
    """A concrete witness walk: len(entities) == len(path_type) + 1."""

    path_type: PathType
    entities: tuple[EntityId, ...]

    def __post_init__(self):
        if len(self.entities) != len(self.path_type) + 1:
            raise DomainError(
                f"path instance has {len(self.entities)} entities for a "
                f"{len(self.path_type)}-step type"
            )

    @property
    def anchor(self) -> EntityId:
        return self.entities[0]

    @property
    def item(self) -> EntityId:
        return self.entities[-1]

    def reversed(self) -> "PathInstance":
        return PathInstance(self.path_type.reversed(), tuple(reversed(self.entities)))

    def sort_key(self) -> tuple:
        return (self.path_type.sort_key(), self.entities)


@dataclass(frozen=True)
class ReasonKey:
    """Item-independent identity of a reason: the path type plus every entity
    of the witness walk except the item endpoint.

    Two walks of the same type through the same context count as the same
    reason even when they end at different items, which is what makes
    reasons comparable across the items of one recommendation list.
    """

    path_type: PathType
    context: tuple[EntityId, ...]

    def sort_key(self) -> tuple:
        return (self.path_type.sort_key(), self.context)


def reason_key_of(instance: PathInstance) -> ReasonKey:
    return ReasonKey(instance.path_type, instance.entities[:-1])


def _check_endpoints(g: KnowledgeGraph, u: EntityId, i: EntityId) -> None:
    g.entity_label(u)
    g.entity_label(i)
    if u == i:
        raise DomainError("anchor and item must be distinct entities")


def find_paths(
    u: EntityId, i: EntityId, path_type: PathType, g: KnowledgeGraph
) -> tuple[PathInstance, ...]:
    """All simple instances of ``path_type`` from ``u`` to ``i``.

    Depth-first search over step-wise adjacency; an entity may appear at most
    once per walk.  Output is sorted by entity-id sequence and therefore
    deterministic.
    """
    _check_endpoints(g, u, i)
    steps = path_type.steps
    found: list[PathInstance] = []
    walk = [u]

    def descend(depth: int) -> None:
        step = steps[depth]
        last = depth == len(steps) - 1
        for nxt in sorted(g.step_neighbors(walk[-1], step.relation, step.direction)):
            if nxt in walk:
                continue
            if last:
                if nxt == i:
                    found.append(PathInstance(path_type, tuple(walk) + (nxt,)))
            else:
                walk.append(nxt)
                descend(depth + 1)
                walk.pop()

    descend(0)
    return tuple(found)


def path_holds(
    g: KnowledgeGraph, path_type: PathType, h: EntityId, t: EntityId
) -> bool:
    """Whether at least one simple instance of ``path_type`` connects h to t."""
    _check_endpoints(g, h, t)
    steps = path_type.steps
    walk = [h]

    def descend(depth: int) -> bool:
        step = steps[depth]
        last = depth == len(steps) - 1
        for nxt in g.step_neighbors(walk[-1], step.relation, step.direction):
            if nxt in walk:
                continue
            if last:
                if nxt == t:
                    return True
            else:
                walk.append(nxt)
                hit = descend(depth + 1)
                walk.pop()
                if hit:
                    return True
        return False

    return descend(0)


def enumerate_paths_oracle(
    u: EntityId, i: EntityId, path_type: PathType, g: KnowledgeGraph
) -> tuple[PathInstance, ...]:
    """Brute-force reference for :func:`find_paths`: materialize every
    candidate walk over the full entity cross-product and filter by edge
    membership and the simple-path rule.  Test use only; cost grows as
    |E|^(l-1).
    """
    _check_endpoints(g, u, i)
    steps = path_type.steps
    all_entities = range(g.num_entities)
    found = []
    for middle in product(all_entities, repeat=len(steps) - 1):
        walk = (u, *middle, i)
        if len(set(walk)) != len(walk):
            continue
        ok = True
        for k, step in enumerate(steps):
            a, b = walk[k], walk[k + 1]
            if step.direction is Direction.FORWARD:
                edge_there = g.contains(a, step.relation, b)
            else:
                edge_there = g.contains(b, step.relation, a)
            if not edge_there:
                ok = False
                break
        if ok:
            found.append(PathInstance(path_type, walk))
    return tuple(sorted(found, key=PathInstance.sort_key))


# -- path-type configuration ------------------------------------------------


def parse_path_type(text: str, g: KnowledgeGraph) -> PathType:
    """Parse ``rel1,rel2^-,rel3``; the ``^-`` suffix marks an inverse step.

    Relation labels therefore cannot contain commas or end in ``^-``.
    """
    steps = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ParseError(f"empty step in path type {text!r}")
        direction = Direction.FORWARD
        if part.endswith(INVERSE_SUFFIX):
            part = part[: -len(INVERSE_SUFFIX)].strip()
            direction = Direction.INVERSE
        if not g.has_relation(part):
            raise ParseError(f"unknown relation label in path type: {part!r}")
        steps.append(RelationStep(g.relation_id(part), direction))
    return PathType(tuple(steps))


def load_path_types(
    source: Iterable[str] | TextIO | str | Path,
    g: KnowledgeGraph,
    max_length: int = DEFAULT_MAX_PATH_LENGTH,
) -> tuple[PathType, ...]:
    """Read one path type per line; blank and ``#`` lines are skipped.

    Types longer than ``max_length`` are rejected at load to bound search
    cost.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = list(source)
    types: list[PathType] = []
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            path_type = parse_path_type(stripped, g)
        except ParseError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if len(path_type) > max_length:
            raise ParseError(
                f"path type exceeds maximum length {max_length}: {stripped!r}",
                line=lineno,
            )
        types.append(path_type)
    return tuple(types)
