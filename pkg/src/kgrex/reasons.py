"""Reasons for a recommended item and reasons against it.

A reason *for* item i is a permissible-type path from the query anchor to i.
Reasons *against* come from comparing i with the other items of the same
recommendation list:

* s1 - any reason for a competing item that is not a reason for i;
* s3 - the s1 set trimmed to a small bound, most widely shared reasons first;
* s4 - reasons for *every* competing item that are not reasons for i;
* s5 - i scores worse than some alternative on a declared quantitative
  objective (the witness is i's own attribute edge);
* s2 - intentionally unsupported (the "reason for NOT i" reading has no
  workable definition over a knowledge graph).

All cross-item set algebra is performed on :class:`~kgrex.paths.ReasonKey`,
so a context shared by two items can never count against either of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import DomainError, ParseError, UnsupportedSchemeError
from .graph import Direction, EntityId, KnowledgeGraph, RelationId
from .paths import PathInstance, PathType, ReasonKey, RelationStep, find_paths, reason_key_of

POLARITY_FOR = "for"
POLARITY_AGAINST = "against"

SCHEME_S1 = "s1"
SCHEME_S2 = "s2"
SCHEME_S3 = "s3"
SCHEME_S4 = "s4"
SCHEME_S5 = "s5"
AGAINST_SCHEMES = (SCHEME_S1, SCHEME_S3, SCHEME_S4, SCHEME_S5)

DEFAULT_TRIM_BOUND = 3

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


@dataclass(frozen=True)
class Reason:
    """A polarity-tagged explanation for or against ``item``.

    ``witnesses`` all share ``key``.  For s1/s3/s4 against-reasons the
    witness walks end at competing items, never at ``item`` itself; for s5
    the single witness is ``item``'s own attribute edge and ``favored``
    names the alternative that scores better.
    """

    key: ReasonKey
    witnesses: tuple[PathInstance, ...]
    polarity: str
    scheme: str | None
    item: EntityId
    user: EntityId
    favored: EntityId | None = None

    def __post_init__(self):
        if not self.witnesses:
            raise DomainError("a reason needs at least one witness path")
        for w in self.witnesses:
            if reason_key_of(w) != self.key:
                raise DomainError("witness does not match the reason key")
        if self.polarity == POLARITY_FOR and self.scheme is not None:
            raise DomainError("for-reasons carry no scheme tag")
        if self.polarity == POLARITY_AGAINST and self.scheme not in AGAINST_SCHEMES:
            raise DomainError(f"invalid against-scheme: {self.scheme!r}")

    @property
    def witness_items(self) -> tuple[EntityId, ...]:
        """Distinct end items of the witness walks, ascending."""
        return tuple(sorted({w.item for w in self.witnesses}))


@dataclass(frozen=True)
class ObjectiveSpec:
    """A quantitative objective: one attribute relation, a score per
    attribute value, and whether more or less is better."""

    attribute_relation: RelationId
    values: Mapping[EntityId, float]
    direction: str

    def __post_init__(self):
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise DomainError(f"objective direction must be maximize|minimize, got {self.direction!r}")
        if not self.values:
            raise DomainError("objective has no scored attribute values")

    def better(self, a: float, b: float) -> bool:
        """Whether score ``a`` is strictly better than ``b``."""
        return a > b if self.direction == MAXIMIZE else a < b


def _grouped_by_key(instances: Iterable[PathInstance]) -> dict[ReasonKey, set[PathInstance]]:
    grouped: dict[ReasonKey, set[PathInstance]] = {}
    for inst in instances:
        grouped.setdefault(reason_key_of(inst), set()).add(inst)
    return grouped


def _sorted_witnesses(instances: Iterable[PathInstance]) -> tuple[PathInstance, ...]:
    return tuple(sorted(set(instances), key=PathInstance.sort_key))


def reasons_for(
    item: EntityId,
    user: EntityId,
    path_types: Sequence[PathType],
    g: KnowledgeGraph,
) -> tuple[Reason, ...]:
    """All reasons for recommending ``item`` to ``user``: the union over the
    permissible path types of every anchor->item path, deduplicated by
    :class:`ReasonKey` (a key keeps all of its witness walks).

    Output is sorted by key.
    """
    if not path_types:
        raise DomainError("at least one permissible path type is required")
    if item == user:
        raise DomainError("item and user must be distinct entities")
    grouped = _grouped_by_key(
        inst for pt in path_types for inst in find_paths(user, item, pt, g)
    )
    return tuple(
        Reason(
            key=key,
            witnesses=_sorted_witnesses(insts),
            polarity=POLARITY_FOR,
            scheme=None,
            item=item,
            user=user,
        )
        for key, insts in sorted(grouped.items(), key=lambda kv: kv[0].sort_key())
    )


def _check_item_list(target: EntityId, user: EntityId, items: Sequence[EntityId]) -> tuple[EntityId, ...]:
    items = tuple(items)
    if len(set(items)) != len(items):
        raise DomainError("recommendation list contains duplicate items")
    if target not in items:
        raise DomainError("target item is not part of the recommendation list")
    if user in items:
        raise DomainError("the user cannot appear in its own recommendation list")
    return items


def _against_pool(
    target: EntityId,
    user: EntityId,
    items: Sequence[EntityId],
    path_types: Sequence[PathType],
    g: KnowledgeGraph,
    intersect: bool,
) -> dict[ReasonKey, set[PathInstance]]:
    """Witness pool of the alternatives' reasons-for, merged by key (union)
    or restricted to keys shared by every alternative (intersection), minus
    the target's own keys."""
    own_keys = {r.key for r in reasons_for(target, user, path_types, g)}
    pool: dict[ReasonKey, set[PathInstance]] = {}
    common: set[ReasonKey] | None = None
    for alt in items:
        if alt == target:
            continue
        alt_reasons = reasons_for(alt, user, path_types, g)
        for reason in alt_reasons:
            pool.setdefault(reason.key, set()).update(reason.witnesses)
        if intersect:
            alt_keys = {r.key for r in alt_reasons}
            common = alt_keys if common is None else common & alt_keys
    if intersect:
        keep = (common or set()) - own_keys
    else:
        keep = set(pool) - own_keys
    return {key: insts for key, insts in pool.items() if key in keep}


def _against_reasons(
    pool: Mapping[ReasonKey, set[PathInstance]],
    scheme: str,
    target: EntityId,
    user: EntityId,
) -> list[Reason]:
    return [
        Reason(
            key=key,
            witnesses=_sorted_witnesses(insts),
            polarity=POLARITY_AGAINST,
            scheme=scheme,
            item=target,
            user=user,
        )
        for key, insts in pool.items()
    ]


def reasons_against_s1(
    target: EntityId,
    user: EntityId,
    items: Sequence[EntityId],
    path_types: Sequence[PathType],
    g: KnowledgeGraph,
) -> tuple[Reason, ...]:
    """Reasons against ``target``: every reason for a competing item of
    ``items`` that is not (by key) a reason for ``target``.  Sorted by key.
    """
    items = _check_item_list(target, user, items)
    pool = _against_pool(target, user, items, path_types, g, intersect=False)
    out = _against_reasons(pool, SCHEME_S1, target, user)
    return tuple(sorted(out, key=lambda r: r.key.sort_key()))


def s3_rank(reason: Reason) -> tuple:
    """Trim order: reasons shared by more alternatives first, then key order."""
    return (-len(reason.witness_items), reason.key.sort_key())


def reasons_against_s3(
    target: EntityId,
    user: EntityId,
    items: Sequence[EntityId],
    path_types: Sequence[PathType],
    g: KnowledgeGraph,
    k: int | None = DEFAULT_TRIM_BOUND,
) -> tuple[Reason, ...]:
    """The s1 set trimmed to at most ``k`` reasons (``None`` = unbounded),
    ordered by :func:`s3_rank` so the most widely shared reasons survive.
    """
    if k is not None and k < 1:
        raise DomainError("trim bound k must be a positive integer or None")
    base = reasons_against_s1(target, user, items, path_types, g)
    ranked = sorted(
        (
            Reason(
                key=r.key,
                witnesses=r.witnesses,
                polarity=POLARITY_AGAINST,
                scheme=SCHEME_S3,
                item=target,
                user=user,
            )
            for r in base
        ),
        key=s3_rank,
    )
    return tuple(ranked if k is None else ranked[:k])


def reasons_against_s4(
    target: EntityId,
    user: EntityId,
    items: Sequence[EntityId],
    path_types: Sequence[PathType],
    g: KnowledgeGraph,
) -> tuple[Reason, ...]:
    """Reasons against ``target`` that are reasons for *every* alternative.

    Requires at least one alternative (``len(items) >= 2``); an intersection
    over zero sets would be vacuously true, so that case fails loudly.
    """
    items = _check_item_list(target, user, items)
    if len(items) < 2:
        raise DomainError("s4 needs at least two items in the recommendation list")
    pool = _against_pool(target, user, items, path_types, g, intersect=True)
    out = _against_reasons(pool, SCHEME_S4, target, user)
    return tuple(sorted(out, key=lambda r: r.key.sort_key()))


def attribute_edge(
    g: KnowledgeGraph, objective: ObjectiveSpec, item: EntityId
) -> tuple[EntityId, float]:
    """The single scored attribute edge of ``item``: (tail entity, score)."""
    tails = g.step_neighbors(item, objective.attribute_relation, Direction.FORWARD)
    covered = sorted(t for t in tails if t in objective.values)
    label = g.entity_label(item)
    if not covered:
        raise DomainError(f"item {label!r} has no attribute value under the objective")
    if len(covered) > 1:
        raise DomainError(f"item {label!r} has multiple scored attribute edges")
    tail = covered[0]
    return tail, float(objective.values[tail])


def reasons_against_s5(
    target: EntityId,
    user: EntityId,
    items: Sequence[EntityId],
    objective: ObjectiveSpec,
    g: KnowledgeGraph,
) -> tuple[Reason, ...]:
    """One reason against ``target`` per alternative that scores strictly
    better on the objective; empty when ``target`` is weakly best.

    Each reason's witness is the target's own attribute edge (the
    shortfall); the better alternative is recorded in ``favored``.  Output
    is ordered best alternative first.
    """
    items = _check_item_list(target, user, items)
    tail, target_value = attribute_edge(g, objective, target)
    witness = PathInstance(
        PathType((RelationStep(objective.attribute_relation, Direction.FORWARD),)),
        (target, tail),
    )
    better: list[tuple[float, EntityId]] = []
    for alt in items:
        if alt == target:
            continue
        _, alt_value = attribute_edge(g, objective, alt)
        if objective.better(alt_value, target_value):
            better.append((alt_value, alt))
    sign = -1.0 if objective.direction == MAXIMIZE else 1.0
    better.sort(key=lambda pair: (sign * pair[0], pair[1]))
    return tuple(
        Reason(
            key=reason_key_of(witness),
            witnesses=(witness,),
            polarity=POLARITY_AGAINST,
            scheme=SCHEME_S5,
            item=target,
            user=user,
            favored=alt,
        )
        for _, alt in better
    )


def reasons_against_s2(*_args, **_kwargs) -> tuple[Reason, ...]:
    """Scheme s2 ("a reason for NOT the item") is deliberately unsupported."""
    raise UnsupportedSchemeError(
        "scheme s2 is not supported: a reason for NOT an item has no "
        "concrete reading over a knowledge graph"
    )


def reasons_against(
    scheme: str,
    target: EntityId,
    user: EntityId,
    items: Sequence[EntityId],
    path_types: Sequence[PathType],
    g: KnowledgeGraph,
    k: int | None = DEFAULT_TRIM_BOUND,
    objective: ObjectiveSpec | None = None,
) -> tuple[Reason, ...]:
    """Dispatch by scheme name (``s1|s3|s4|s5``; ``s2`` raises)."""
    scheme = scheme.lower()
    if scheme == SCHEME_S1:
        return reasons_against_s1(target, user, items, path_types, g)
    if scheme == SCHEME_S2:
        return reasons_against_s2()
    if scheme == SCHEME_S3:
        return reasons_against_s3(target, user, items, path_types, g, k=k)
    if scheme == SCHEME_S4:
        return reasons_against_s4(target, user, items, path_types, g)
    if scheme == SCHEME_S5:
        if objective is None:
            raise DomainError("scheme s5 requires an objective specification")
        return reasons_against_s5(target, user, items, objective, g)
    raise DomainError(f"unknown reason-against scheme: {scheme!r}")


# -- text rendering -----------------------------------------------------------


def _chain_text(instance: PathInstance, g: KnowledgeGraph) -> str:
    """Render a walk as a relative-clause chain; the anchor reads as "you"."""
    clauses = []
    for k, step in enumerate(instance.path_type.steps):
        nxt = g.entity_label(instance.entities[k + 1])
        rel = g.relation_label(step.relation)
        first = k == 0
        if step.direction is Direction.FORWARD:
            subject = "you" if first else "which"
            clauses.append(f"{subject} {rel} {nxt}")
        else:
            if first:
                clauses.append(f"{nxt} {rel} you")
            else:
                clauses.append(f"which {nxt} also {rel}")
    return ", ".join(clauses)


def render_reason_text(reason: Reason, g: KnowledgeGraph) -> str:
    """Deterministic one-sentence rendering.

    For-reasons spell out the witness hop chain; s1/s3/s4 against-reasons
    name a favored alternative with its distinguishing chain; s5 names the
    alternative and the target's attribute shortfall.
    """
    witness = reason.witnesses[0]
    item_label = g.entity_label(reason.item)
    if reason.polarity == POLARITY_FOR:
        return f"Recommended because {_chain_text(witness, g)}."
    if reason.scheme == SCHEME_S5:
        favored_label = g.entity_label(reason.favored)
        tail_label = g.entity_label(witness.item)
        attr_label = g.relation_label(witness.path_type.steps[0].relation)
        return (
            f"Consider {favored_label} instead of {item_label}: "
            f"{item_label} {attr_label} {tail_label}, which serves the stated objective less well."
        )
    favored_label = g.entity_label(witness.item)
    return (
        f"Consider {favored_label} instead of {item_label}: "
        f"{_chain_text(witness, g)}."
    )


# -- objective configuration --------------------------------------------------


def load_objective(
    source: Iterable[str] | TextIO | str | Path, g: KnowledgeGraph
) -> ObjectiveSpec:
    """Read an objective file: a ``direction: maximize|minimize`` header plus
    TSV lines ``attribute_relation<TAB>tail_label<TAB>score``.

    Every value line must name the same attribute relation.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = list(source)
    direction: str | None = None
    relation: RelationId | None = None
    values: dict[EntityId, float] = {}
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.lower().startswith("direction:"):
            if direction is not None:
                raise ParseError("duplicate direction header", line=lineno)
            direction = stripped.split(":", 1)[1].strip().lower()
            if direction not in (MAXIMIZE, MINIMIZE):
                raise ParseError(
                    f"direction must be maximize or minimize, got {direction!r}",
                    line=lineno,
                )
            continue
        fields = [f.strip() for f in raw.rstrip("\r\n").split("\t")]
        if len(fields) != 3 or any(not f for f in fields):
            raise ParseError(
                "expected attribute_relation<TAB>tail_label<TAB>score", line=lineno
            )
        rel_label, tail_label, score_text = fields
        if not g.has_relation(rel_label):
            raise ParseError(f"unknown attribute relation: {rel_label!r}", line=lineno)
        rel = g.relation_id(rel_label)
        if relation is None:
            relation = rel
        elif rel != relation:
            raise ParseError(
                "objective file mixes multiple attribute relations", line=lineno
            )
        if not g.has_entity(tail_label):
            raise ParseError(f"unknown attribute value entity: {tail_label!r}", line=lineno)
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(f"invalid score: {score_text!r}", line=lineno) from None
        values[g.entity_id(tail_label)] = score
    if direction is None:
        raise ParseError("objective file is missing a direction header")
    if relation is None:
        raise ParseError("objective file has no value lines")
    return ObjectiveSpec(attribute_relation=relation, values=values, direction=direction)
