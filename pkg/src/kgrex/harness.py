"""Offline evaluation of explanation coverage and support.

A *slot* is one (case, recommended item) pair.  For each explanation kind
the harness asks two questions: how many slots received at least one reason
(coverage), and among those slots, how many reasons arrived on average
(support).  Support over zero explained slots is undefined and reports
render it as "-" rather than inventing a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .embedding import EmbeddingModel, RecommendationList, recommend_top_n
from .errors import DomainError, UndefinedSupportError
from .graph import EntityId, KnowledgeGraph, RelationId
from .paths import PathType
from .reasons import (
    DEFAULT_TRIM_BOUND,
    ObjectiveSpec,
    Reason,
    reasons_against_s1,
    reasons_against_s3,
    reasons_against_s4,
    reasons_against_s5,
    reasons_for,
)

KIND_FOR = "for"
REPORT_KINDS = (KIND_FOR, "s1", "s3", "s4")


@dataclass(frozen=True)
class ItemReasons:
    """Every reason computed for one recommended item, keyed by kind."""

    item: EntityId
    reasons: Mapping[str, tuple[Reason, ...]]

    def count(self, kind: str) -> int:
        if kind not in self.reasons:
            raise DomainError(f"no reasons were computed for kind {kind!r}")
        return len(self.reasons[kind])


@dataclass(frozen=True)
class Interaction:
    """One simulated case: a user, their recommendation list, and the
    reasons attached to each slot."""

    user: EntityId
    recommendations: RecommendationList
    per_item: tuple[ItemReasons, ...]

    def __post_init__(self):
        if tuple(r.item for r in self.per_item) != self.recommendations.items:
            raise DomainError("per-item reasons do not line up with the item list")

    @property
    def items(self) -> tuple[EntityId, ...]:
        return self.recommendations.items


def simulate_interactions(
    g: KnowledgeGraph,
    model: EmbeddingModel,
    relation: RelationId,
    anchors: Sequence[EntityId],
    candidates: Sequence[EntityId],
    path_types: Sequence[PathType],
    n_items: int,
    n_cases: int,
    seed: int = 0,
    k: int | None = DEFAULT_TRIM_BOUND,
    objective: ObjectiveSpec | None = None,
) -> tuple[Interaction, ...]:
    """Sample ``n_cases`` anchors without replacement, recommend ``n_items``
    to each, and compute reasons for every slot under every report kind
    (plus s5 when an objective is given).  Deterministic for a fixed seed.
    """
    pool = sorted(set(anchors))
    if n_cases < 1:
        raise DomainError("need at least one simulated case")
    if n_cases > len(pool):
        raise DomainError(f"cannot sample {n_cases} distinct anchors from {len(pool)}")
    if n_items < 2:
        raise DomainError("recommendation lists need at least two slots for s4")
    rng = np.random.default_rng(seed)
    chosen = [pool[i] for i in rng.choice(len(pool), size=n_cases, replace=False)]
    interactions = []
    for user in chosen:
        usable = [c for c in candidates if c != user]
        rec = recommend_top_n(model, user, relation, usable, n_items)
        per_item = []
        for item in rec.items:
            kinds = {
                KIND_FOR: reasons_for(item, user, path_types, g),
                "s1": reasons_against_s1(item, user, rec.items, path_types, g),
                "s3": reasons_against_s3(item, user, rec.items, path_types, g, k=k),
                "s4": reasons_against_s4(item, user, rec.items, path_types, g),
            }
            if objective is not None:
                kinds["s5"] = reasons_against_s5(item, user, rec.items, objective, g)
            per_item.append(ItemReasons(item=item, reasons=kinds))
        interactions.append(
            Interaction(user=user, recommendations=rec, per_item=tuple(per_item))
        )
    return tuple(interactions)


def slot_counts(interactions: Sequence[Interaction], kind: str) -> tuple[int, ...]:
    """Reason counts per slot, cases in order, items in list order."""
    return tuple(
        item.count(kind) for case in interactions for item in case.per_item
    )


def coverage(counts: Sequence[int]) -> float:
    """Fraction of slots with at least one reason."""
    if not counts:
        raise DomainError("coverage over zero slots is undefined")
    return sum(1 for c in counts if c > 0) / len(counts)


def support(counts: Sequence[int]) -> tuple[float, float]:
    """Population mean and standard deviation of the reason count over
    explained slots only.  Zero explained slots has no support value."""
    explained = [c for c in counts if c > 0]
    if not explained:
        raise UndefinedSupportError("no explained slots: support is undefined")
    mean = sum(explained) / len(explained)
    variance = sum((c - mean) ** 2 for c in explained) / len(explained)
    return mean, math.sqrt(variance)


@dataclass(frozen=True)
class ReportRow:
    """Coverage and support of one explanation kind."""

    kind: str
    total_slots: int
    explained_slots: int
    coverage: float
    support_mean: float | None
    support_std: float | None

    @property
    def support_text(self) -> str:
        if self.support_mean is None:
            return "-"
        return f"{self.support_mean:.2f}±{self.support_std:.2f}"


@dataclass(frozen=True)
class CoverageReport:
    """Rows per explanation kind plus the run manifest that produced them."""

    rows: tuple[ReportRow, ...]
    manifest: tuple[tuple[str, str], ...]

    def row(self, kind: str) -> ReportRow:
        for r in self.rows:
            if r.kind == kind:
                return r
        raise DomainError(f"report has no row for kind {kind!r}")

    FOOTER = "# support is computed over explained slots only (assumption)"

    def to_text(self) -> str:
        lines = [f"# {key}: {value}" for key, value in self.manifest]
        header = f"{'type':<6} {'coverage':>9} {'support':>12}"
        lines.append(header)
        for r in self.rows:
            lines.append(
                f"{r.kind:<6} {100.0 * r.coverage:>8.1f}% {r.support_text:>12}"
            )
        lines.append(self.FOOTER)
        return "\n".join(lines) + "\n"

    def to_csv(self, delimiter: str = ",") -> str:
        lines = [f"# {key}: {value}" for key, value in self.manifest]
        lines.append(
            delimiter.join(
                ("type", "coverage", "support_mean", "support_std", "explained", "total")
            )
        )
        for r in self.rows:
            mean = "-" if r.support_mean is None else f"{r.support_mean:.6f}"
            std = "-" if r.support_std is None else f"{r.support_std:.6f}"
            lines.append(
                delimiter.join(
                    (
                        r.kind,
                        f"{r.coverage:.6f}",
                        mean,
                        std,
                        str(r.explained_slots),
                        str(r.total_slots),
                    )
                )
            )
        lines.append(self.FOOTER)
        return "\n".join(lines) + "\n"


def build_report(
    interactions: Sequence[Interaction],
    manifest: Mapping[str, str],
    kinds: Sequence[str] = REPORT_KINDS,
) -> CoverageReport:
    """Aggregate interactions into one row per explanation kind.

    Pure: the manifest (graph name, case count, seed, whatever the caller
    wants on record) is passed in, never probed from the environment.
    """
    if not interactions:
        raise DomainError("cannot report on zero interactions")
    rows = []
    for kind in kinds:
        counts = slot_counts(interactions, kind)
        cov = coverage(counts)
        try:
            mean, std = support(counts)
        except UndefinedSupportError:
            mean, std = None, None
        rows.append(
            ReportRow(
                kind=kind,
                total_slots=len(counts),
                explained_slots=sum(1 for c in counts if c > 0),
                coverage=cov,
                support_mean=mean,
                support_std=std,
            )
        )
    return CoverageReport(rows=tuple(rows), manifest=tuple(manifest.items()))
