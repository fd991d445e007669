"""Translational embedding recommender over a knowledge graph.

Entities and relations live in one d-dimensional space; a triple (h, r, t)
is scored by how nearly h + r lands on t.  Training minimises a margin loss
between observed triples and corrupted ones with plain SGD.  Having scores
for every (user, likes, item) pair turns the graph into a recommender; the
reason machinery then explains the returned items.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence, TextIO

import numpy as np

from .errors import DomainError, ParseError
from .graph import Direction, EntityId, KnowledgeGraph, RelationId

MODEL_FORMAT_VERSION = 1

NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for :func:`train_transe`; defaults follow the
    classic small-graph setup."""

    dim: int = 50
    margin: float = 1.0
    learning_rate: float = 0.01
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    filtered_negatives: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("embedding dimension must be positive")
        if self.margin <= 0:
            raise DomainError("margin must be positive")
        if self.learning_rate <= 0:
            raise DomainError("learning rate must be positive")
        if self.epochs < 0:
            raise DomainError("epoch count cannot be negative")
        if self.batch_size < 1:
            raise DomainError("batch size must be positive")


@dataclass
class EmbeddingModel:
    """Learned vectors plus the label vocabularies they were trained on."""

    entity_vectors: np.ndarray
    relation_vectors: np.ndarray
    entity_labels: tuple[str, ...]
    relation_labels: tuple[str, ...]

    def __post_init__(self):
        if self.entity_vectors.ndim != 2 or self.relation_vectors.ndim != 2:
            raise DomainError("embedding matrices must be 2-dimensional")
        if self.entity_vectors.shape[1] != self.relation_vectors.shape[1]:
            raise DomainError("entity and relation vectors disagree on dimension")
        if self.entity_vectors.shape[0] != len(self.entity_labels):
            raise DomainError("entity vector count does not match labels")
        if self.relation_vectors.shape[0] != len(self.relation_labels):
            raise DomainError("relation vector count does not match labels")

    @property
    def dim(self) -> int:
        return int(self.entity_vectors.shape[1])

    def _check_ids(self, head: EntityId, relation: RelationId, tail: EntityId | None = None):
        n, m = self.entity_vectors.shape[0], self.relation_vectors.shape[0]
        for e in (head,) if tail is None else (head, tail):
            if not 0 <= e < n:
                raise DomainError(f"entity id out of range: {e}")
        if not 0 <= relation < m:
            raise DomainError(f"relation id out of range: {relation}")

    def score_triple(self, head: EntityId, relation: RelationId, tail: EntityId) -> float:
        """Higher is more plausible: the negated L2 residual of h + r - t."""
        self._check_ids(head, relation, tail)
        diff = (
            self.entity_vectors[head]
            + self.relation_vectors[relation]
            - self.entity_vectors[tail]
        )
        return float(-np.linalg.norm(diff))

    def tail_scores(self, head: EntityId, relation: RelationId) -> np.ndarray:
        """Scores of (head, relation, e) for every entity e, as one vector."""
        self._check_ids(head, relation)
        diff = (
            self.entity_vectors[head]
            + self.relation_vectors[relation]
            - self.entity_vectors
        )
        return -np.linalg.norm(diff, axis=1)


def score_triple(
    model: EmbeddingModel, head: EntityId, relation: RelationId, tail: EntityId
) -> float:
    """Function form of :meth:`EmbeddingModel.score_triple`."""
    return model.score_triple(head, relation, tail)


def margin_loss_and_grads(
    entity_vectors: np.ndarray,
    relation_vectors: np.ndarray,
    positives: np.ndarray,
    negatives: np.ndarray,
    margin: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Hinge loss sum(max(0, margin + d_pos - d_neg)) over paired triples
    and its exact gradients w.r.t. both embedding matrices.

    Exposed separately so the gradients can be checked against finite
    differences.  d is the plain L2 distance ||h + r - t||.
    """
    pos = np.asarray(positives, dtype=np.int64).reshape(-1, 3)
    neg = np.asarray(negatives, dtype=np.int64).reshape(-1, 3)
    if pos.shape != neg.shape:
        raise DomainError("positive and negative batches must pair up")
    dp = entity_vectors[pos[:, 0]] + relation_vectors[pos[:, 1]] - entity_vectors[pos[:, 2]]
    dn = entity_vectors[neg[:, 0]] + relation_vectors[neg[:, 1]] - entity_vectors[neg[:, 2]]
    dist_p = np.linalg.norm(dp, axis=1)
    dist_n = np.linalg.norm(dn, axis=1)
    violation = margin + dist_p - dist_n
    active = violation > 0
    loss = float(violation[active].sum())
    grad_e = np.zeros_like(entity_vectors)
    grad_r = np.zeros_like(relation_vectors)
    if not active.any():
        return loss, grad_e, grad_r
    # unit residuals; zero-distance residuals contribute no gradient
    safe_p = np.where(dist_p[active] > 0, dist_p[active], 1.0)[:, None]
    safe_n = np.where(dist_n[active] > 0, dist_n[active], 1.0)[:, None]
    unit_p = np.where(dist_p[active][:, None] > 0, dp[active] / safe_p, 0.0)
    unit_n = np.where(dist_n[active][:, None] > 0, dn[active] / safe_n, 0.0)
    pa, na = pos[active], neg[active]
    np.add.at(grad_e, pa[:, 0], unit_p)
    np.add.at(grad_e, pa[:, 2], -unit_p)
    np.add.at(grad_r, pa[:, 1], unit_p)
    np.add.at(grad_e, na[:, 0], -unit_n)
    np.add.at(grad_e, na[:, 2], unit_n)
    np.add.at(grad_r, na[:, 1], -unit_n)
    return loss, grad_e, grad_r


def project_to_unit_ball(vectors: np.ndarray) -> None:
    """Scale rows with norm > 1 back onto the unit sphere, in place."""
    norms = np.linalg.norm(vectors, axis=1)
    over = norms > 1.0
    if over.any():
        vectors[over] /= norms[over, None]


def _corrupt_batch(
    positives: np.ndarray,
    n_entities: int,
    rng: np.random.Generator,
    known: frozenset[tuple[int, int, int]] | None,
) -> np.ndarray:
    """Replace the head or tail (fair coin) of each positive with a uniform
    random entity.  With ``known`` given, resample hits on observed triples."""
    neg = positives.copy()
    corrupt_head = rng.random(len(positives)) < 0.5
    replacements = rng.integers(0, n_entities, len(positives))
    neg[corrupt_head, 0] = replacements[corrupt_head]
    neg[~corrupt_head, 2] = replacements[~corrupt_head]
    if known is None:
        return neg
    for row in range(len(neg)):
        col = 0 if corrupt_head[row] else 2
        tries = 0
        while tuple(neg[row]) in known and tries < 100:
            neg[row, col] = rng.integers(0, n_entities)
            tries += 1
        if tuple(neg[row]) in known:
            # exhausted sampling; walk the vocabulary for any clean entity
            for e in range(n_entities):
                neg[row, col] = e
                if tuple(neg[row]) not in known:
                    break
    return neg


EpochCallback = Callable[[int, float, EmbeddingModel], None]


def train_transe(
    g: KnowledgeGraph,
    config: TrainConfig = TrainConfig(),
    epoch_callback: EpochCallback | None = None,
) -> tuple[EmbeddingModel, tuple[float, ...]]:
    """Train embeddings on every triple of ``g``; returns the model and the
    per-epoch loss curve.

    Deterministic for a fixed config seed: one generator drives the init,
    the shuffles, and the corruptions in a fixed draw order.  Entity vectors
    are projected into the unit ball after the init and after every epoch;
    ``epoch_callback(epoch, loss, model)`` observes the live model.
    """
    if g.num_triples == 0:
        raise DomainError("cannot train on an empty graph")
    rng = np.random.default_rng(config.seed)
    bound = 6.0 / math.sqrt(config.dim)
    entity_vectors = rng.uniform(-bound, bound, (g.num_entities, config.dim))
    relation_vectors = rng.uniform(-bound, bound, (g.num_relations, config.dim))
    relation_norms = np.linalg.norm(relation_vectors, axis=1)
    relation_vectors /= np.where(relation_norms > 0, relation_norms, 1.0)[:, None]
    project_to_unit_ball(entity_vectors)
    model = EmbeddingModel(
        entity_vectors=entity_vectors,
        relation_vectors=relation_vectors,
        entity_labels=g.entity_labels,
        relation_labels=g.relation_labels,
    )
    triples = np.array(
        sorted((t.head, t.relation, t.tail) for t in g.triples), dtype=np.int64
    )
    known = (
        frozenset((t.head, t.relation, t.tail) for t in g.triples)
        if config.filtered_negatives
        else None
    )
    losses: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(triples))
        epoch_loss = 0.0
        for start in range(0, len(triples), config.batch_size):
            batch = triples[order[start : start + config.batch_size]]
            negatives = _corrupt_batch(batch, g.num_entities, rng, known)
            loss, grad_e, grad_r = margin_loss_and_grads(
                entity_vectors, relation_vectors, batch, negatives, config.margin
            )
            entity_vectors -= config.learning_rate * grad_e
            relation_vectors -= config.learning_rate * grad_r
            epoch_loss += loss
        project_to_unit_ball(entity_vectors)
        losses.append(epoch_loss)
        if epoch_callback is not None:
            epoch_callback(epoch, epoch_loss, model)
    return model, tuple(losses)


@dataclass(frozen=True)
class RecommendationList:
    """Top items for one (user, relation) query, best first."""

    user: EntityId
    relation: RelationId
    items: tuple[EntityId, ...]
    scores: tuple[float, ...]


def recommend_top_n(
    model: EmbeddingModel,
    user: EntityId,
    relation: RelationId,
    candidates: Sequence[EntityId],
    n: int,
) -> RecommendationList:
    """Rank ``candidates`` as tails of (user, relation, ?) and keep the top
    ``n``.  Ties break toward the lower entity id; asking for more items
    than exist returns them all.
    """
    if n < 1:
        raise DomainError("recommendation size n must be positive")
    ordered_candidates = sorted(set(candidates))
    if not ordered_candidates:
        raise DomainError("candidate set is empty")
    if user in ordered_candidates:
        raise DomainError("the user cannot be its own candidate item")
    all_scores = model.tail_scores(user, relation)
    ranked = sorted(ordered_candidates, key=lambda e: (-all_scores[e], e))[:n]
    return RecommendationList(
        user=user,
        relation=relation,
        items=tuple(ranked),
        scores=tuple(float(all_scores[e]) for e in ranked),
    )


@dataclass(frozen=True)
class LinkPredictionResult:
    """Tail-ranking quality over a test split."""

    mean_rank: float
    hits_at: Mapping[int, float]
    ranks: tuple[int, ...]


def evaluate_link_prediction(
    model: EmbeddingModel,
    test_triples: Sequence[tuple[EntityId, RelationId, EntityId]],
    g: KnowledgeGraph,
    hits_at: Sequence[int] = (1, 3, 10),
    filtered: bool = False,
) -> LinkPredictionResult:
    """Rank each test triple's true tail against every entity.

    Raw rank is 1 plus the number of strictly better-scoring other
    entities; the filtered protocol additionally ignores tails that ``g``
    already records as true for the same (head, relation).
    """
    if not test_triples:
        raise DomainError("cannot evaluate an empty test split")
    ranks = []
    for head, relation, tail in test_triples:
        scores = model.tail_scores(head, relation)
        mask = np.ones(len(scores), dtype=bool)
        mask[tail] = False
        if filtered:
            for other in g.step_neighbors(head, relation, Direction.FORWARD):
                if other != tail:
                    mask[other] = False
        rank = 1 + int(np.count_nonzero(scores[mask] > scores[tail]))
        ranks.append(rank)
    ranks_arr = np.array(ranks)
    return LinkPredictionResult(
        mean_rank=float(ranks_arr.mean()),
        hits_at={k: float((ranks_arr <= k).mean()) for k in hits_at},
        ranks=tuple(int(r) for r in ranks),
    )


def load_candidates(
    source: "Iterable[str] | TextIO | str | Path", g: KnowledgeGraph
) -> tuple[EntityId, ...]:
    """Read a candidate-set file: one entity label per line, `#` comments
    and blank lines skipped.  Returns distinct ids in ascending order."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = list(source)
    out: set[EntityId] = set()
    for lineno, raw in enumerate(lines, start=1):
        label = raw.strip()
        if not label or label.startswith("#"):
            continue
        if not g.has_entity(label):
            raise ParseError(f"unknown candidate entity: {label!r}", line=lineno)
        out.add(g.entity_id(label))
    if not out:
        raise ParseError("candidate file names no entities")
    return tuple(sorted(out))


_CONFIG_FIELDS = {
    "dim": int,
    "margin": float,
    "learning_rate": float,
    "epochs": int,
    "batch_size": int,
    "seed": int,
    "filtered_negatives": lambda s: s.lower() in ("true", "1", "yes"),
}


def load_train_config(source: "Iterable[str] | TextIO | str | Path") -> TrainConfig:
    """Read ``key: value`` lines into a :class:`TrainConfig`; unknown keys
    and unparsable values are parse errors, missing keys take defaults."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = list(source)
    overrides: dict[str, object] = {}
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise ParseError("expected key: value", line=lineno)
        key, _, value = stripped.partition(":")
        key = key.strip().lower()
        if key not in _CONFIG_FIELDS:
            raise ParseError(f"unknown training option: {key!r}", line=lineno)
        try:
            overrides[key] = _CONFIG_FIELDS[key](value.strip())
        except ValueError:
            raise ParseError(f"invalid value for {key}: {value.strip()!r}", line=lineno) from None
    return TrainConfig(**overrides)


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    """Write the model as a single npz archive (format version 1)."""
    np.savez(
        path,
        format_version=np.int64(MODEL_FORMAT_VERSION),
        entity_vectors=model.entity_vectors,
        relation_vectors=model.relation_vectors,
        entity_labels=np.array(model.entity_labels, dtype=object),
        relation_labels=np.array(model.relation_labels, dtype=object),
    )


def load_model(path: str | Path) -> EmbeddingModel:
    """Read a model written by :func:`save_model`; unknown versions fail."""
    try:
        with np.load(path, allow_pickle=True) as archive:
            version = int(archive["format_version"])
            if version != MODEL_FORMAT_VERSION:
                raise ParseError(f"unsupported model format version: {version}")
            return EmbeddingModel(
                entity_vectors=archive["entity_vectors"],
                relation_vectors=archive["relation_vectors"],
                entity_labels=tuple(str(s) for s in archive["entity_labels"]),
                relation_labels=tuple(str(s) for s in archive["relation_labels"]),
            )
    except (OSError, KeyError, ValueError) as exc:
        raise ParseError(f"cannot read model file: {exc}") from exc
