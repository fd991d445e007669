"""kgrex: a knowledge-graph recommender that explains its recommendations
with reasons for and reasons against each item."""

from .errors import (
    DomainError,
    KgrexError,
    ParseError,
    UndefinedSupportError,
    UnsupportedSchemeError,
)
from .graph import Direction, KnowledgeGraph, Triple, load_triples
from .paths import (
    PathInstance,
    PathType,
    ReasonKey,
    RelationStep,
    enumerate_paths_oracle,
    find_paths,
    load_path_types,
    parse_path_type,
    path_holds,
    reason_key_of,
)
from .reasons import (
    ObjectiveSpec,
    Reason,
    load_objective,
    reasons_against,
    reasons_against_s1,
    reasons_against_s2,
    reasons_against_s3,
    reasons_against_s4,
    reasons_against_s5,
    reasons_for,
    render_reason_text,
)
from .embedding import (
    EmbeddingModel,
    LinkPredictionResult,
    RecommendationList,
    TrainConfig,
    evaluate_link_prediction,
    load_candidates,
    load_model,
    load_train_config,
    margin_loss_and_grads,
    recommend_top_n,
    save_model,
    score_triple,
    train_transe,
)
from .figures import save_coverage_figure, save_loss_figure
from .harness import (
    CoverageReport,
    Interaction,
    ItemReasons,
    ReportRow,
    build_report,
    coverage,
    simulate_interactions,
    slot_counts,
    support,
)

__version__ = "0.1.0"

__all__ = [
    "CoverageReport",
    "Direction",
    "DomainError",
    "EmbeddingModel",
    "Interaction",
    "ItemReasons",
    "KgrexError",
    "KnowledgeGraph",
    "LinkPredictionResult",
    "ObjectiveSpec",
    "ParseError",
    "PathInstance",
    "PathType",
    "Reason",
    "ReasonKey",
    "RecommendationList",
    "RelationStep",
    "ReportRow",
    "TrainConfig",
    "Triple",
    "UndefinedSupportError",
    "UnsupportedSchemeError",
    "build_report",
    "coverage",
    "enumerate_paths_oracle",
    "evaluate_link_prediction",
    "find_paths",
    "load_candidates",
    "load_model",
    "load_objective",
    "load_path_types",
    "load_train_config",
    "load_triples",
    "margin_loss_and_grads",
    "parse_path_type",
    "path_holds",
    "reason_key_of",
    "reasons_against",
    "reasons_against_s1",
    "reasons_against_s2",
    "reasons_against_s3",
    "reasons_against_s4",
    "reasons_against_s5",
    "reasons_for",
    "recommend_top_n",
    "render_reason_text",
    "save_coverage_figure",
    "save_loss_figure",
    "save_model",
    "score_triple",
    "simulate_interactions",
    "slot_counts",
    "support",
    "train_transe",
]
