"""HTTP service: recommend-and-explain plus choice logging.

The response shape mirrors the two-pane experiment presentation: each item
carries at most one reason for and one reason against (the first element of
the s3 ordering), with the full sets available behind a verbose flag.
Everything at this boundary speaks entity labels; internal ids never leak.

The graph and model are immutable snapshots, so request handling is a pure
function of the payload; the choice log is the only mutable resource and
its writes are serialized by a lock.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .embedding import EmbeddingModel, recommend_top_n
from .errors import DomainError, KgrexError, UnsupportedSchemeError
from .graph import EntityId, KnowledgeGraph, RelationId
from .paths import PathType
from .reasons import (
    AGAINST_SCHEMES,
    DEFAULT_TRIM_BOUND,
    ObjectiveSpec,
    Reason,
    SCHEME_S2,
    SCHEME_S3,
    SCHEME_S5,
    reasons_against,
    reasons_for,
    render_reason_text,
    s3_rank,
)

PHASE_FOR_ONLY = "for-only"
PHASE_FOR_AND_AGAINST = "for-and-against"
PHASES = (PHASE_FOR_ONLY, PHASE_FOR_AND_AGAINST)


@dataclass(frozen=True)
class ServiceContext:
    """Everything a running service needs, loaded once at startup."""

    graph: KnowledgeGraph
    model: EmbeddingModel
    path_types: tuple[PathType, ...]
    relation: RelationId
    candidates: tuple[EntityId, ...]
    choice_log_path: Path
    trim_bound: int | None = DEFAULT_TRIM_BOUND
    objective: ObjectiveSpec | None = None
    static_dir: Path | None = None

    def __post_init__(self):
        if self.model.entity_labels != self.graph.entity_labels:
            raise DomainError("model entity vocabulary does not match the graph")
        if self.model.relation_labels != self.graph.relation_labels:
            raise DomainError("model relation vocabulary does not match the graph")
        if not self.path_types:
            raise DomainError("service needs at least one permissible path type")
        if not self.candidates:
            raise DomainError("service needs a non-empty candidate set")


class DuplicateChoiceError(KgrexError):
    """A (session, phase) pair was submitted twice."""


class PhaseOrderError(KgrexError):
    """Phase 2 was submitted before phase 1 for the same session."""


class ChoiceLog:
    """Append-only newline-delimited JSON log of choice events.

    The in-memory view is rebuilt by replaying the file, so reported stats
    always equal a recount from the raw log.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._by_session: dict[str, dict[str, str]] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._remember(json.loads(line))

    def _remember(self, event: dict) -> None:
        phases = self._by_session.setdefault(event["session_id"], {})
        phases[event["phase"]] = event["chosen_item"]

    def record(self, session_id: str, phase: str, chosen_item: str, timestamp: str) -> dict:
        if phase not in PHASES:
            raise DomainError(f"unknown phase: {phase!r}")
        with self._lock:
            phases = self._by_session.get(session_id, {})
            if phase in phases:
                raise DuplicateChoiceError(
                    f"session {session_id!r} already chose in phase {phase!r}"
                )
            if phase == PHASE_FOR_AND_AGAINST and PHASE_FOR_ONLY not in phases:
                raise PhaseOrderError(
                    f"session {session_id!r} must complete phase {PHASE_FOR_ONLY!r} first"
                )
            event = {
                "session_id": session_id,
                "phase": phase,
                "chosen_item": chosen_item,
                "timestamp": timestamp,
            }
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
            self._remember(event)
            return event

    def stats(self) -> tuple[int, int, int]:
        """(sessions seen, sessions with both phases, completed that changed)."""
        with self._lock:
            completed = {
                s: p
                for s, p in self._by_session.items()
                if PHASE_FOR_ONLY in p and PHASE_FOR_AND_AGAINST in p
            }
            changed = sum(
                1
                for p in completed.values()
                if p[PHASE_FOR_ONLY] != p[PHASE_FOR_AND_AGAINST]
            )
            return len(self._by_session), len(completed), changed


def replay_stats(path: str | Path) -> tuple[int, int, int]:
    """Recount (sessions, completed, changed) from a raw log file."""
    return ChoiceLog(path).stats()


class RecommendRequest(BaseModel):
    anchor: str
    n: int = 4
    scheme: str = SCHEME_S3
    k: int | None = None
    verbose: bool = False


class ChoiceRequest(BaseModel):
    session_id: str
    phase: str
    chosen_item: str
    timestamp: str | None = None


def _reason_payload(reason: Reason, g: KnowledgeGraph) -> dict:
    witness = reason.witnesses[0]
    payload = {
        "text": render_reason_text(reason, g),
        "path_type": witness.path_type.label(g),
        "entities": [g.entity_label(e) for e in witness.entities],
    }
    if reason.polarity == "against":
        payload["scheme"] = reason.scheme
        payload["favored"] = (
            g.entity_label(reason.favored) if reason.favored is not None else None
        )
    return payload


def _display_order(scheme: str, against: Sequence[Reason]) -> list[Reason]:
    # s5 is already ordered best alternative first; the rest use the s3 rank
    if scheme == SCHEME_S5:
        return list(against)
    return sorted(against, key=s3_rank)


def _normalize_timestamp(text: str | None) -> str:
    if text is None:
        return datetime.now(timezone.utc).isoformat()
    try:
        parsed = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise DomainError(f"invalid timestamp: {text!r}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc).isoformat()


def create_app(ctx: ServiceContext) -> FastAPI:
    """Build the service around one immutable context."""
    app = FastAPI(title="kgrex", docs_url=None, redoc_url=None)
    log = ChoiceLog(ctx.choice_log_path)
    g = ctx.graph
    candidate_labels = [g.entity_label(c) for c in ctx.candidates]

    @app.exception_handler(DomainError)
    def _domain_error(_request, exc: DomainError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(UnsupportedSchemeError)
    def _unsupported(_request, exc: UnsupportedSchemeError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(DuplicateChoiceError)
    def _duplicate(_request, exc: DuplicateChoiceError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(PhaseOrderError)
    def _order(_request, exc: PhaseOrderError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "entities": g.num_entities,
            "relations": g.num_relations,
            "triples": g.num_triples,
            "candidates": len(ctx.candidates),
        }

    @app.get("/items")
    def items():
        return {"items": candidate_labels}

    @app.post("/recommend")
    def recommend(req: RecommendRequest):
        if not g.has_entity(req.anchor):
            raise HTTPException(404, detail=f"unknown anchor entity: {req.anchor!r}")
        scheme = req.scheme.lower()
        if scheme not in (SCHEME_S2, *AGAINST_SCHEMES):
            raise HTTPException(400, detail=f"invalid scheme: {req.scheme!r}")
        if req.n < 1:
            raise HTTPException(400, detail="n must be a positive integer")
        if req.k is not None and req.k < 1:
            raise HTTPException(400, detail="k must be a positive integer or omitted")
        user = g.entity_id(req.anchor)
        usable = [c for c in ctx.candidates if c != user]
        rec = recommend_top_n(ctx.model, user, ctx.relation, usable, req.n)
        k = req.k if req.k is not None else ctx.trim_bound
        out = []
        for item, score in zip(rec.items, rec.scores):
            fors = reasons_for(item, user, ctx.path_types, g)
            against = reasons_against(
                scheme, item, user, rec.items, ctx.path_types, g,
                k=k, objective=ctx.objective,
            )
            shown_against = _display_order(scheme, against)
            entry = {
                "item": g.entity_label(item),
                "score": score,
                "reason_for": _reason_payload(fors[0], g) if fors else None,
                "reason_against": (
                    _reason_payload(shown_against[0], g) if shown_against else None
                ),
            }
            if req.verbose:
                entry["reasons_for"] = [_reason_payload(r, g) for r in fors]
                entry["reasons_against"] = [_reason_payload(r, g) for r in against]
            out.append(entry)
        return {"anchor": req.anchor, "scheme": scheme, "n": req.n, "items": out}

    @app.post("/choice")
    def choice(req: ChoiceRequest):
        if req.chosen_item not in candidate_labels:
            raise DomainError(f"chosen item is not a known candidate: {req.chosen_item!r}")
        event = log.record(
            session_id=req.session_id,
            phase=req.phase,
            chosen_item=req.chosen_item,
            timestamp=_normalize_timestamp(req.timestamp),
        )
        return {"status": "recorded", **event}

    @app.get("/stats")
    def stats():
        sessions, completed, changed = log.stats()
        rate = changed / completed if completed else "n/a"
        return {
            "sessions": sessions,
            "completed": completed,
            "changed": changed,
            "change_rate": rate,
        }

    if ctx.static_dir is not None and Path(ctx.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=ctx.static_dir, html=True), name="ui")

    return app
