"""Command-line entry points.

Subcommands: ingest, train, recommend, explain, eval, serve.  Every failure
prints a one-line diagnostic on stderr and maps to a stable exit code:
2 parse error, 3 domain error, 4 unsupported scheme.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .embedding import (
    TrainConfig,
    load_candidates,
    load_model,
    load_train_config,
    recommend_top_n,
    save_model,
    train_transe,
)
from .errors import DomainError, KgrexError, ParseError, UnsupportedSchemeError
from .graph import KnowledgeGraph, load_triples
from .harness import build_report, simulate_interactions
from .paths import load_path_types
from .reasons import (
    DEFAULT_TRIM_BOUND,
    load_objective,
    reasons_against,
    reasons_for,
    render_reason_text,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_UNSUPPORTED_SCHEME = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgrex",
        description="knowledge-graph recommender with reasons for and against",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a triple TSV file")
    p.add_argument("--graph", required=True, help="triple TSV file")
    p.add_argument("--out", help="write normalized TSV here")

    p = sub.add_parser("train", help="train embeddings and save a model file")
    p.add_argument("--graph", required=True)
    p.add_argument("--model", required=True, help="output model path (.npz)")
    p.add_argument("--train-config", help="key: value file of hyperparameters")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--epochs", type=int, help="override the config epoch count")
    p.add_argument("--loss-figure", help="also render the loss curve to this file")

    p = sub.add_parser("recommend", help="print the top-N items for an anchor")
    p.add_argument("--graph", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--relation", required=True, help="recommendation relation label")
    p.add_argument("--anchor", required=True, help="query anchor entity label")
    p.add_argument("--candidates", help="candidate file, one label per line")
    p.add_argument("--n", type=int, default=4)

    p = sub.add_parser("explain", help="print reasons for and against one item")
    p.add_argument("--graph", required=True)
    p.add_argument("--paths", required=True, help="path-type configuration file")
    p.add_argument("--anchor", required=True)
    p.add_argument("--item", required=True, help="item to explain")
    p.add_argument("--scheme", default="s3", help="against-scheme: s1|s2|s3|s4|s5")
    p.add_argument("--items", help="comma-separated recommendation list (labels)")
    p.add_argument("--model", help="rank candidates with this model when --items is absent")
    p.add_argument("--relation", help="recommendation relation label (with --model)")
    p.add_argument("--candidates")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--k", type=int, default=DEFAULT_TRIM_BOUND, help="s3 trim bound")
    p.add_argument("--objective", help="objective file (required for s5)")

    p = sub.add_parser("eval", help="simulate cases and write a coverage report")
    p.add_argument("--graph", required=True)
    p.add_argument("--paths", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--relation", required=True)
    p.add_argument("--candidates")
    p.add_argument("--anchors", help="anchor pool file, one label per line")
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=DEFAULT_TRIM_BOUND)
    p.add_argument("--objective")
    p.add_argument("--out", required=True, help="report directory")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--graph", required=True)
    p.add_argument("--paths", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--relation", required=True)
    p.add_argument("--candidates")
    p.add_argument("--objective")
    p.add_argument("--k", type=int, default=DEFAULT_TRIM_BOUND)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--choice-log", default="choices.ndjson")
    p.add_argument("--static", help="directory of built UI assets to serve at /")

    return parser


def _relation_id(g: KnowledgeGraph, label: str):
    if not g.has_relation(label):
        raise DomainError(f"unknown relation label: {label!r}")
    return g.relation_id(label)


def _entity_id(g: KnowledgeGraph, label: str):
    if not g.has_entity(label):
        raise DomainError(f"unknown entity label: {label!r}")
    return g.entity_id(label)


def _candidate_ids(g: KnowledgeGraph, args) -> tuple[int, ...]:
    """Explicit candidate file, else every tail of the recommendation relation."""
    if args.candidates:
        return load_candidates(args.candidates, g)
    relation = _relation_id(g, args.relation)
    tails = {t.tail for t in g.triples if t.relation == relation}
    if not tails:
        raise DomainError(
            f"no candidates: relation {args.relation!r} has no tail entities"
        )
    return tuple(sorted(tails))


def _anchor_pool(g: KnowledgeGraph, args) -> tuple[int, ...]:
    """Explicit anchor file, else every head of the recommendation relation."""
    if args.anchors:
        return load_candidates(args.anchors, g)
    relation = _relation_id(g, args.relation)
    heads = {t.head for t in g.triples if t.relation == relation}
    if not heads:
        raise DomainError(f"no anchors: relation {args.relation!r} has no head entities")
    return tuple(sorted(heads))


def _cmd_ingest(args) -> int:
    g = load_triples(args.graph)
    if args.out:
        Path(args.out).write_text(
            "".join(line + "\n" for line in g.to_lines()), encoding="utf-8"
        )
    print(g.summary())
    return EXIT_OK


def _cmd_train(args) -> int:
    g = load_triples(args.graph)
    config = load_train_config(args.train_config) if args.train_config else TrainConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if overrides:
        config = replace(config, **overrides)
    model, losses = train_transe(g, config)
    save_model(model, args.model)
    if args.loss_figure:
        from .figures import save_loss_figure

        save_loss_figure(losses, args.loss_figure)
    final = f"{losses[-1]:.6f}" if losses else "n/a"
    print(
        f"trained epochs={config.epochs} seed={config.seed} "
        f"final_loss={final} model={args.model}"
    )
    return EXIT_OK


def _cmd_recommend(args) -> int:
    g = load_triples(args.graph)
    model = load_model(args.model)
    relation = _relation_id(g, args.relation)
    anchor = _entity_id(g, args.anchor)
    candidates = [c for c in _candidate_ids(g, args) if c != anchor]
    rec = recommend_top_n(model, anchor, relation, candidates, args.n)
    for item, score in zip(rec.items, rec.scores):
        print(f"{g.entity_label(item)}\t{score:.6f}")
    return EXIT_OK


def _cmd_explain(args) -> int:
    g = load_triples(args.graph)
    path_types = load_path_types(args.paths, g)
    anchor = _entity_id(g, args.anchor)
    item = _entity_id(g, args.item)
    if args.items:
        items = tuple(_entity_id(g, lbl.strip()) for lbl in args.items.split(","))
    else:
        if not (args.model and args.relation):
            raise DomainError("explain needs either --items or --model with --relation")
        model = load_model(args.model)
        relation = _relation_id(g, args.relation)
        candidates = [c for c in _candidate_ids(g, args) if c != anchor]
        items = recommend_top_n(model, anchor, relation, candidates, args.n).items
    if item not in items:
        raise DomainError(
            f"item {args.item!r} is not in the recommendation list being explained"
        )
    objective = load_objective(args.objective, g) if args.objective else None
    fors = reasons_for(item, anchor, path_types, g)
    against = reasons_against(
        args.scheme, item, anchor, items, path_types, g,
        k=args.k, objective=objective,
    )
    for reason in fors:
        print(f"for\t{render_reason_text(reason, g)}")
    for reason in against:
        print(f"against\t{reason.scheme}\t{render_reason_text(reason, g)}")
    if not against:
        print(f"# no reasons against under scheme {args.scheme}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    g = load_triples(args.graph)
    path_types = load_path_types(args.paths, g)
    model = load_model(args.model)
    relation = _relation_id(g, args.relation)
    candidates = _candidate_ids(g, args)
    anchors = _anchor_pool(g, args)
    objective = load_objective(args.objective, g) if args.objective else None
    interactions = simulate_interactions(
        g, model, relation, anchors, candidates, path_types,
        n_items=args.n, n_cases=args.cases, seed=args.seed,
        k=args.k, objective=objective,
    )
    manifest = {
        "graph": str(args.graph),
        "paths": str(args.paths),
        "model": str(args.model),
        "relation": args.relation,
        "cases": str(args.cases),
        "n": str(args.n),
        "seed": str(args.seed),
        "k": str(args.k),
    }
    report = build_report(interactions, manifest)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    from .figures import save_coverage_figure

    save_coverage_figure(report, out_dir / "coverage.png")
    print(report.to_text(), end="")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceContext, create_app

    g = load_triples(args.graph)
    path_types = load_path_types(args.paths, g)
    model = load_model(args.model)
    relation = _relation_id(g, args.relation)
    candidates = _candidate_ids(g, args)
    objective = load_objective(args.objective, g) if args.objective else None
    ctx = ServiceContext(
        graph=g,
        model=model,
        path_types=path_types,
        relation=relation,
        candidates=candidates,
        choice_log_path=Path(args.choice_log),
        trim_bound=args.k,
        objective=objective,
        static_dir=Path(args.static) if args.static else None,
    )
    app = create_app(ctx)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "recommend": _cmd_recommend,
    "explain": _cmd_explain,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnsupportedSchemeError as exc:
        print(f"unsupported scheme: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED_SCHEME
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except KgrexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
