"""Independent oracles used to compute expected values in tests.

Everything here works on plain label tuples and dicts, deliberately not on
the package's graph or path classes, so a bug in the implementation cannot
leak into the expectations.  Slow brute force is fine; these run on small
inputs only.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

Row = tuple[str, str, str]
Step = tuple[str, bool]  # (relation label, is_inverse)


def scan_contains(rows: Sequence[Row], h: str, r: str, t: str) -> bool:
    """Linear scan membership, duplicates and order ignored."""
    return any(row == (h, r, t) for row in rows)


def filter_neighbors(rows: Sequence[Row], e: str, r: str, inverse: bool) -> set[str]:
    """Brute-force adjacency by filtering the raw triple list."""
    if inverse:
        return {h for (h, rel, t) in rows if rel == r and t == e}
    return {t for (h, rel, t) in rows if rel == r and h == e}


def entities_of(rows: Sequence[Row]) -> set[str]:
    out = set()
    for h, _, t in rows:
        out.add(h)
        out.add(t)
    return out


def brute_force_paths(
    rows: Sequence[Row], steps: Sequence[Step], u: str, i: str
) -> set[tuple[str, ...]]:
    """All simple walks of the step shape from u to i, by materializing
    every possible intermediate entity assignment."""
    pool = sorted(entities_of(rows))
    edges = set(rows)

    def edge_ok(a: str, step: Step, b: str) -> bool:
        rel, inverse = step
        return ((b, rel, a) in edges) if inverse else ((a, rel, b) in edges)

    found = set()
    n_mid = len(steps) - 1
    for mids in itertools.product(pool, repeat=n_mid):
        walk = (u, *mids, i)
        if len(set(walk)) != len(walk):
            continue
        if all(edge_ok(walk[k], steps[k], walk[k + 1]) for k in range(len(steps))):
            found.add(walk)
    return found


def reason_keys(paths: Iterable[tuple[str, ...]], steps: Sequence[Step]):
    """Key = (step shape, all entities except the final item)."""
    return {(tuple(steps), walk[:-1]) for walk in paths}


def reasons_for_keys(
    rows: Sequence[Row], path_types: Sequence[Sequence[Step]], u: str, i: str
) -> set:
    out = set()
    for steps in path_types:
        out |= reason_keys(brute_force_paths(rows, steps, u, i), steps)
    return out


def against_s1_keys(
    rows: Sequence[Row],
    path_types: Sequence[Sequence[Step]],
    u: str,
    target: str,
    items: Sequence[str],
) -> set:
    """Union of the alternatives' reason keys minus the target's own."""
    own = reasons_for_keys(rows, path_types, u, target)
    pool = set()
    for alt in items:
        if alt != target:
            pool |= reasons_for_keys(rows, path_types, u, alt)
    return pool - own


def against_s4_keys(
    rows: Sequence[Row],
    path_types: Sequence[Sequence[Step]],
    u: str,
    target: str,
    items: Sequence[str],
) -> set:
    """Intersection over every alternative, minus the target's own."""
    own = reasons_for_keys(rows, path_types, u, target)
    common = None
    for alt in items:
        if alt == target:
            continue
        keys = reasons_for_keys(rows, path_types, u, alt)
        common = keys if common is None else common & keys
    return (common or set()) - own


def coverage_oracle(counts: Sequence[int]) -> float:
    return len([c for c in counts if c > 0]) / len(counts)


def support_oracle(counts: Sequence[int]) -> tuple[float, float]:
    explained = [c for c in counts if c > 0]
    mean = sum(explained) / len(explained)
    var = sum((c - mean) ** 2 for c in explained) / len(explained)
    return mean, math.sqrt(var)


def rank_oracle(scores: Sequence[float], true_idx: int, excluded: set[int]) -> int:
    """1 + number of non-excluded competitors scoring strictly higher."""
    better = 0
    for idx, s in enumerate(scores):
        if idx == true_idx or idx in excluded:
            continue
        if s > scores[true_idx]:
            better += 1
    return 1 + better


def sort_by_score_oracle(
    candidates: Sequence[int], scores: Sequence[float]
) -> list[int]:
    """Full sort, best score first, ties toward the lower id."""
    return sorted(candidates, key=lambda e: (-scores[e], e))


def random_graph(rng, max_entities: int = 25, max_relations: int = 4, max_triples: int = 120) -> list[Row]:
    """Random label rows; may contain duplicates and self-loops on purpose."""
    n_e = int(rng.integers(2, max_entities + 1))
    n_r = int(rng.integers(1, max_relations + 1))
    n_t = int(rng.integers(1, max_triples + 1))
    rows = []
    for _ in range(n_t):
        h = f"e{int(rng.integers(0, n_e))}"
        r = f"r{int(rng.integers(0, n_r))}"
        t = f"e{int(rng.integers(0, n_e))}"
        rows.append((h, r, t))
    return rows


def random_path_types(
    rng, relations: Sequence[str], max_types: int = 5, max_len: int = 3
) -> list[list[Step]]:
    n = int(rng.integers(1, max_types + 1))
    out = []
    for _ in range(n):
        length = int(rng.integers(1, max_len + 1))
        steps = [
            (relations[int(rng.integers(0, len(relations)))], bool(rng.integers(0, 2)))
            for _ in range(length)
        ]
        out.append(steps)
    return out


def random_against_instance(rng):
    """One seeded reasons-against problem: (rows, path type steps, user,
    item labels).  Sized to the acceptance bounds: ≤25 entities, ≤4
    relations, ≤120 triples, ≤5 types of length ≤3, 2-5 items."""
    while True:
        rows = random_graph(rng)
        ents = sorted(entities_of(rows))
        if len(ents) >= 3:
            break
    rels = sorted({r for _, r, _ in rows})
    path_types = random_path_types(rng, rels)
    user = ents[int(rng.integers(0, len(ents)))]
    others = [e for e in ents if e != user]
    n_items = int(rng.integers(2, min(5, len(others)) + 1))
    idx = rng.choice(len(others), size=n_items, replace=False)
    items = [others[j] for j in idx]
    return rows, path_types, user, items
