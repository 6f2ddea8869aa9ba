"""Constraint search over vertex assignments.

A *constraint* is a pair ``(var_positions, fixed_vertices)``: the images of
the listed variables together with the fixed vertices must form an edge of
the host hypergraph.  Two engines share one variable ordering:

* :func:`count_assignments` backtracks with exact integer counts, drawing
  candidates from link sets and counting the last level by set size;
* :func:`enumerate_assignments` materializes all solutions as an integer
  array, extending level by level with vectorized edge checks.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from .hypergraph import Hypergraph

Constraint = tuple[tuple[int, ...], tuple[int, ...]]

# rows x n candidates handled per vectorized extension step
_CHUNK = 1 << 21


def variable_order(nvars: int, constraints: Sequence[Constraint]) -> list[int]:
    """Most-constrained-first ordering.

    Greedily pick the variable that completes the most constraints given the
    variables already placed, breaking ties by incident-constraint count and
    then by position.  Variables touching no constraint go last.
    """
    incident = [0] * nvars
    for vars_, _ in constraints:
        for v in vars_:
            incident[v] += 1
    placed: set[int] = set()
    order: list[int] = []
    remaining = set(range(nvars))
    while remaining:
        def score(v):
            completes = sum(1 for vars_, _ in constraints
                            if v in vars_ and all(u in placed or u == v for u in vars_))
            return (incident[v] > 0, completes, incident[v], -v)
        best = max(remaining, key=score)
        order.append(best)
        placed.add(best)
        remaining.discard(best)
    return order


def _plan(nvars: int, constraints: Sequence[Constraint]):
    """Variable order plus, per level, the constraints completed there."""
    order = variable_order(nvars, constraints)
    level_of = {v: d for d, v in enumerate(order)}
    checks: list[list[tuple[tuple[int, ...], tuple[int, ...]]]] = [[] for _ in order]
    for vars_, fixed in constraints:
        if not vars_:
            continue
        last = max(vars_, key=level_of.__getitem__)
        others = tuple(u for u in vars_ if u != last)
        checks[level_of[last]].append((others, fixed))
    return order, checks


def _candidates(graph: Hypergraph, checks, assignment) -> frozenset | range:
    sets = []
    for others, fixed in checks:
        face = fixed + tuple(assignment[u] for u in others)
        if len(set(face)) != len(face):
            return frozenset()
        sets.append(graph.link(face))
    if not sets:
        return range(graph.n)
    sets.sort(key=len)
    out = sets[0]
    for s in sets[1:]:
        if not out:
            break
        out = out & s
    return out


def _count_from(graph, order, checks, depth, assignment) -> int:
    var = order[depth]
    cands = _candidates(graph, checks[depth], assignment)
    if depth == len(order) - 1:
        return len(cands)
    total = 0
    for v in cands:
        assignment[var] = v
        total += _count_from(graph, order, checks, depth + 1, assignment)
    assignment[var] = None
    return total


def _count_root_chunk(args) -> int:
    graph, nvars, order, checks, roots = args
    total = 0
    for r in roots:
        assignment: list = [None] * nvars
        assignment[order[0]] = r
        total += 1 if len(order) == 1 else _count_from(graph, order, checks, 1, assignment)
    return total


def count_assignments(graph: Hypergraph, nvars: int, constraints: Sequence[Constraint],
                      workers: int = 1) -> int:
    """Number of maps ``[nvars] -> [n]`` satisfying every constraint.

    Constraints without variables are the caller's business and are skipped
    here.  ``workers > 1`` splits the first variable's candidates across
    processes; the integer total does not depend on the split.
    """
    if nvars == 0:
        return 1
    constrained = {v for vars_, _ in constraints for v in vars_}
    free_factor = graph.n ** (nvars - len(constrained))
    if not constrained:
        return free_factor
    # renumber so the search only sees constrained variables
    renum = {v: i for i, v in enumerate(sorted(constrained))}
    cons = [(tuple(renum[v] for v in vars_), fixed) for vars_, fixed in constraints if vars_]
    m = len(renum)
    order, checks = _plan(m, cons)
    roots = list(_candidates(graph, checks[0], [None] * m))
    if workers <= 1 or len(roots) < 2:
        sub = _count_root_chunk((graph, m, order, checks, roots))
    else:
        chunks = [roots[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sub = sum(pool.map(_count_root_chunk,
                               [(graph, m, order, checks, c) for c in chunks if c]))
    return sub * free_factor


def enumerate_assignments(graph: Hypergraph, nvars: int,
                          constraints: Sequence[Constraint]) -> np.ndarray:
    """All satisfying maps as an ``(N, nvars)`` array, rows in lexicographic order."""
    n = graph.n
    if nvars == 0:
        return np.zeros((1, 0), dtype=np.int64)
    order, checks = _plan(nvars, constraints)
    level_of = {v: d for d, v in enumerate(order)}
    rows = np.zeros((1, 0), dtype=np.int64)
    verts = np.arange(n, dtype=np.int64)
    for depth in range(nvars):
        if rows.shape[0] == 0 or n == 0:
            rows = np.zeros((0, depth + 1), dtype=np.int64)
            continue
        step = max(1, _CHUNK // max(n, 1))
        pieces = []
        for start in range(0, rows.shape[0], step):
            block = rows[start:start + step]
            ext = np.empty((block.shape[0] * n, depth + 1), dtype=np.int64)
            ext[:, :depth] = np.repeat(block, n, axis=0)
            ext[:, depth] = np.tile(verts, block.shape[0])
            keep = np.ones(ext.shape[0], dtype=bool)
            for others, fixed in checks[depth]:
                cols = [np.full(ext.shape[0], f, dtype=np.int64) for f in fixed]
                cols += [ext[:, level_of[u]] for u in others]
                cols.append(ext[:, depth])
                keep &= graph.contains_rows(np.stack(cols, axis=1))
            pieces.append(ext[keep])
        rows = np.concatenate(pieces, axis=0)
    # columns back to variable order, then a canonical row order
    inverse = [level_of[v] for v in range(nvars)]
    rows = rows[:, inverse]
    if rows.shape[0] > 1:
        rows = rows[np.lexsort(rows.T[::-1])]
    return rows
