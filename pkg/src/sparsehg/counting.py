"""Labeled homomorphism counts between k-uniform hypergraphs.

A homomorphism ``K -> A`` maps vertices of ``K`` to vertices of ``A`` so
that every edge of ``K`` lands on an edge of ``A``.  Maps need not be
injective, but the image of an edge must be a k-set, so each edge is
mapped injectively.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator

from ._search import Constraint, _candidates, count_assignments
from .errors import ValidationError
from .hypergraph import Edge, Hypergraph


def _constraints(K: Hypergraph) -> list[Constraint]:
    return [(e, ()) for e in K.sorted_edges()]


def _check_uniformity(K: Hypergraph, A: Hypergraph) -> None:
    if K.k != A.k:
        raise ValidationError(f"pattern is {K.k}-uniform but host is {A.k}-uniform")


def hom_order(K: Hypergraph) -> list[int]:
    """Pattern vertices by decreasing degree, keeping each next vertex attached
    to the already-placed ones where possible."""
    deg = [0] * K.n
    for e in K.edges:
        for v in e:
            deg[v] += 1
    placed: set[int] = set()
    order = []
    for _ in range(K.n):
        def score(v):
            attached = sum(1 for e in K.edges if v in e and all(u in placed or u == v for u in e))
            return (attached, deg[v], -v)
        v = max((u for u in range(K.n) if u not in placed), key=score)
        order.append(v)
        placed.add(v)
    return order


def count_hom(K: Hypergraph, A: Hypergraph, workers: int = 1) -> int:
    """hom(K, A) as an exact integer."""
    _check_uniformity(K, A)
    return count_assignments(A, K.n, _constraints(K), workers)


def hom_density(K: Hypergraph, A: Hypergraph) -> Fraction:
    """hom(K, A) / |V(A)|^|V(K)|."""
    _check_uniformity(K, A)
    if A.n == 0:
        raise ValidationError("host hypergraph has no vertices")
    return Fraction(count_hom(K, A), A.n ** K.n)


def relative_density(K: Hypergraph, A: Hypergraph, gamma: Hypergraph) -> Fraction:
    """hom(K, A) / hom(K, gamma) for ``A`` inside ``gamma``; 0 when the latter vanishes."""
    _check_uniformity(K, A)
    if not A.issubgraph(gamma):
        raise ValidationError("A must be a subgraph of gamma on the same vertex set")
    total = count_hom(K, gamma)
    if total == 0:
        return Fraction(0)
    return Fraction(count_hom(K, A), total)


def iter_homs(K: Hypergraph, A: Hypergraph) -> Iterator[tuple[int, ...]]:
    """Every homomorphism as a tuple ``(pi(0), ..., pi(|V(K)|-1))``.

    Vertices are assigned in :func:`hom_order`; the yield order is
    deterministic but not lexicographic.
    """
    _check_uniformity(K, A)
    if K.n == 0:
        yield ()
        return
    order = hom_order(K)
    level = {v: d for d, v in enumerate(order)}
    checks: list[list] = [[] for _ in order]
    for e in K.sorted_edges():
        last = max(e, key=level.__getitem__)
        checks[level[last]].append((tuple(u for u in e if u != last), ()))
    assignment: list = [None] * K.n

    def rec(depth):
        var = order[depth]
        for v in sorted(_candidates(A, checks[depth], assignment)):
            assignment[var] = v
            if depth == K.n - 1:
                yield tuple(assignment)
            else:
                yield from rec(depth + 1)
        assignment[var] = None

    yield from rec(0)


def image_edges(K: Hypergraph, hom: tuple[int, ...]) -> tuple[Edge, ...]:
    """Distinct host edges hit by ``hom``, sorted."""
    return tuple(sorted({tuple(sorted(hom[v] for v in e)) for e in K.edges}))


def strip_isolated(K: Hypergraph) -> tuple[Hypergraph, int]:
    """Drop isolated pattern vertices; returns the core and how many were dropped.

    ``hom(K, A) = hom(core, A) * n**dropped``.
    """
    used = sorted({v for e in K.edges for v in e})
    relabel = {v: i for i, v in enumerate(used)}
    core = Hypergraph(len(used), K.k, frozenset(tuple(relabel[v] for v in e) for e in K.edges))
    return core, K.n - len(used)
