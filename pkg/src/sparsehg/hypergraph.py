"""k-uniform hypergraphs on the vertex set {0, ..., n-1}.

Edges are stored as strictly increasing integer tuples.  Besides the edge
set, every hypergraph lazily builds a *link table*: for each sorted
(k-1)-tuple of vertices, the set of vertices completing it to an edge.
Candidate generation in every search routine goes through this table.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Iterator

import numpy as np

from .errors import ValidationError

Edge = tuple[int, ...]


def _normalize_edge(edge: Iterable[int], n: int, k: int) -> Edge:
    verts = [int(v) for v in edge]
    if len(verts) != k:
        raise ValidationError(f"edge {tuple(verts)} has arity {len(verts)}, expected {k}")
    if len(set(verts)) != k:
        raise ValidationError(f"edge {tuple(verts)} repeats a vertex")
    for v in verts:
        if not 0 <= v < n:
            raise ValidationError(f"edge {tuple(verts)} has vertex {v} outside [0, {n})")
    return tuple(sorted(verts))


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """An immutable k-uniform hypergraph.

    Use :func:`build` rather than calling the constructor directly; the
    constructor trusts that ``edges`` already holds sorted, valid tuples.
    """

    n: int
    k: int
    edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"vertex count must be nonnegative, got {self.n}")
        if self.k < 1:
            raise ValidationError(f"uniformity must be at least 1, got {self.k}")

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.sorted_edges())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n, self.k, self.edges) == (other.n, other.k, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.k, self.edges))

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.n}, k={self.k}, m={len(self.edges)})"

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    @cached_property
    def links(self) -> dict[Edge, frozenset[int]]:
        table: dict[Edge, set[int]] = {}
        for e in self.edges:
            for i, v in enumerate(e):
                table.setdefault(e[:i] + e[i + 1:], set()).add(v)
        return {face: frozenset(vs) for face, vs in table.items()}

    def link(self, face: Iterable[int]) -> frozenset[int]:
        """Vertices ``v`` such that ``face + {v}`` is an edge.

        ``face`` may be given in any order; faces with a repeated vertex
        have an empty link.
        """
        key = tuple(sorted(face))
        return self.links.get(key, frozenset())

    @cached_property
    def edge_codes(self) -> np.ndarray:
        """Sorted integer codes of the edges, for vectorized membership."""
        if self.n ** self.k >= 2**62:
            raise ValidationError("hypergraph too large for vectorized membership codes")
        weights = self.n ** np.arange(self.k, dtype=np.int64)
        if not self.edges:
            return np.zeros(0, dtype=np.int64)
        arr = np.array(sorted(self.edges), dtype=np.int64)
        return np.sort(arr @ weights)

    def contains_edge(self, vertices: Iterable[int]) -> bool:
        verts = tuple(vertices)
        if len(verts) != self.k or len(set(verts)) != self.k:
            return False
        return tuple(sorted(verts)) in self.edges

    def contains_rows(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`contains_edge` over the rows of an (N, k) array.

        Rows with a repeated or out-of-range vertex are never edges.
        """
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != self.k:
            raise ValidationError(f"expected an (N, {self.k}) array of vertices")
        if rows.shape[0] == 0 or not self.edges:
            return np.zeros(rows.shape[0], dtype=bool)
        srt = np.sort(rows, axis=1)
        ok = np.all((srt >= 0) & (srt < self.n), axis=1)
        if self.k > 1:
            ok &= np.all(srt[:, 1:] != srt[:, :-1], axis=1)
        codes = np.where(ok[:, None], srt, 0) @ (self.n ** np.arange(self.k, dtype=np.int64))
        table = self.edge_codes
        pos = np.searchsorted(table, codes)
        pos = np.minimum(pos, len(table) - 1)
        return ok & (table[pos] == codes)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def issubgraph(self, other: "Hypergraph") -> bool:
        return self.n == other.n and self.k == other.k and self.edges <= other.edges

    def without(self, removed: Iterable[Iterable[int]]) -> "Hypergraph":
        drop = {tuple(sorted(e)) for e in removed}
        return Hypergraph(self.n, self.k, self.edges - drop)

    def density(self) -> float:
        total = comb(self.n, self.k)
        return len(self.edges) / total if total else 0.0


def build(n: int, k: int, edge_list: Iterable[Iterable[int]]) -> Hypergraph:
    """Build a hypergraph, deduplicating edges given in any vertex order."""
    if n < 0:
        raise ValidationError(f"vertex count must be nonnegative, got {n}")
    if k < 1:
        raise ValidationError(f"uniformity must be at least 1, got {k}")
    edges = frozenset(_normalize_edge(e, n, k) for e in edge_list)
    return Hypergraph(n, k, edges)


def complete(n: int, k: int) -> Hypergraph:
    if k < 1 or k > n:
        raise ValidationError(f"complete hypergraph needs 1 <= k <= n, got n={n}, k={k}")
    return Hypergraph(n, k, frozenset(combinations(range(n), k)))


def empty(n: int, k: int) -> Hypergraph:
    return Hypergraph(n, k, frozenset())


def random_gnp(n: int, k: int, p: float, seed: int | np.random.SeedSequence | None) -> Hypergraph:
    """Binomial random k-uniform hypergraph G^(k)(n, p).

    Every k-subset is tested once, in lexicographic order, against one
    uniform draw of a generator seeded with ``seed``; the result therefore
    depends only on ``(n, k, p, seed)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"edge probability must lie in [0, 1], got {p}")
    if k < 1 or k > n:
        raise ValidationError(f"random hypergraph needs 1 <= k <= n, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    total = comb(n, k)
    keep = rng.random(total) < p
    if not keep.any():
        return Hypergraph(n, k, frozenset())
    kept = [e for e, flag in zip(combinations(range(n), k), keep) if flag]
    return Hypergraph(n, k, frozenset(kept))


def format_hypergraph(H: Hypergraph) -> str:
    """Canonical text form: header ``n k m`` then one sorted edge per line."""
    out = io.StringIO()
    out.write(f"{H.n} {H.k} {len(H.edges)}\n")
    for e in H.sorted_edges():
        out.write(" ".join(str(v) for v in e))
        out.write("\n")
    return out.getvalue()


def parse_hypergraph(text: str) -> Hypergraph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValidationError("hypergraph file has no header line")
    try:
        n, k, m = (int(tok) for tok in lines[0].split())
    except ValueError:
        raise ValidationError(f"bad header line {lines[0]!r}; expected 'n k m'") from None
    body = lines[1:]
    if len(body) != m:
        raise ValidationError(f"header announces {m} edges but file lists {len(body)}")
    edges = []
    for ln in body:
        try:
            verts = [int(tok) for tok in ln.split()]
        except ValueError:
            raise ValidationError(f"bad edge line {ln!r}") from None
        if any(b <= a for a, b in zip(verts, verts[1:])):
            raise ValidationError(f"edge line {ln!r} is not strictly increasing")
        edges.append(verts)
    return build(n, k, edges)


def read_hypergraph(path: str | os.PathLike) -> Hypergraph:
    with open(path, encoding="utf-8") as fh:
        return parse_hypergraph(fh.read())


def write_hypergraph(H: Hypergraph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_hypergraph(H))
