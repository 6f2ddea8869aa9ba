"""Finite coordinate algebras, energy increment and removal experiments.

A :class:`CoordinatePartitionFamily` assigns to each index set ``I`` in a
family a partition of the ``I``-tuples into cells (a label table of shape
``(n,) * |I|``).  The atoms it induces on ``V``-tuples are the
intersections of one cell per ``I``; conditional expectation averages a
function over each atom with respect to a :class:`RelativeMeasure`.
"""

from __future__ import annotations

import heapq
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from statistics import median
from typing import Mapping, Sequence

import numpy as np

from .counting import count_hom, image_edges, iter_homs, strip_isolated
from .errors import ValidationError
from .functions import TupleFunction
from .hypergraph import Edge, Hypergraph, complete, random_gnp
from .measures import RelativeMeasure, encode_rows
from .templates import index_name, sort_indices

# level-set thresholds for witness cylinders
THRESHOLDS = tuple(j / 16 for j in range(1, 16))


@dataclass(frozen=True, eq=False)
class CoordinatePartitionFamily:
    n: int
    cells: Mapping[tuple, np.ndarray]

    def __post_init__(self):
        cells = {}
        for I, labels in self.cells.items():
            I = sort_indices(I)
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (self.n,) * len(I):
                raise ValidationError(f"cell table for {I} has shape {labels.shape}")
            # relabel cells 0..c-1 in first-occurrence order
            _, first, inv = np.unique(labels.ravel(), return_index=True, return_inverse=True)
            rank = np.argsort(np.argsort(first))
            cells[I] = rank[inv.ravel()].reshape(labels.shape)
        object.__setattr__(self, "cells", cells)

    @property
    def family(self) -> list[tuple]:
        return list(self.cells)

    def cell_counts(self) -> dict[tuple, int]:
        return {I: int(t.max()) + 1 if t.size else 0 for I, t in self.cells.items()}

    def atoms(self, columns: Mapping, size: int) -> np.ndarray:
        """``(size, |family|)`` array of cell labels, one column per index set."""
        out = np.zeros((size, len(self.cells)), dtype=np.int64)
        for j, (I, table) in enumerate(self.cells.items()):
            if I:
                out[:, j] = table[tuple(np.asarray(columns[i]) for i in I)]
        return out

    def refine(self, I: tuple, mask: np.ndarray) -> "CoordinatePartitionFamily":
        """Split every cell of ``I`` along a boolean table on ``I``-tuples."""
        I = sort_indices(I)
        cells = dict(self.cells)
        cells[I] = cells[I] * 2 + np.asarray(mask, dtype=np.int64)
        return CoordinatePartitionFamily(self.n, cells)

    def to_dict(self) -> dict:
        return {",".join(index_name(i) for i in I): {"cells": c}
                for I, c in self.cell_counts().items()}


def trivial_partition(n: int, family: Sequence) -> CoordinatePartitionFamily:
    return CoordinatePartitionFamily(n, {sort_indices(I): np.zeros((n,) * len(I), dtype=np.int64)
                                         for I in family})


def singleton_partition(n: int, family: Sequence) -> CoordinatePartitionFamily:
    cells = {}
    for I in family:
        I = sort_indices(I)
        cells[I] = np.arange(n ** len(I), dtype=np.int64).reshape((n,) * len(I))
    return CoordinatePartitionFamily(n, cells)


def vertex_partition(n: int, family: Sequence, blocks: Sequence[Sequence[int]]) -> CoordinatePartitionFamily:
    """Partition each coordinate of every index set by the same vertex blocks."""
    label = np.full(n, -1, dtype=np.int64)
    for b, block in enumerate(blocks):
        label[list(block)] = b
    if (label < 0).any():
        raise ValidationError("vertex blocks must cover every vertex")
    cells = {}
    for I in family:
        I = sort_indices(I)
        grids = np.meshgrid(*([label] * len(I)), indexing="ij") if I else []
        code = np.zeros((n,) * len(I), dtype=np.int64)
        for g in grids:
            code = code * len(blocks) + g
        cells[I] = code
    return CoordinatePartitionFamily(n, cells)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """A function constant on the atoms of a partition family."""

    partition: CoordinatePartitionFamily
    values: Mapping[tuple, float]

    def evaluate(self, columns: Mapping, size: int) -> np.ndarray:
        atoms = self.partition.atoms(columns, size)
        return np.array([self.values.get(tuple(a), 0.0) for a in atoms.tolist()], dtype=float)

    def on_support(self, m: RelativeMeasure) -> np.ndarray:
        return self.evaluate(m.columns(), m.support.shape[0])

    def to_tuple_function(self) -> TupleFunction:
        dep = sort_indices({i for I in self.partition.cells for i in I})
        n = self.partition.n
        grid = np.indices((n,) * len(dep)).reshape(len(dep), -1)
        cols = {i: grid[p] for p, i in enumerate(dep)}
        vals = self.evaluate(cols, grid.shape[1]).reshape((n,) * len(dep))
        return TupleFunction(dep, vals)


def _group(atoms: np.ndarray):
    if atoms.shape[1] == 0:
        return np.zeros(atoms.shape[0], dtype=np.int64), np.zeros((1, 0), dtype=np.int64)
    uniq, inv = np.unique(atoms, axis=0, return_inverse=True)
    return inv.ravel(), uniq


def _support_values(m: RelativeMeasure, f) -> np.ndarray:
    if isinstance(f, StepFunction):
        return f.on_support(m)
    return m.evaluate(f)


def conditional_expectation(m: RelativeMeasure, f, P: CoordinatePartitionFamily) -> StepFunction:
    """Average of ``f`` over each atom of ``P`` within the support of ``m``.

    Atoms meeting no support point get value 0.
    """
    for I in P.cells:
        if not set(I) <= m.template.free | set(m.params):
            raise ValidationError(f"partition index set {I} is not inside V and W")
    vals = _support_values(m, f)
    N = vals.shape[0]
    if N == 0:
        return StepFunction(P, {})
    inv, uniq = _group(P.atoms(m.columns(), N))
    sums = np.bincount(inv, weights=vals, minlength=len(uniq))
    counts = np.bincount(inv, minlength=len(uniq))
    return StepFunction(P, {tuple(a): float(s / c) for a, s, c in zip(uniq.tolist(), sums, counts)})


def energy(m: RelativeMeasure, f, P: CoordinatePartitionFamily) -> float:
    """Squared L2 norm of the projection of ``f`` onto ``P``."""
    g = conditional_expectation(m, f, P).on_support(m)
    return math.fsum(g * g) / g.size if g.size else 0.0


@dataclass
class RegularizationResult:
    partition: CoordinatePartitionFamily
    rounds: int
    energies: list[float]
    achieved_eps: float
    converged: bool

    def to_dict(self) -> dict:
        return {"rounds": self.rounds, "energies": self.energies,
                "achieved_eps": self.achieved_eps, "converged": self.converged,
                "cells": self.partition.to_dict()}


def _best_witness(m: RelativeMeasure, resid: np.ndarray, P: CoordinatePartitionFamily):
    """The strongest level-set cylinder: ``(|integral|, I, mask on I-tuples)``."""
    N = resid.size
    best = (0.0, None, None)
    n = m.n
    for I in P.cells:
        if not I:
            continue
        cols = [m.columns()[i] for i in I]
        rows = np.stack([np.broadcast_to(c, (N,)) for c in cols], axis=1)
        codes = encode_rows(rows, n)
        sums = np.bincount(codes, weights=resid, minlength=n ** len(I))
        counts = np.bincount(codes, minlength=n ** len(I))
        seen = counts > 0
        avg = np.where(seen, sums / np.maximum(counts, 1), 0.0)
        for t in THRESHOLDS:
            for sign in (1.0, -1.0):
                member = seen & (sign * avg >= t)
                if not member.any():
                    continue
                value = abs(math.fsum(sums[member])) / N
                if value > best[0]:
                    # codes use little-endian digits; the table is indexed (x_I0, x_I1, ...)
                    mask = member.reshape((n,) * len(I), order="F")
                    best = (value, I, mask)
    return best


def energy_increment(m: RelativeMeasure, f, family: Sequence, eps: float,
                     initial: CoordinatePartitionFamily | None = None,
                     max_rounds: int | None = None) -> RegularizationResult:
    """Refine a partition family until no witness cylinder sees ``f`` beyond ``eps``.

    Witnesses are level sets ``{avg_I >= t}`` and ``{avg_I <= -t}`` of the
    per-``I`` averages of the residual ``f - E(f|P)``, ``t = j/16``.  Each
    refinement by a witness with ``|integral(resid * chi_B)| > eps`` raises
    the energy by more than ``eps**2``, so with ``|f| <= 1`` the loop stops
    within ``ceil(eps**-2)`` rounds.  Hitting ``max_rounds`` returns the
    partial partition with ``converged=False``.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    P = initial if initial is not None else trivial_partition(m.n, family)
    limit = max_rounds if max_rounds is not None else math.ceil(eps ** -2)
    energies = [energy(m, f, P)]
    vals = _support_values(m, f)
    rounds = 0
    while True:
        resid = vals - conditional_expectation(m, f, P).on_support(m)
        if resid.size == 0:
            return RegularizationResult(P, rounds, energies, 0.0, True)
        value, I, mask = _best_witness(m, resid, P)
        if value <= eps:
            return RegularizationResult(P, rounds, energies, value, True)
        if rounds >= limit:
            return RegularizationResult(P, rounds, energies, value, False)
        P = P.refine(I, mask)
        rounds += 1
        energies.append(energy(m, f, P))


def _validate_removal(K: Hypergraph, A: Hypergraph, gamma: Hypergraph | None) -> None:
    if K.k != A.k:
        raise ValidationError("pattern and host must have the same uniformity")
    if gamma is not None and not A.issubgraph(gamma):
        raise ValidationError("A must be a subgraph of gamma")


class _HomIndex:
    """Live homomorphisms of a pattern core, indexed by the host edges they use."""

    def __init__(self, core: Hypergraph, A: Hypergraph):
        self.homs = [(h, image_edges(core, h)) for h in iter_homs(core, A)]
        self.homs.sort()
        self.alive = [True] * len(self.homs)
        self.live = len(self.homs)
        self.by_edge: dict[Edge, list[int]] = {}
        for j, (_, edges) in enumerate(self.homs):
            for e in edges:
                self.by_edge.setdefault(e, []).append(j)
        self.load = {e: len(js) for e, js in self.by_edge.items()}

    def delete(self, e: Edge) -> int:
        killed = 0
        for j in self.by_edge.get(e, ()):
            if self.alive[j]:
                self.alive[j] = False
                killed += 1
                for other in self.homs[j][1]:
                    self.load[other] -= 1
        self.live -= killed
        return killed


def greedy_removal(K: Hypergraph, A: Hypergraph, gamma: Hypergraph | None = None,
                   max_removals: int | None = None) -> list[Edge]:
    """Delete edges of ``A`` until no copy of ``K`` survives.

    Each step removes the edge lying in the most surviving homomorphisms,
    the lexicographically smallest on ties.  Returns the removed edges in
    order.  Stops early only when ``max_removals`` is reached.
    """
    _validate_removal(K, A, gamma)
    core, _ = strip_isolated(K)
    idx = _HomIndex(core, A)
    return _greedy(idx, max_removals)


def _greedy(idx: _HomIndex, max_removals: int | None) -> list[Edge]:
    heap = [(-c, e) for e, c in idx.load.items() if c > 0]
    heapq.heapify(heap)
    removed = []
    while idx.live > 0 and heap:
        if max_removals is not None and len(removed) >= max_removals:
            break
        c, e = heapq.heappop(heap)
        if -c != idx.load[e]:
            if idx.load[e] > 0:
                heapq.heappush(heap, (-idx.load[e], e))
            continue
        idx.delete(e)
        removed.append(e)
    return removed


@dataclass
class RemovalConfig:
    n: int
    k: int
    p: float
    pattern: Hypergraph
    delta: float
    epsilon: float
    trials: int
    seed: int
    thin: float = 0.5
    dense: bool = False

    def __post_init__(self):
        if self.pattern.k != self.k:
            raise ValidationError("pattern uniformity differs from k")
        if not 0 <= self.p <= 1 or not 0 <= self.thin <= 1:
            raise ValidationError("p and thin must lie in [0, 1]")
        if self.delta < 0 or self.epsilon < 0 or self.trials < 1:
            raise ValidationError("delta and epsilon must be nonnegative, trials positive")

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "p": self.p, "delta": self.delta,
                "epsilon": self.epsilon, "trials": self.trials, "seed": self.seed,
                "thin": self.thin, "dense": self.dense,
                "pattern": {"n": self.pattern.n, "k": self.pattern.k,
                            "edges": [list(e) for e in self.pattern.sorted_edges()]}}


def suppress_copies(K: Hypergraph, gamma: Hypergraph, A: Hypergraph, delta: float) -> Hypergraph:
    """Delete one edge per surviving copy of ``K`` until the relative density drops below ``delta``.

    Copies are scanned in lexicographic order of their vertex maps and the
    smallest edge of each surviving copy is removed.
    """
    core, iso = strip_isolated(K)
    total = count_hom(core, gamma)
    idx = _HomIndex(core, A)
    edges = set(A.edges)
    for j, (_, used) in enumerate(idx.homs):
        if total == 0 or Fraction(idx.live, total) < Fraction(str(delta)):
            break
        if idx.alive[j]:
            idx.delete(used[0])
            edges.discard(used[0])
    return Hypergraph(A.n, A.k, frozenset(edges))


def _run_trial(args) -> dict:
    cfg, t, timing = args
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(t,))
    g_seed, a_seed = ss.spawn(2)
    start = time.perf_counter()
    if cfg.dense or cfg.p == 1.0:
        gamma = complete(cfg.n, cfg.k)
    else:
        gamma = random_gnp(cfg.n, cfg.k, cfg.p, g_seed)
    row: dict = {"trial": t, "gamma_edges": len(gamma)}
    if len(gamma) == 0:
        row.update({"empty_gamma": True, "a_edges": 0, "hom_before": 0, "hom_after": 0,
                    "removed": 0, "removed_fraction": 0.0, "within_epsilon": True,
                    "relative_density": 0.0})
        return row
    rng = np.random.default_rng(a_seed)
    ordered = gamma.sorted_edges()
    keep = rng.random(len(ordered)) < cfg.thin
    thinned = Hypergraph(cfg.n, cfg.k, frozenset(e for e, f in zip(ordered, keep) if f))
    A = suppress_copies(cfg.pattern, gamma, thinned, cfg.delta)
    core, iso = strip_isolated(cfg.pattern)
    idx = _HomIndex(core, A)
    scale = cfg.n ** iso
    total = count_hom(core, gamma)
    hom_before = idx.live * scale
    removed = _greedy(idx, None)
    hom_after = count_hom(core, A.without(removed)) * scale
    row.update({
        "a_edges": len(A),
        "relative_density": float(Fraction(hom_before, total * scale)) if total else 0.0,
        "hom_before": hom_before,
        "hom_after": hom_after,
        "removed": len(removed),
        "removed_fraction": len(removed) / len(gamma),
        "within_epsilon": len(removed) <= cfg.epsilon * len(gamma),
    })
    if timing:
        row["runtime_s"] = time.perf_counter() - start
    return row


def removal_experiment(cfg: RemovalConfig, workers: int = 1, timing: bool = True) -> dict:
    """Run ``cfg.trials`` independent removal trials and summarize them."""
    args = [(cfg, t, timing) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_trial, args))
    else:
        rows = [_run_trial(a) for a in args]
    fracs = [r["removed_fraction"] for r in rows]
    summary = {
        "trials": len(rows),
        "all_hom_zero": all(r["hom_after"] == 0 for r in rows),
        "fraction_within_epsilon": sum(r["within_epsilon"] for r in rows) / len(rows),
        "removed_fraction_mean": math.fsum(fracs) / len(fracs),
        "removed_fraction_median": median(fracs),
        "removed_fraction_max": max(fracs),
        "never_exceeds_A": all(r["removed"] <= r["a_edges"] for r in rows),
    }
    flags = [f"trial {r['trial']}: empty gamma" for r in rows if r.get("empty_gamma")]
    return {"config": cfg.to_dict(), "trials": rows, "summary": summary, "flags": flags}
