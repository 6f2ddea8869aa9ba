"""Relative counting measures on a finite hypergraph.

For a template ``(V, W, E)``, a host graph ``G`` and parameter values
``x_W``, the support is the set of ``V``-tuples ``x_V`` for which every
edge of ``E`` lands on an edge of ``G`` under ``x_V | x_W``; the measure is
uniform on the support and identically zero when the support is empty.

Only edges meeting ``V`` constrain ``x_V``.  Edges lying inside ``W``
constrain the parameters and are assumed to hold for the ``x_W`` the caller
supplies (this is what makes a dummy parameter inert).

Counts are exact integers, set measures are :class:`fractions.Fraction`
and integrals are correctly rounded float sums (``math.fsum``), so results
do not depend on evaluation order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from ._search import count_assignments, enumerate_assignments
from .errors import ValidationError
from .functions import TupleFunction
from .hypergraph import Hypergraph
from .templates import Index, Template, index_name, restrict, sort_indices

Predicate = Union[TupleFunction, Callable[[dict], np.ndarray]]


def encode_rows(rows: np.ndarray, n: int) -> np.ndarray:
    """Injective integer code of each row (base-``n`` digits)."""
    if rows.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=np.int64)
    if max(n, 1) ** rows.shape[1] >= 2**62:
        raise ValidationError("tuple too long to encode; reduce the index set")
    weights = max(n, 1) ** np.arange(rows.shape[1], dtype=np.int64)
    return rows @ weights


class RelativeMeasure:
    """The uniform measure on the support of a template over a graph."""

    def __init__(self, graph: Hypergraph, template: Template,
                 params: Mapping[Index, int] | None = None):
        params = dict(params or {})
        if template.k is not None and template.k != graph.k:
            raise ValidationError(f"template is {template.k}-uniform, graph is {graph.k}-uniform")
        if set(params) != set(template.params):
            raise ValidationError(
                f"parameter values given for {sorted(map(index_name, params))}, "
                f"template expects {sorted(map(index_name, template.params))}")
        for i, v in params.items():
            if not 0 <= int(v) < graph.n:
                raise ValidationError(f"parameter {index_name(i)} = {v} is not a vertex")
        self.graph = graph
        self.template = template
        self.params = {i: int(v) for i, v in params.items()}
        self.order: tuple = sort_indices(template.free)
        pos = {i: p for p, i in enumerate(self.order)}
        self._constraints = []
        for e in template.active_edges():
            vars_ = tuple(pos[i] for i in e if i in pos)
            fixed = tuple(self.params[i] for i in e if i not in pos)
            self._constraints.append((vars_, fixed))

    def __repr__(self) -> str:
        return (f"RelativeMeasure(V={[index_name(i) for i in self.order]}, "
                f"W={ {index_name(i): v for i, v in self.params.items()} }, "
                f"|E|={len(self.template.edges)}, graph={self.graph!r})")

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def support(self) -> np.ndarray:
        """Support points as an ``(N, |V|)`` array, columns in :attr:`order`."""
        rows = enumerate_assignments(self.graph, len(self.order), self._constraints)
        rows.setflags(write=False)
        return rows

    def support_count(self, workers: int = 1) -> int:
        if "support" in self.__dict__:
            return int(self.support.shape[0])
        return count_assignments(self.graph, len(self.order), self._constraints, workers)

    def columns(self, rows: np.ndarray | None = None) -> dict:
        """Column view of ``rows`` (default: the support) plus the parameters."""
        rows = self.support if rows is None else rows
        cols: dict = {i: rows[:, p] for p, i in enumerate(self.order)}
        cols.update(self.params)
        return cols

    def evaluate(self, f: TupleFunction) -> np.ndarray:
        scope = self.template.scope
        stray = [i for i in f.dependence if i not in scope]
        if stray:
            raise ValidationError(
                f"function depends on {[index_name(i) for i in stray]}, outside V and W")
        return f.evaluate(self.columns(), self.support.shape[0])

    def indicator(self, S: Predicate) -> np.ndarray:
        """Boolean membership of each support point in ``S``."""
        if isinstance(S, TupleFunction):
            return self.evaluate(S) != 0
        mask = np.asarray(S(self.columns()), dtype=bool)
        return np.broadcast_to(mask, (self.support.shape[0],))

    def measure_of_set(self, S: Predicate) -> Fraction:
        N = self.support.shape[0]
        if N == 0:
            return Fraction(0)
        return Fraction(int(np.count_nonzero(self.indicator(S))), N)

    def integrate(self, f: TupleFunction) -> float:
        N = self.support.shape[0]
        if N == 0:
            return 0.0
        return math.fsum(self.evaluate(f)) / N

    def restrict(self, V0: Iterable[Index]) -> "RelativeMeasure":
        """The measure on ``V0``-tuples, keeping edges inside ``V0 | W``."""
        return RelativeMeasure(self.graph, restrict(self.template, V0), self.params)

    def slice_at(self, assignment: Mapping[Index, int]) -> "RelativeMeasure":
        """Fix some free indices as extra parameters.

        Edges that the assignment turns into parameter-only edges would no
        longer be checked, so the assignment must satisfy them.
        """
        fixed = frozenset(assignment)
        if not fixed <= self.template.free:
            raise ValidationError("slice assignment must fix free indices only")
        T = self.template
        values = {**self.params, **assignment}
        for e in T.edges:
            if e & fixed and e <= fixed | T.params:
                if not self.graph.contains_edge(values[i] for i in e):
                    raise ValidationError(
                        f"assignment violates edge {[index_name(i) for i in sort_indices(e)]}")
        sliced = Template(T.free - fixed, T.params | fixed, T.edges, T.k, T.size_bound)
        return RelativeMeasure(self.graph, sliced, {**self.params, **assignment})


def support_count(m: RelativeMeasure, workers: int = 1) -> int:
    return m.support_count(workers)


def measure_of_set(m: RelativeMeasure, S: Predicate) -> Fraction:
    return m.measure_of_set(S)


def integrate(m: RelativeMeasure, f: TupleFunction) -> float:
    return m.integrate(f)


def _check_partition(m: RelativeMeasure, V0, V1) -> tuple[frozenset, frozenset]:
    V0, V1 = frozenset(V0), frozenset(V1)
    if V0 & V1 or (V0 | V1) != m.template.free:
        raise ValidationError(
            f"{sort_indices(V0)} and {sort_indices(V1)} do not partition the free indices "
            f"{sort_indices(m.template.free)}")
    return V0, V1


def _slices(m: RelativeMeasure, V0: frozenset):
    """Group support points by their ``V0`` part: (inverse labels, group sizes)."""
    cols = [m.order.index(i) for i in sort_indices(V0)]
    codes = encode_rows(m.support[:, cols], m.n)
    _, inverse, sizes = np.unique(codes, return_inverse=True, return_counts=True)
    return inverse.ravel(), sizes


def iterated_integrate(m: RelativeMeasure, V0, V1, f: TupleFunction) -> float:
    """Integrate ``f`` over each ``V1``-slice, then over the ``V0`` marginal.

    The outer measure is the restriction to ``V0``; outer points whose slice
    is empty contribute 0.
    """
    V0, V1 = _check_partition(m, V0, V1)
    if not V0 or not V1:
        return m.integrate(f)
    N0 = m.restrict(V0).support_count()
    if N0 == 0 or m.support.shape[0] == 0:
        return 0.0
    vals = m.evaluate(f)
    inverse, sizes = _slices(m, V0)
    # order-independent per-slice sums, then an exact final sum
    order = np.argsort(inverse, kind="stable")
    bounds = np.concatenate(([0], np.cumsum(sizes)))
    sorted_vals = vals[order]
    inner = [math.fsum(sorted_vals[bounds[g]:bounds[g + 1]]) / sizes[g] for g in range(len(sizes))]
    return math.fsum(inner) / N0


def fubini_weights(m: RelativeMeasure, V0, V1) -> tuple[int, int, np.ndarray, np.ndarray]:
    """``(N, N0, inverse, sizes)``: direct count, outer count and the slice grouping."""
    V0, V1 = _check_partition(m, V0, V1)
    N = m.support.shape[0]
    N0 = m.restrict(V0).support_count() if V0 else 1
    if N == 0:
        return 0, N0, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if not V0:
        return N, 1, np.zeros(N, dtype=np.int64), np.array([N])
    inverse, sizes = _slices(m, V0)
    return N, N0, inverse, sizes


def fubini_worst_deviation(m: RelativeMeasure, V0, V1) -> tuple[Fraction, int]:
    """Largest gap between a set's measure and its iterated measure.

    Over all ``A`` inside the support, ``mu(A) - iterated(A)`` is the sum over
    points of ``A`` of ``w1 - w2``, where ``w1 = 1/N`` is the direct weight
    and ``w2 = 1/(N0 * slice size)`` the iterated one.  The supremum of its
    absolute value is therefore the larger of the positive-part and
    negative-part sums.  Returns that value exactly, with the size of a set
    attaining it.
    """
    N, N0, _, sizes = fubini_weights(m, V0, V1)
    if N == 0:
        return Fraction(0), 0
    pos = neg = Fraction(0)
    pos_size = neg_size = 0
    values, multiplicity = np.unique(sizes, return_counts=True)
    for s, c in zip(values.tolist(), multiplicity.tolist()):
        gap = Fraction(1, N) - Fraction(1, N0 * s)
        mass = c * s
        if gap > 0:
            pos += mass * gap
            pos_size += mass
        elif gap < 0:
            neg -= mass * gap
            neg_size += mass
    if pos >= neg:
        return pos, pos_size
    return neg, neg_size
