"""Bounded real functions of index tuples.

A :class:`TupleFunction` is tabulated on its dependence set: ``table`` has
one axis of length ``n`` per dependence index, in the order of
``dependence``.  Evaluating on a batch of assignments is a single fancy
index into the table, and the value can only depend on the restriction
of an assignment to ``dependence``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping

import numpy as np

from .errors import ValidationError
from .hypergraph import Hypergraph
from .templates import Index, index_name, sort_indices


@dataclass(frozen=True, eq=False)
class TupleFunction:
    dependence: tuple
    table: np.ndarray
    declared_bound: float | None = None

    def __post_init__(self):
        dep = tuple(self.dependence)
        if len(set(dep)) != len(dep):
            raise ValidationError("dependence indices must be distinct")
        table = np.asarray(self.table, dtype=float)
        if table.ndim != len(dep):
            raise ValidationError(f"table has {table.ndim} axes for {len(dep)} dependence indices")
        if len(set(table.shape)) > 1:
            raise ValidationError(f"table axes must all have length n, got shape {table.shape}")
        if not np.all(np.isfinite(table)):
            raise ValidationError("tuple functions must be finite everywhere")
        if self.declared_bound is not None and np.any(np.abs(table) > self.declared_bound):
            raise ValidationError("table exceeds the declared bound")
        object.__setattr__(self, "dependence", dep)
        object.__setattr__(self, "table", table)

    @property
    def n(self) -> int | None:
        return self.table.shape[0] if self.table.ndim else None

    @property
    def bound(self) -> float:
        if self.declared_bound is not None:
            return self.declared_bound
        return float(np.max(np.abs(self.table))) if self.table.size else 0.0

    def __repr__(self) -> str:
        dep = ",".join(index_name(i) for i in self.dependence)
        return f"TupleFunction(dep=({dep}), n={self.n})"

    def evaluate(self, columns: Mapping[Index, np.ndarray | int], size: int | None = None) -> np.ndarray:
        """Values on a batch of assignments given column-wise.

        ``columns`` maps each index to an integer array (or a scalar, which
        is broadcast); indices outside ``dependence`` are ignored.
        """
        missing = [i for i in self.dependence if i not in columns]
        if missing:
            raise ValidationError(f"assignment lacks dependence indices {[index_name(i) for i in missing]}")
        if not self.dependence:
            return np.full(size if size is not None else 1, float(self.table))
        cols = np.broadcast_arrays(*(np.asarray(columns[i], dtype=np.int64) for i in self.dependence))
        out = self.table[tuple(cols)]
        if size is not None and out.shape != (size,):
            out = np.broadcast_to(out, (size,)).copy()
        return out

    def __call__(self, assignment: Mapping[Index, int]) -> float:
        if not self.dependence:
            return float(self.table)
        return float(self.table[tuple(int(assignment[i]) for i in self.dependence)])

    def rename(self, mapping: Mapping[Index, Index]) -> "TupleFunction":
        dep = tuple(mapping.get(i, i) for i in self.dependence)
        return TupleFunction(dep, self.table, self.declared_bound)

    def expand(self, dependence: tuple, n: int) -> np.ndarray:
        """The table broadcast onto a larger dependence tuple."""
        extra = [i for i in self.dependence if i not in dependence]
        if extra:
            raise ValidationError(f"cannot expand onto a tuple missing {extra}")
        if self.table.ndim and self.n != n:
            raise ValidationError(f"function tabulated for n={self.n}, expected n={n}")
        if not self.dependence:
            return np.full((n,) * len(dependence), float(self.table))
        # move our axes into the target positions, then broadcast the rest
        positions = [dependence.index(i) for i in self.dependence]
        order = np.argsort(positions)
        t = np.transpose(self.table, order)
        shape = [1] * len(dependence)
        for p in sorted(positions):
            shape[p] = n
        return np.broadcast_to(t.reshape(shape), (n,) * len(dependence))

    def _combine(self, other, op) -> "TupleFunction":
        if isinstance(other, (int, float, np.floating, np.integer)):
            return TupleFunction(self.dependence, op(self.table, float(other)))
        if not isinstance(other, TupleFunction):
            return NotImplemented
        n = self.n if self.n is not None else other.n
        if n is None:
            return TupleFunction((), op(self.table, other.table))
        dep = sort_indices(set(self.dependence) | set(other.dependence))
        return TupleFunction(dep, op(self.expand(dep, n), other.expand(dep, n)))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: np.subtract(b, a))

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return TupleFunction(self.dependence, -self.table)


def constant(c: float) -> TupleFunction:
    return TupleFunction((), np.array(float(c)))


def from_array(dependence, table) -> TupleFunction:
    return TupleFunction(tuple(dependence), np.asarray(table, dtype=float))


def from_callable(n: int, dependence, fn: Callable[[dict], float]) -> TupleFunction:
    """Tabulate ``fn`` (called on a dict assignment) over all of ``[n]^dependence``."""
    dep = tuple(dependence)
    table = np.empty((n,) * len(dep))
    for verts in product(range(n), repeat=len(dep)):
        table[verts] = fn(dict(zip(dep, verts)))
    return TupleFunction(dep, table)


def edge_indicator(graph: Hypergraph, indices) -> TupleFunction:
    """``x -> 1`` when the images of ``indices`` form an edge of ``graph``."""
    dep = tuple(indices)
    if len(dep) != graph.k:
        raise ValidationError(f"edge indicator needs {graph.k} indices, got {len(dep)}")
    n = graph.n
    grid = np.indices((n,) * graph.k).reshape(graph.k, -1).T
    table = graph.contains_rows(grid).astype(float).reshape((n,) * graph.k)
    return TupleFunction(dep, table)


def cylinder(n: int, index: Index, vertex: int) -> TupleFunction:
    """Indicator of ``x_index == vertex``."""
    if not 0 <= vertex < n:
        raise ValidationError(f"vertex {vertex} outside [0, {n})")
    table = np.zeros(n)
    table[vertex] = 1.0
    return TupleFunction((index,), table)


def indicator_of(dependence, mask) -> TupleFunction:
    """Indicator of a set given as a boolean table over ``dependence``."""
    return TupleFunction(tuple(dependence), np.asarray(mask, dtype=bool).astype(float))
