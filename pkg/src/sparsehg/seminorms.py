"""Gowers-type uniformity seminorms relative to a :class:`RelativeMeasure`.

The box integral over an index set ``I`` averages, over the support of the
doubled template, the product of one face function per corner
``omega in {0,1}^I``; the face for ``omega`` reads ``x_i`` from copy
``omega(i)`` for ``i`` in ``I`` and the shared coordinates elsewhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .errors import InconsistencyError, ValidationError
from .functions import TupleFunction
from .measures import RelativeMeasure
from .templates import Copy, IndexFamily, double, index_name, sort_indices

# radicands in (-CLAMP, 0) are rounding noise and are clamped to zero
CLAMP = 1e-12


class EmptyDoubledSupportWarning(UserWarning):
    """The doubled measure has empty support although the base one does not."""


@dataclass
class CubeSystem:
    """A base measure together with its doubling along ``cube``."""

    base: RelativeMeasure
    cube: tuple = field(default=())

    def __post_init__(self):
        cube = sort_indices(self.cube)
        if not set(cube) <= self.base.template.free:
            raise ValidationError("cube indices must be free indices of the base template")
        self.cube = cube
        self.doubled = RelativeMeasure(self.base.graph, double(self.base.template, cube),
                                       self.base.params)

    def corners(self) -> list[tuple[int, ...]]:
        return list(product((0, 1), repeat=len(self.cube)))

    def face(self, f: TupleFunction, omega: Sequence[int]) -> TupleFunction:
        """``f`` read at corner ``omega``: index ``i`` becomes ``Copy(i, omega_i)``."""
        return f.rename({i: Copy(i, b) for i, b in zip(self.cube, omega)})

    def empty_doubling(self) -> bool:
        return self.doubled.support.shape[0] == 0 and self.base.support_count() > 0


def _as_corner(omega, d: int) -> tuple[int, ...]:
    if isinstance(omega, int):
        return tuple((omega >> j) & 1 for j in range(d))
    return tuple(int(b) for b in omega)


def box_product(cs: CubeSystem, faces: Mapping) -> np.ndarray:
    """Product of the corner faces at every doubled support point."""
    d = len(cs.cube)
    table = {_as_corner(w, d): f for w, f in faces.items()}
    corners = cs.corners()
    missing = [w for w in corners if w not in table]
    if missing:
        raise ValidationError(f"no face given for corners {missing}")
    free = set(cs.base.template.free)
    cols = cs.doubled.columns()
    N = cs.doubled.support.shape[0]
    prod = np.ones(N)
    for w in corners:
        f = table[w]
        stray = [i for i in f.dependence if i not in free and i not in cs.base.params]
        if stray:
            raise ValidationError(f"face depends on {[index_name(i) for i in stray]}, outside V and W")
        prod *= cs.face(f, w).evaluate(cols, N)
    return prod


def box_integral(cs: CubeSystem, faces: Mapping) -> float:
    """Average of the corner-face product over the doubled support (0 if empty)."""
    prod = box_product(cs, faces)
    if prod.size == 0:
        if cs.empty_doubling():
            warnings.warn("doubled support is empty; box integral reported as 0",
                          EmptyDoubledSupportWarning, stacklevel=2)
        return 0.0
    return math.fsum(prod) / prod.size


def _root(radicand: float, d: int, what: str) -> float:
    if radicand < -CLAMP:
        raise InconsistencyError(f"{what}: box integral {radicand!r} is negative")
    return max(radicand, 0.0) ** (1.0 / 2**d)


def cube_system(m: RelativeMeasure, J) -> CubeSystem:
    """The cube system of ``m`` along ``J``, cached on the measure."""
    cache = m.__dict__.setdefault("_cubes", {})
    key = frozenset(J)
    if key not in cache:
        cache[key] = CubeSystem(m, tuple(J))
    return cache[key]


def gowers_norm_power(m: RelativeMeasure, f: TupleFunction, J) -> float:
    """The box integral of ``f`` over ``J`` (the norm raised to ``2^|J|``)."""
    cs = cube_system(m, J)
    return box_integral(cs, {w: f for w in cs.corners()})


def gowers_norm_partial(m: RelativeMeasure, f: TupleFunction, J) -> float:
    """``U^{V,J}``: doubles only ``J``, other coordinates stay shared.

    For ``J`` empty this is ``|integral of f|``.
    """
    J = frozenset(J)
    if not J <= m.template.free:
        raise ValidationError(f"{sort_indices(J - m.template.free)} are not free indices")
    if not J:
        return abs(m.integrate(f))
    radicand = gowers_norm_power(m, f, J)
    return _root(radicand, len(J), f"U^(V,{[index_name(i) for i in sort_indices(J)]})")


def gowers_norm(m: RelativeMeasure, f: TupleFunction) -> float:
    """``U^V``: the ``2^|V|``-th root of the full box integral of ``f``."""
    return gowers_norm_partial(m, f, m.template.free)


def gowers_multi_upper(m: RelativeMeasure, decomposition: Sequence[TupleFunction],
                       F: IndexFamily) -> float:
    """Upper bound for ``U^{V,F}`` of ``sum(decomposition)``.

    Each piece contributes the weighted geometric mean of its ``U^{V,J}``
    seminorms, ``J`` in ``F``, with weights ``2^|J|``.  A piece with some
    vanishing ``U^{V,J}`` contributes exactly 0.
    """
    if F.ground != m.template.free:
        raise ValidationError("family must live on the free indices of the measure")
    if not F.members:
        raise ValidationError("family must be nonempty")
    if not F.is_antichain():
        raise ValidationError("family must be an antichain")
    members = F.sorted()
    c = sum(2 ** len(J) for J in members)
    total = []
    for piece in decomposition:
        logs = []
        for J in members:
            value = gowers_norm_partial(m, piece, J)
            if value == 0.0:
                logs = None
                break
            logs.append(2 ** len(J) * math.log(value))
        total.append(0.0 if logs is None else math.exp(math.fsum(logs) / c))
    return math.fsum(total)
