"""Index-set calculus for templates and set families.

A template ``(V, W, E)`` names free indices ``V``, parameter indices ``W``
and a k-uniform hypergraph ``E`` on ``V | W`` listing which index k-sets
must land in the ambient graph.  Indices are arbitrary hashable labels
(ints or strings in practice); doubling an index set replaces each of its
members ``i`` by the two copies ``Copy(i, 0)`` and ``Copy(i, 1)``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from itertools import chain, combinations, product
from typing import Any, Hashable, Iterable, Iterator, NamedTuple

from .errors import ValidationError

Index = Hashable


class Copy(NamedTuple):
    """The ``bit``-th copy of index ``base`` in a doubled template."""

    base: Any
    bit: int

    def __str__(self) -> str:
        return f"{index_name(self.base)}^{self.bit}"


def index_key(i: Index) -> tuple:
    """Total order on indices: ints before strings, copies after their base."""
    bits: list[int] = []
    while isinstance(i, Copy):
        bits.append(i.bit)
        i = i.base
    if isinstance(i, bool) or not isinstance(i, (int, str)):
        base = (2, repr(i))
    elif isinstance(i, int):
        base = (0, i)
    else:
        base = (1, i)
    return (base, tuple(reversed(bits)))


def sort_indices(indices: Iterable[Index]) -> tuple:
    return tuple(sorted(indices, key=index_key))


def index_name(i: Index) -> str:
    return str(i)


def parse_index(token: Any) -> Index:
    """Inverse of :func:`index_name` for JSON input (``"a^0"`` is a copy)."""
    if isinstance(token, int) and not isinstance(token, bool):
        return token
    if not isinstance(token, str) or not token:
        raise ValidationError(f"index names must be nonempty strings or ints, got {token!r}")
    if "^" in token:
        base, _, bit = token.rpartition("^")
        if bit not in ("0", "1") or not base:
            raise ValidationError(f"bad copy suffix in index {token!r}")
        return Copy(parse_index(base), int(bit))
    return int(token) if token.lstrip("-").isdigit() else token


def _family_key(s: frozenset) -> tuple:
    return (len(s), tuple(index_key(i) for i in sort_indices(s)))


def subsets(ground: Iterable[Index]) -> Iterator[frozenset]:
    """All subsets of ``ground``, by size then lexicographically."""
    items = sort_indices(ground)
    for r in range(len(items) + 1):
        for c in combinations(items, r):
            yield frozenset(c)


@dataclass(frozen=True)
class Template:
    """Free indices, parameter indices and constraint edges.

    ``k`` may be omitted when ``edges`` is nonempty; ``size_bound`` caps the
    number of edges (``None`` means no cap).
    """

    free: frozenset
    params: frozenset = frozenset()
    edges: frozenset = frozenset()
    k: int | None = None
    size_bound: int | None = None

    def __post_init__(self):
        free = frozenset(self.free)
        params = frozenset(self.params)
        edges = frozenset(frozenset(e) for e in self.edges)
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "edges", edges)
        if free & params:
            raise ValidationError(f"free and parameter indices overlap: {sort_indices(free & params)}")
        sizes = {len(e) for e in edges}
        if len(sizes) > 1:
            raise ValidationError(f"edges have mixed arities {sorted(sizes)}")
        k = self.k
        if k is None and sizes:
            k = sizes.pop()
            object.__setattr__(self, "k", k)
        elif sizes and sizes != {k}:
            raise ValidationError(f"edges have arity {sizes.pop()}, template declares k={k}")
        if k is not None and k < 1:
            raise ValidationError(f"template uniformity must be at least 1, got {k}")
        scope = free | params
        for e in edges:
            if not e <= scope:
                raise ValidationError(f"edge {sort_indices(e)} uses indices outside V and W")
        if self.size_bound is not None and len(edges) > self.size_bound:
            raise ValidationError(f"template has {len(edges)} edges, above its size bound {self.size_bound}")

    @property
    def scope(self) -> frozenset:
        return self.free | self.params

    def sorted_edges(self) -> list[tuple]:
        return sorted((sort_indices(e) for e in self.edges),
                      key=lambda t: tuple(index_key(i) for i in t))

    def active_edges(self) -> list[tuple]:
        """Edges meeting a free index; only these constrain a free tuple."""
        return [e for e in self.sorted_edges() if any(i in self.free for i in e)]

    def with_params(self, params: Iterable[Index]) -> "Template":
        return Template(self.free, frozenset(params), self.edges, self.k, self.size_bound)

    def rename(self, mapping: dict) -> "Template":
        """Apply an injective relabeling of indices (missing keys stay put)."""
        f = lambda i: mapping.get(i, i)
        free = frozenset(map(f, self.free))
        params = frozenset(map(f, self.params))
        if len(free) != len(self.free) or len(params) != len(self.params) or free & params:
            raise ValidationError("relabeling is not injective on the template's indices")
        edges = frozenset(frozenset(map(f, e)) for e in self.edges)
        return Template(free, params, edges, self.k, self.size_bound)


def restrict(T: Template, V0: Iterable[Index]) -> Template:
    """Keep free indices ``V0`` and the edges inside ``V0 | W``."""
    V0 = frozenset(V0)
    if not V0 <= T.free:
        raise ValidationError(f"cannot restrict to {sort_indices(V0 - T.free)}: not free indices")
    keep = V0 | T.params
    edges = frozenset(e for e in T.edges if e <= keep)
    return Template(V0, T.params, edges, T.k, T.size_bound)


def double(T: Template, I: Iterable[Index]) -> Template:
    """Replace each index of ``I`` by two copies and each edge by its corner copies.

    An edge ``J`` becomes the ``2**|J & I|`` edges obtained by choosing a copy
    bit for every index of ``J & I``.  A size bound on ``T`` carries over and
    is enforced on the result.
    """
    I = frozenset(I)
    if not I <= T.free:
        raise ValidationError(f"cannot double {sort_indices(I - T.free)}: not free indices")
    if not I:
        return T
    free = (T.free - I) | {Copy(i, b) for i in I for b in (0, 1)}
    edges = set()
    for J in T.edges:
        doubled = sort_indices(J & I)
        rest = J - I
        for bits in product((0, 1), repeat=len(doubled)):
            edges.add(rest | {Copy(i, b) for i, b in zip(doubled, bits)})
    return Template(free, T.params, frozenset(edges), T.k, T.size_bound)


def template_to_dict(T: Template) -> dict:
    out = {
        "free": [index_name(i) for i in sort_indices(T.free)],
        "params": [index_name(i) for i in sort_indices(T.params)],
        "edges": [[index_name(i) for i in e] for e in T.sorted_edges()],
    }
    if T.k is not None:
        out["k"] = T.k
    if T.size_bound is not None:
        out["size_bound"] = T.size_bound
    return out


def template_from_dict(data: dict) -> Template:
    if not isinstance(data, dict) or "free" not in data:
        raise ValidationError("template object needs at least a 'free' field")
    try:
        free = [parse_index(t) for t in data["free"]]
        params = [parse_index(t) for t in data.get("params", [])]
        edges = [frozenset(parse_index(t) for t in e) for e in data.get("edges", [])]
    except TypeError:
        raise ValidationError("template fields must be lists") from None
    if len(set(free)) != len(free) or len(set(params)) != len(params):
        raise ValidationError("duplicate index names in template")
    for e, raw in zip(edges, data.get("edges", [])):
        if len(e) != len(raw):
            raise ValidationError(f"edge {raw} repeats an index")
    return Template(frozenset(free), frozenset(params), frozenset(edges),
                    data.get("k"), data.get("size_bound"))


def read_template(path: str | os.PathLike) -> Template:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"template file is not valid JSON: {exc}") from None
    return template_from_dict(data)


def write_template(T: Template, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(template_to_dict(T), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class IndexFamily:
    """A family of subsets of a finite ground set of indices."""

    ground: frozenset
    members: frozenset = frozenset()

    def __post_init__(self):
        ground = frozenset(self.ground)
        members = frozenset(frozenset(m) for m in self.members)
        object.__setattr__(self, "ground", ground)
        object.__setattr__(self, "members", members)
        for m in members:
            if not m <= ground:
                raise ValidationError(f"family member {sort_indices(m)} is not inside the ground set")

    def __iter__(self) -> Iterator[frozenset]:
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, s) -> bool:
        return frozenset(s) in self.members

    def sorted(self) -> list[frozenset]:
        """Members ordered by size, then lexicographically."""
        return sorted(self.members, key=_family_key)

    def as_lists(self) -> list[list[str]]:
        return [[index_name(i) for i in sort_indices(m)] for m in self.sorted()]

    def is_antichain(self) -> bool:
        return not any(a < b for a in self.members for b in self.members)

    def covers(self, s: frozenset) -> bool:
        """True when some member contains ``s``."""
        return any(s <= m for m in self.members)


def family(ground: Iterable[Index], members: Iterable[Iterable[Index]]) -> IndexFamily:
    return IndexFamily(frozenset(ground), frozenset(frozenset(m) for m in members))


def downward_closure(F: IndexFamily) -> IndexFamily:
    closed = set()
    for m in F.members:
        items = sort_indices(m)
        closed.update(frozenset(c) for c in chain.from_iterable(
            combinations(items, r) for r in range(len(items) + 1)))
    return IndexFamily(F.ground, frozenset(closed))


def maximal_members(F: IndexFamily) -> IndexFamily:
    return IndexFamily(F.ground, frozenset(
        m for m in F.members if not any(m < other for other in F.members)))


def canonical_forms(F: IndexFamily) -> tuple[IndexFamily, IndexFamily]:
    """Return the downward-closed form and the antichain form of ``F``.

    Both generate the same coordinate algebra as ``F``: adding a subset of
    an existing member changes nothing, and dropping a non-maximal member
    changes nothing.
    """
    return downward_closure(F), maximal_members(F)


def minus(J: Iterable[Index], ground: Iterable[Index]) -> IndexFamily:
    """All subsets of ``ground`` that do not contain ``J``."""
    J = frozenset(J)
    ground = frozenset(ground)
    if not J <= ground:
        raise ValidationError(f"{sort_indices(J - ground)} not in the ground set")
    return IndexFamily(ground, frozenset(s for s in subsets(ground) if not J <= s))


def perp(F: IndexFamily) -> IndexFamily:
    """Minimal subsets not covered by ``F``.

    ``J`` belongs to the result when no member of ``F`` contains ``J`` but
    every proper subset of ``J`` is contained in some member.
    """
    if not F.members:
        raise ValidationError("perp needs a nonempty family")
    out = set()
    for J in subsets(F.ground):
        if F.covers(J):
            continue
        # covering is downward closed, so checking the maximal proper subsets suffices
        if all(F.covers(J - {j}) for j in J):
            out.add(J)
    return IndexFamily(F.ground, frozenset(out))


def wedge(F: IndexFamily, G: IndexFamily) -> IndexFamily:
    """Sets contained in ``I & J`` for some ``I`` in ``F`` and ``J`` in ``G``.

    Returned downward closed.
    """
    if F.ground != G.ground:
        raise ValidationError("wedge needs families over the same ground set")
    meets = IndexFamily(F.ground, frozenset(a & b for a in F.members for b in G.members))
    return downward_closure(meets)
