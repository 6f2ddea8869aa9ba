"""Auditing how far a finite hypergraph is from suitable randomness.

For a template ``(V, W, E)`` and a parameter tuple ``a_W``, the worst
partition deviation is the largest Fubini deviation over all ordered
splits ``V = V0 | V1``.  The audit samples (or enumerates) ``a_W`` from the
parameter measure and estimates the measure of the bad set of parameters
whose deviation reaches each requested ``delta``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binomtest

from .errors import ValidationError
from .hypergraph import Hypergraph
from .measures import RelativeMeasure, fubini_worst_deviation
from .seminorms import CubeSystem
from .templates import (Index, Template, double, index_name, sort_indices, subsets,
                        template_to_dict)


def proper_partitions(V: Iterable[Index]) -> list[tuple[frozenset, frozenset]]:
    """All ordered splits ``(V0, V1)`` with both parts nonempty."""
    V = frozenset(V)
    return [(S, V - S) for S in subsets(V) if S and S != V]


def worst_partition_deviation(graph: Hypergraph, template: Template,
                              params: dict | None = None) -> tuple[Fraction, tuple[frozenset, frozenset]]:
    """Maximum Fubini deviation over all proper splits of the free indices.

    Ties keep the first split in :func:`proper_partitions` order.
    """
    if len(template.free) < 2:
        raise ValidationError("worst partition deviation needs at least two free indices")
    m = RelativeMeasure(graph, template, params)
    best, arg = Fraction(-1), None
    for V0, V1 in proper_partitions(template.free):
        dev, _ = fubini_worst_deviation(m, V0, V1)
        if dev > best:
            best, arg = dev, (V0, V1)
    return best, arg


def _canonical_shape(nv: int, nw: int, edges: tuple) -> tuple:
    best = None
    for pv in permutations(range(nv)):
        for pw in permutations(range(nv, nv + nw)):
            perm = pv + pw
            key = tuple(sorted(tuple(sorted(perm[i] for i in e)) for e in edges))
            if best is None or key < best:
                best = key
    return best


def template_shapes(k: int, max_vertices: int, max_edges: int) -> list[Template]:
    """One template per isomorphism class of shapes ``(V, W, E)``.

    Shapes have ``|V| >= 2``, ``|V| + |W| <= max_vertices`` and at most
    ``max_edges`` edges, and every parameter lies on an edge meeting ``V``
    (a parameter off such edges cannot change any measure).  Isomorphisms
    permute ``V`` and ``W`` separately.  Free indices are named ``v0, v1,
    ...`` and parameters ``w0, w1, ...``.
    """
    shapes = []
    for total in range(2, max_vertices + 1):
        for nv in range(2, total + 1):
            nw = total - nv
            ksets = list(combinations(range(total), k))
            seen = set()
            for m in range(0, max_edges + 1):
                for edges in combinations(ksets, m):
                    touched = {i for e in edges if any(u < nv for u in e) for i in e}
                    if any(w not in touched for w in range(nv, total)):
                        continue
                    key = _canonical_shape(nv, nw, edges)
                    if key in seen:
                        continue
                    seen.add(key)
                    name = lambda i: f"v{i}" if i < nv else f"w{i - nv}"
                    shapes.append(Template(
                        frozenset(name(i) for i in range(nv)),
                        frozenset(name(i) for i in range(nv, total)),
                        frozenset(frozenset(name(i) for i in e) for e in key), k=k))
    return shapes


def parameter_measure(graph: Hypergraph, template: Template) -> RelativeMeasure:
    """The measure on ``W``-tuples defined by the edges inside ``W``."""
    inside = frozenset(e for e in template.edges if e <= template.params)
    return RelativeMeasure(graph, Template(template.params, frozenset(), inside, template.k or graph.k))


def _substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def sample_parameters(graph: Hypergraph, template: Template, budget: int, seed: int,
                      shape_key: int = 0) -> tuple[str, list[dict], int]:
    """Parameter tuples to audit: ``(mode, tuples, parameter support size)``.

    ``mode`` is ``"exhaustive"`` when the whole parameter support fits in the
    budget, ``"sampled"`` otherwise and ``"vacuous"`` when the parameter
    support is empty.  Sample ``j`` draws from its own substream keyed by
    ``(shape_key, j)``: by rejection against the edges inside ``W`` when at
    least 1% of uniform tuples are accepted, else by indexing into the
    enumerated support.
    """
    pm = parameter_measure(graph, template)
    W = pm.order
    N_W = pm.support_count()
    if N_W == 0:
        return "vacuous", [], 0
    if N_W <= budget:
        return "exhaustive", [dict(zip(W, map(int, row))) for row in pm.support], N_W
    acceptance = N_W / graph.n ** len(W)
    inside = [tuple(W.index(i) for i in sort_indices(e)) for e in pm.template.edges]
    out = []
    for j in range(budget):
        rng = _substream(seed, shape_key, j)
        if acceptance >= 0.01:
            while True:
                draw = rng.integers(0, graph.n, size=len(W))
                if all(graph.contains_edge(draw[list(e)]) for e in inside):
                    break
        else:
            draw = pm.support[int(rng.integers(0, N_W))]
        out.append(dict(zip(W, map(int, draw))))
    return "sampled", out, N_W


def _deviation_task(args):
    graph, template, params = args
    m = RelativeMeasure(graph, template, params)
    empty = m.support_count() == 0
    dev, split = worst_partition_deviation(graph, template, params)
    return dev, split, empty


@dataclass
class AuditReport:
    graph: dict
    d: int
    deltas: list[float]
    sample_budget: int
    seed: int
    shape_coverage: dict
    records: list[dict] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "graph": self.graph,
            "d": self.d,
            "deltas": self.deltas,
            "sample_budget": self.sample_budget,
            "seed": self.seed,
            "shape_coverage": self.shape_coverage,
            "records": self.records,
            "flags": self.flags,
        }

    def max_deviation(self) -> float:
        vals = [r["deviation"]["max"] for r in self.records if r["samples"]]
        return max(vals) if vals else 0.0


def _bad_set_rows(devs: Sequence[Fraction], deltas: Sequence[float], exact: bool) -> list[dict]:
    rows = []
    s = len(devs)
    for delta in deltas:
        c = sum(1 for x in devs if x >= Fraction(str(delta)))
        p = c / s if s else 0.0
        if exact or not s:
            lo = hi = p
        else:
            ci = binomtest(c, s).proportion_ci(confidence_level=0.95)
            lo, hi = float(ci.low), float(ci.high)
        rows.append({"delta": delta, "count": c, "estimate": p, "ci_low": lo, "ci_high": hi})
    return rows


def audit(graph: Hypergraph, d: int, deltas: Sequence[float], sample_budget: int, seed: int,
          shapes: Sequence[Template] | None = None, max_vertices: int | None = None,
          max_edges: int | None = None, workers: int = 1) -> AuditReport:
    """Estimate the bad-parameter measure for every audited template shape."""
    if sample_budget < 1:
        raise ValidationError("sample budget must be at least 1")
    if d < 1:
        raise ValidationError("size bound d must be at least 1")
    deltas = sorted(float(x) for x in deltas)
    if not deltas or any(not 0 < x <= 1 for x in deltas):
        raise ValidationError("deltas must be a nonempty list in (0, 1]")
    k = graph.k
    if shapes is None:
        mv = max_vertices if max_vertices is not None else min(k * d, 6)
        me = max_edges if max_edges is not None else min(d, 4)
        shapes = template_shapes(k, mv, me)
        coverage = {"source": "enumerated", "max_vertices": mv, "max_edges": me,
                    "bound_vertices": k * d, "bound_edges": d, "shapes": len(shapes)}
    else:
        shapes = list(shapes)
        coverage = {"source": "configured", "shapes": len(shapes)}
    shapes = [s for s in shapes if len(s.free) >= 2]
    if not shapes:
        raise ValidationError("no template shape with at least two free indices to audit")
    for s in shapes:
        if s.k not in (None, k):
            raise ValidationError(f"shape is {s.k}-uniform but the graph is {k}-uniform")
        if len(s.edges) > d:
            raise ValidationError(f"shape has {len(s.edges)} edges, above d={d}")

    report = AuditReport(
        graph={"n": graph.n, "k": k, "m": len(graph)}, d=d, deltas=deltas,
        sample_budget=sample_budget, seed=seed, shape_coverage=coverage)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for idx, shape in enumerate(shapes):
            mode, params_list, N_W = sample_parameters(graph, shape, sample_budget, seed, idx)
            tasks = [(graph, shape, p) for p in params_list]
            results = list(pool.map(_deviation_task, tasks)) if pool else list(map(_deviation_task, tasks))
            devs = [r[0] for r in results]
            empty = sum(1 for r in results if r[2])
            rec = {"shape": template_to_dict(shape), "mode": mode, "param_support": N_W,
                   "samples": len(devs), "empty_supports": empty}
            if devs:
                arr = np.array([float(x) for x in devs])
                rec["deviation"] = {
                    "max": float(arr.max()), "median": float(np.median(arr)),
                    "q10": float(np.quantile(arr, 0.1)), "q25": float(np.quantile(arr, 0.25)),
                    "q75": float(np.quantile(arr, 0.75)), "q90": float(np.quantile(arr, 0.9)),
                }
                w = max(range(len(devs)), key=lambda j: (devs[j], -j))
                V0, V1 = results[w][1]
                rec["worst"] = {
                    "params": {index_name(i): v for i, v in params_list[w].items()},
                    "V0": [index_name(i) for i in sort_indices(V0)],
                    "V1": [index_name(i) for i in sort_indices(V1)],
                    "deviation": str(devs[w]),
                }
            else:
                rec["deviation"] = {"max": 0.0, "median": 0.0, "q10": 0.0, "q25": 0.0,
                                    "q75": 0.0, "q90": 0.0}
            rec["bad_set"] = _bad_set_rows(devs, deltas, exact=mode != "sampled")
            if mode == "vacuous" or (devs and empty == len(devs)):
                rec["vacuous"] = True
                report.flags.append(f"shape {idx}: vacuous (no parameter or tuple support)")
            report.records.append(rec)
    finally:
        if pool:
            pool.shutdown()
    return report


def canonicity_suite(graph: Hypergraph, shape_bound: tuple[int, int] = (2, 2),
                     seed: int = 0) -> dict:
    """Exhaustively check dummy-parameter and relabeling invariance.

    For every template with ``1 <= |V| <= shape_bound[0]`` and
    ``|W| <= shape_bound[1]``, every edge set, and every parameter tuple:

    * adding a parameter joined only to other parameters leaves the support
      unchanged for every value of the new parameter;
    * relabeling indices by a side-preserving bijection maps the support
      onto the relabeled support;
    * doubling along the empty set changes nothing.

    Violations are listed in the report; an empty list means all passed.
    """
    max_v, max_w = shape_bound
    k = graph.k
    rng = np.random.default_rng(seed)
    checks = {"dummy_parameter": 0, "relabeling": 0, "empty_doubling": 0}
    violations = []
    for nv in range(1, max_v + 1):
        for nw in range(0, max_w + 1):
            V = [f"a{i}" for i in range(nv)]
            W = [f"w{i}" for i in range(nw)]
            ksets = [frozenset(c) for c in combinations(V + W, k)]
            dummy = "z"
            extra = [frozenset(c) | {dummy} for c in combinations(W, k - 1)]
            for r in range(len(ksets) + 1):
                for E in combinations(ksets, r):
                    T = Template(frozenset(V), frozenset(W), frozenset(E), k=k)
                    fresh = [int(x) for x in rng.permutation(100)[: nv + nw]]
                    relabelings = [dict(zip(V + W, [f"p{fresh[j]}" for j in range(nv)] +
                                            [f"q{fresh[nv + j]}" for j in range(nw)]))]
                    relabelings += [dict(zip(pv + pw, [relabelings[0][i] for i in V + W]))
                                    for pv in permutations(V) for pw in permutations(W)][1:]
                    for xw in product(range(graph.n), repeat=nw):
                        params = dict(zip(W, xw))
                        m = RelativeMeasure(graph, T, params)
                        base = {tuple(r_) for r_ in m.support.tolist()}
                        # dummy parameter joined only to parameters
                        for q in range(len(extra) + 1):
                            for added in combinations(extra, q):
                                T2 = Template(T.free, T.params | {dummy}, T.edges | set(added), k=k)
                                for xz in range(graph.n):
                                    m2 = RelativeMeasure(graph, T2, {**params, dummy: xz})
                                    checks["dummy_parameter"] += 1
                                    if {tuple(r_) for r_ in m2.support.tolist()} != base:
                                        violations.append({"axiom": "dummy_parameter",
                                                           "template": template_to_dict(T2),
                                                           "params": {**params, dummy: xz}})
                        # relabeling
                        for pi in relabelings:
                            m3 = RelativeMeasure(graph, T.rename(pi), {pi[w]: v for w, v in params.items()})
                            pos = [m3.order.index(pi[i]) for i in m.order]
                            mapped = {tuple(row[p] for p in pos) for row in m3.support.tolist()}
                            checks["relabeling"] += 1
                            if mapped != base:
                                violations.append({"axiom": "relabeling",
                                                   "template": template_to_dict(T),
                                                   "params": params,
                                                   "map": {str(a): str(b) for a, b in pi.items()}})
                        # doubling along the empty set
                        cs = CubeSystem(m, ())
                        checks["empty_doubling"] += 1
                        same = double(T, ()) == T and np.array_equal(cs.doubled.support, m.support)
                        if not same:
                            violations.append({"axiom": "empty_doubling",
                                               "template": template_to_dict(T), "params": params})
    return {"graph": {"n": graph.n, "k": k, "m": len(graph)},
            "shape_bound": list(shape_bound), "seed": seed,
            "checks": checks, "violations": violations, "ok": not violations}
