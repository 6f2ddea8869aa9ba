import json
from fractions import Fraction

import numpy as np
import pytest

from sparsehg.audit import (audit, canonicity_suite, proper_partitions, sample_parameters,
                            template_shapes, worst_partition_deviation)
from sparsehg.errors import ValidationError
from sparsehg.hypergraph import build, complete, empty, random_gnp
from sparsehg.measures import RelativeMeasure
from sparsehg.templates import Template

from oracles import point_weights, subset_max_deviation

PATH = build(3, 2, [(0, 1), (1, 2)])
AB = Template(frozenset("ab"), frozenset(), frozenset([frozenset("ab")]))
CHERRY = Template(frozenset("abc"), frozenset(), frozenset([frozenset("ab"), frozenset("bc")]))


def test_proper_partitions_count():
    assert len(proper_partitions("abc")) == 6
    assert proper_partitions("a") == []


def test_worst_partition_examples():
    dev, (V0, V1) = worst_partition_deviation(PATH, AB)
    assert dev == Fraction(1, 6)
    assert {V0, V1} == {frozenset("a"), frozenset("b")}
    assert worst_partition_deviation(complete(5, 2), AB)[0] == 0
    with pytest.raises(ValidationError):
        worst_partition_deviation(PATH, Template(frozenset("a"), k=2))


def test_worst_partition_relabel_invariant():
    G = random_gnp(6, 2, 0.5, 2)
    T2 = CHERRY.rename({"a": "x", "b": "y", "c": "z"})
    assert worst_partition_deviation(G, CHERRY)[0] == worst_partition_deviation(G, T2)[0]


def test_worst_partition_matches_subset_brute_force():
    rng = np.random.default_rng(1)
    checked = 0
    for s in range(200):
        G = random_gnp(int(rng.integers(3, 6)), 2, float(rng.uniform(0.2, 0.8)), s)
        W = {"w": int(rng.integers(G.n))}
        T = Template(frozenset("ab"), frozenset("w"),
                     frozenset(e for e in map(frozenset, ["ab", "aw", "bw"]) if rng.random() < 0.6), k=2)
        m = RelativeMeasure(G, T, W)
        if m.support_count() > 20:
            continue
        want = max(subset_max_deviation(*point_weights(G, T.free, T.edges, W, V0)[1:])
                   for V0, _ in proper_partitions(T.free))
        assert worst_partition_deviation(G, T, W)[0] == want
        checked += 1
    assert checked > 50


def test_template_shapes():
    shapes = template_shapes(2, 3, 2)
    assert all(len(s.edges) <= 2 and len(s.free | s.params) <= 3 for s in shapes)
    assert all(s.free for s in shapes)
    assert len(template_shapes(2, 4, 2)) == 18


def test_sample_parameter_modes():
    G = random_gnp(8, 2, 0.5, 0)
    T = Template(frozenset("ab"), frozenset("uw"), frozenset([frozenset("ab"), frozenset("uw")]))
    mode, params, N = sample_parameters(G, T, 1000, 0)
    assert mode == "exhaustive" and len(params) == N == 2 * len(G)
    mode, params, _ = sample_parameters(G, T, 5, 3)
    assert mode == "sampled" and len(params) == 5
    assert all(G.contains_edge((p["u"], p["w"])) for p in params)
    assert sample_parameters(G, T, 5, 3) == ("sampled", params, N)
    assert sample_parameters(empty(8, 2), T, 5, 3)[0] == "vacuous"


def test_audit_complete_graph():
    # coincidences among indices make slice sizes differ by O(1/n) even on a
    # complete host, so the deviation is small but not always zero
    for n in (6, 12):
        rep = audit(complete(n, 2), d=2, deltas=[0.01, 0.1], sample_budget=20, seed=0,
                    max_vertices=3, max_edges=2)
        for rec in rep.records:
            assert rec["deviation"]["max"] <= 1.5 / n**2
            assert rec["bad_set"][1]["estimate"] == 0
            if len(rec["shape"]["edges"]) == 1:
                assert rec["deviation"]["max"] == 0


def test_audit_empty_graph_is_flagged():
    shapes = [Template(frozenset("ab"), frozenset("w"),
                       frozenset([frozenset("ab"), frozenset("aw")]))]
    rep = audit(empty(5, 2), d=2, deltas=[0.1], sample_budget=10, seed=0, shapes=shapes)
    assert rep.records[0]["vacuous"] and rep.flags


def test_audit_determinism_and_monotone_bad_set():
    G = random_gnp(9, 2, 0.5, 4)
    kw = dict(d=2, deltas=[0.3, 0.01, 0.1], sample_budget=6, seed=5, max_vertices=3, max_edges=2)
    a = audit(G, **kw).to_dict()
    b = audit(G, workers=2, **kw).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    for rec in a["records"]:
        est = [row["estimate"] for row in rec["bad_set"]]
        assert est == sorted(est, reverse=True)
        for row in rec["bad_set"]:
            assert 0 <= row["ci_low"] <= row["estimate"] <= row["ci_high"] <= 1
        assert 0 <= rec["deviation"]["max"] <= 1


def test_audit_recorded_worst_matches_recomputation():
    G = random_gnp(5, 2, 0.5, 7)
    shapes = [Template(frozenset("ab"), frozenset("w"), frozenset([frozenset("ab"), frozenset("bw")]))]
    rep = audit(G, d=2, deltas=[0.1], sample_budget=50, seed=1, shapes=shapes)
    rec = rep.records[0]
    assert rec["mode"] == "exhaustive"
    params = {"w": rec["worst"]["params"]["w"]}
    T = shapes[0]
    want = max(subset_max_deviation(*point_weights(G, T.free, T.edges, params, V0)[1:])
               for V0, _ in proper_partitions(T.free))
    assert Fraction(rec["worst"]["deviation"]) == want


def test_audit_validation():
    G = random_gnp(5, 2, 0.5, 0)
    with pytest.raises(ValidationError):
        audit(G, d=2, deltas=[0.1], sample_budget=0, seed=0)
    with pytest.raises(ValidationError):
        audit(G, d=2, deltas=[0.1], sample_budget=5, seed=0,
              shapes=[Template(frozenset("a"), k=2)])
    with pytest.raises(ValidationError):
        audit(G, d=2, deltas=[1.5], sample_budget=5, seed=0)


def test_canonicity_small():
    for G in (random_gnp(4, 2, 0.5, 1), random_gnp(4, 3, 0.5, 1), empty(3, 2)):
        rep = canonicity_suite(G, shape_bound=(2, 1))
        assert rep["ok"], rep["violations"][:3]
        assert all(v > 0 for v in rep["checks"].values())
