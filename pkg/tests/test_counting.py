import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsehg.counting import (count_hom, hom_density, image_edges, iter_homs, relative_density,
                               strip_isolated)
from sparsehg.errors import ValidationError
from sparsehg.hypergraph import build, complete, empty, random_gnp
from sparsehg.measures import RelativeMeasure, support_count
from sparsehg.templates import Template

from oracles import brute_hom

K3 = complete(3, 2)
EDGE = build(2, 2, [(0, 1)])
TRI = build(3, 2, [(0, 1), (1, 2), (0, 2)])


def random_pattern(rng, k, nk):
    pool = list(itertools.combinations(range(nk), k))
    return build(nk, k, [e for e in pool if rng.random() < 0.5])


def test_count_examples():
    assert count_hom(EDGE, K3) == 6
    assert count_hom(TRI, K3) == 6
    for t in range(5):
        assert count_hom(empty(t, 2), K3) == 3 ** t
    assert count_hom(EDGE, empty(5, 2)) == 0


def test_density_examples():
    assert hom_density(EDGE, K3) == Fraction(2, 3)
    assert hom_density(empty(3, 2), K3) == 1
    assert hom_density(TRI, empty(4, 2)) == 0
    with pytest.raises(ValidationError):
        hom_density(EDGE, empty(0, 2))


def test_uniformity_mismatch():
    with pytest.raises(ValidationError):
        count_hom(EDGE, complete(4, 3))


def test_relative_density_examples():
    K4 = complete(4, 2)
    assert relative_density(TRI, K4, K4) == 1
    A = K4.without([(0, 1)])
    assert relative_density(TRI, A, K4) == Fraction(brute_hom(TRI, A), brute_hom(TRI, K4))
    assert relative_density(TRI, A, K4) == Fraction(12, 24)
    assert relative_density(TRI, empty(4, 2), K4) == 0
    assert relative_density(TRI, empty(4, 2), empty(4, 2)) == 0
    with pytest.raises(ValidationError):
        relative_density(TRI, K4, A)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_count_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    A = random_gnp(int(rng.integers(k, 7)), k, float(rng.random()), seed)
    K = random_pattern(rng, k, int(rng.integers(1, 5)))
    assert count_hom(K, A) == brute_hom(K, A)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_monotone_in_host_and_bounded_density(seed):
    rng = np.random.default_rng(seed)
    G = random_gnp(7, 2, 0.7, seed)
    drop = [e for e in G.sorted_edges() if rng.random() < 0.4]
    A = G.without(drop)
    K = random_pattern(rng, 2, 4)
    assert count_hom(K, A) <= count_hom(K, G)
    assert 0 <= relative_density(K, A, G) <= 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_consistent_with_measures(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    G = random_gnp(7, k, 0.6, seed)
    K = random_pattern(rng, k, 4)
    T = Template(frozenset(range(K.n)), frozenset(), frozenset(frozenset(e) for e in K.edges), k=k)
    assert count_hom(K, G) == support_count(RelativeMeasure(G, T))


def test_iter_homs_agrees_and_images():
    G = random_gnp(7, 2, 0.5, 3)
    homs = list(iter_homs(TRI, G))
    assert len(homs) == len(set(homs)) == count_hom(TRI, G)
    for h in homs:
        assert all(G.contains_edge(e) for e in image_edges(TRI, h))
    assert list(iter_homs(empty(0, 2), G)) == [()]


def test_strip_isolated():
    K = build(5, 2, [(1, 3), (3, 4)])
    core, dropped = strip_isolated(K)
    assert (core.n, dropped, len(core)) == (3, 2, 2)
    G = random_gnp(6, 2, 0.5, 1)
    assert count_hom(K, G) == count_hom(core, G) * G.n ** dropped


def test_workers_give_same_count():
    G = random_gnp(30, 2, 0.3, 5)
    assert count_hom(TRI, G, workers=1) == count_hom(TRI, G, workers=3)


def test_large_counts_are_exact():
    G = complete(40, 2)
    K = empty(12, 2)
    assert count_hom(K, G) == 40 ** 12
