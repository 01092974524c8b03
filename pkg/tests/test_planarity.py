import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shocknet.errors import GraphError
from shocknet.planar import pmfg
from shocknet.planarity import is_planar

from conftest import random_correlation


def complete(n):
    return list(itertools.combinations(range(n), 2))


def nx_planar(edges, n):
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    return nx.check_planarity(G)[0]


def test_kuratowski_examples():
    assert is_planar(complete(4), 4)
    assert not is_planar(complete(5), 5)
    assert not is_planar([(a, b) for a in range(3) for b in range(3, 6)], 6)


def test_subdivided_k33_is_not_planar():
    # K3,3 with every edge subdivided once stays non-planar
    edges, nxt = [], 6
    for a in range(3):
        for b in range(3, 6):
            edges += [(a, nxt), (nxt, b)]
            nxt += 1
    assert not is_planar(edges, nxt)


def test_petersen_graph_is_not_planar():
    G = nx.petersen_graph()
    assert not is_planar(list(G.edges), 10)


def test_invalid_graphs():
    with pytest.raises(GraphError):
        is_planar([(0, 0)], 2)
    with pytest.raises(GraphError):
        is_planar([(0, 1), (1, 0)], 2)
    with pytest.raises(GraphError):
        is_planar([(0, 5)], 3)


@st.composite
def random_graphs(draw):
    n = draw(st.integers(1, 14))
    pairs = complete(n)
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return n, [p for p, keep in zip(pairs, mask) if keep]


@settings(max_examples=400, deadline=None)
@given(random_graphs())
def test_agrees_with_networkx(graph):
    n, edges = graph
    assert is_planar(edges, n) == nx_planar(edges, n)


@settings(max_examples=60, deadline=None)
@given(st.integers(6, 40), st.integers(0, 10_000))
def test_maximal_planar_plus_edge(n, seed):
    # a triangulation plus any extra edge is non-planar; minus edges stays planar
    rng = np.random.default_rng(seed)
    tri = pmfg(random_correlation(n, seed)).undirected_edges()
    assert len(tri) == 3 * n - 6
    assert is_planar(tri, n)
    missing = sorted(set(complete(n)) - set(tri))
    extra = missing[rng.integers(len(missing))]
    assert not is_planar(tri + [extra], n)
    assert not nx_planar(tri + [extra], n)
    keep = [e for e in tri if rng.random() < 0.7]
    assert is_planar(keep, n)


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 30), st.floats(0.05, 0.6), st.integers(0, 10_000))
def test_sparse_random_graphs_agree(n, p, seed):
    G = nx.gnp_random_graph(n, p, seed=seed)
    assert is_planar(list(G.edges), n) == nx.check_planarity(G)[0]
