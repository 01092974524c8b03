import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shocknet.assoc import CorrelationMatrix, InfluenceMatrix, influence_matrix
from shocknet.errors import DomainError
from shocknet.panel import TimeSeriesPanel
from shocknet.planar import FilteredGraph, identification_check, mst, pcpg, pmfg

from conftest import random_correlation


def random_influence(n, seed):
    rng = np.random.default_rng(seed)
    D = rng.uniform(-0.5, 0.5, size=(n, n))
    np.fill_diagonal(D, 0.0)
    return InfluenceMatrix(tuple(f"N{i}" for i in range(n)), D)


def nx_planar(edges, n):
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    return nx.check_planarity(G)[0]


def test_pmfg_n4_is_k4():
    g = pmfg(random_correlation(4, seed=0))
    assert sorted(g.undirected_edges()) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


@pytest.mark.parametrize("n", [3, 5, 17, 25])
def test_pmfg_edge_count_planar_connected(n):
    g = pmfg(random_correlation(n, seed=n))
    assert len(g.edges) == 3 * (n - 2)
    assert nx_planar(g.undirected_edges(), n)
    assert g.is_connected()
    A = g.adjacency
    assert np.array_equal(A, A.T)


def test_pmfg_n17_has_45_edges():
    assert len(pmfg(random_correlation(17, seed=1)).edges) == 45


def test_pmfg_order_follows_correlation():
    C = random_correlation(9, seed=4)
    g = pmfg(C)
    weights = [w for _, _, w in g.edges]
    assert weights == sorted(weights, reverse=True)
    # the strongest pair is always kept first
    off = C.C - np.eye(9) * 10
    i, j = np.unravel_index(np.argmax(off), off.shape)
    assert {g.edges[0][0], g.edges[0][1]} == {min(i, j), max(i, j)}


@pytest.mark.parametrize("seed", range(5))
def test_pmfg_contains_mst(seed):
    C = random_correlation(8, seed=seed)
    G = nx.Graph()
    for i in range(8):
        for j in range(i + 1, 8):
            G.add_edge(i, j, weight=np.sqrt(2 * (1 - C.C[i, j])))
    tree = {tuple(sorted(e)) for e in nx.minimum_spanning_edges(G, data=False)}
    assert tree <= set(pmfg(C).undirected_edges())
    assert tree == set(mst(C).undirected_edges())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["cube", "exp", "affine"]))
def test_pmfg_invariant_under_monotone_transform(seed, how):
    C = random_correlation(10, seed)
    f = {"cube": lambda x: x**3, "exp": np.exp, "affine": lambda x: 0.3 * x + 0.1}[how]
    T = f(C.C)
    np.fill_diagonal(T, 1.0)
    a = pmfg(C)
    b = pmfg(CorrelationMatrix(C.labels, T))
    assert [e[:2] for e in a.edges] == [e[:2] for e in b.edges]


def test_pmfg_absolute_mode_uses_magnitudes():
    labels = ("a", "b", "c", "d", "e")
    C = np.full((5, 5), 0.1)
    np.fill_diagonal(C, 1.0)
    C[0, 1] = C[1, 0] = -0.9
    g_raw = pmfg(CorrelationMatrix(labels, C))
    g_abs = pmfg(CorrelationMatrix(labels, C), absolute=True)
    assert g_abs.edges[0][:2] == (0, 1)
    assert g_raw.edges[-1][:2] == (0, 1) or (0, 1) not in g_raw.edge_set(False)


@pytest.mark.parametrize("n", [3, 6, 17, 30])
def test_pcpg_edge_count_and_no_reciprocal(n):
    g = pcpg(random_influence(n, seed=n))
    assert g.directed
    assert len(g.edges) == 3 * (n - 2)
    pairs = g.edge_set()
    assert not any((t, s) in pairs for s, t in pairs)
    assert nx_planar(g.undirected_edges(), n)
    assert g.is_connected()


def test_pcpg_keeps_stronger_direction():
    D = random_influence(8, seed=2).D
    g = pcpg(InfluenceMatrix(tuple("abcdefgh"), D))
    for s, t, w in g.edges:
        # edge s -> t stands for element D[t, s]
        assert w == D[t, s]
        assert D[t, s] >= D[s, t]


def test_pcpg_top_element_first():
    D = random_influence(6, seed=1).D.copy()
    D[0, 1] = 10.0
    g = pcpg(InfluenceMatrix(tuple("abcdef"), D))
    assert g.edges[0][:2] == (1, 0)
    assert g.adjacency[0, 1] == 10.0


def test_pcpg_tie_prefers_edge_towards_lower_index():
    D = np.zeros((4, 4))
    g = pcpg(InfluenceMatrix(tuple("abcd"), D))
    assert g.edges[0][:2] == (1, 0)
    assert all(s > t for s, t, _ in g.edges)


def test_pcpg_hub_has_largest_out_degree():
    rng = np.random.default_rng(17)
    hub = rng.standard_normal(5000)
    rows = [hub] + [hub + rng.standard_normal(5000) for _ in range(5)]
    panel = TimeSeriesPanel(tuple(f"n{i}" for i in range(6)), rows)
    g = pcpg(influence_matrix(panel))
    deg = g.out_degree()
    assert deg[0] == deg.max()
    assert all(deg[0] > d for d in deg[1:])


def test_pcpg_deterministic():
    D = random_influence(12, seed=3)
    assert pcpg(D).edges == pcpg(D).edges


def test_filters_need_three_nodes():
    C = CorrelationMatrix(("a", "b"), np.eye(2))
    with pytest.raises(DomainError):
        pmfg(C)
    with pytest.raises(DomainError):
        pcpg(InfluenceMatrix(("a", "b"), np.zeros((2, 2))))


def test_mst_edge_count():
    g = mst(random_correlation(9, seed=6))
    assert len(g.edges) == 8 and g.is_connected()


# -- identification ------------------------------------------------------------


def test_identification_examples():
    r = identification_check("PMFG", 11)
    assert (r.free_parameters, r.restrictions, r.required, r.identified) == (65, 56, 55, True)
    r = identification_check("PMFG", 10)
    assert (r.restrictions, r.required, r.identified) == (42, 45, False)
    r = identification_check("PCPG", 4)
    assert (r.free_parameters, r.restrictions, r.required, r.identified) == (10, 6, 6, True)


def test_identification_table_matches_inequalities():
    for n in range(1, 51):
        assert identification_check("PMFG", n).identified == (n <= 2 or n >= 11)
        assert identification_check("PCPG", n).identified
        r = identification_check("PCPG", n)
        assert r.identified == (r.restrictions >= r.required)


def test_identification_rejects_nonpositive():
    with pytest.raises(DomainError):
        identification_check("PCPG", 0)


# -- export --------------------------------------------------------------------


@pytest.mark.parametrize("build", [lambda: pmfg(random_correlation(7, 1)), lambda: pcpg(random_influence(7, 1))])
def test_graph_json_and_dot_roundtrip(tmp_path, build):
    g = build()
    g.to_json(tmp_path / "g.json")
    assert FilteredGraph.from_json(tmp_path / "g.json") == g
    g.write_dot(tmp_path / "g.dot")
    assert FilteredGraph.read_dot(tmp_path / "g.dot") == g
    dot = g.to_dot()
    assert dot.startswith("digraph" if g.directed else "graph")
    assert ("->" in dot) == g.directed


def test_dot_escapes_labels():
    g = FilteredGraph(('a "x"', "b\\c", "d"), "PMFG", ((0, 1, 0.5), (1, 2, -0.25)))
    assert FilteredGraph.from_dot(g.to_dot()) == g
