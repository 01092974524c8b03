import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shocknet.assoc import (
    CorrelationMatrix,
    InfluenceMatrix,
    influence_from_correlation,
    influence_matrix,
    partial_correlation,
    pearson_matrix,
)
from shocknet.errors import DomainError, SingularityError
from shocknet.panel import TimeSeriesPanel

from conftest import random_correlation, random_panel


def test_affine_dependence_gives_unit_correlation():
    x = np.random.default_rng(0).standard_normal(40)
    C = pearson_matrix(TimeSeriesPanel(("a", "b", "c"), [x, 2 * x + 3, -x]))
    assert C.C[0, 1] == pytest.approx(1.0, abs=1e-15)
    assert C.C[0, 2] == pytest.approx(-1.0, abs=1e-15)


def test_pearson_matches_two_pass_formula():
    panel = random_panel(4, 10, seed=11)
    x = panel.data
    N, T = x.shape
    expected = np.empty((N, N))
    for i in range(N):
        for j in range(N):
            mi = sum(x[i]) / T
            mj = sum(x[j]) / T
            cov = sum((x[i, t] - mi) * (x[j, t] - mj) for t in range(T))
            vi = sum((x[i, t] - mi) ** 2 for t in range(T))
            vj = sum((x[j, t] - mj) ** 2 for t in range(T))
            expected[i, j] = cov / np.sqrt(vi * vj)
    np.testing.assert_allclose(pearson_matrix(panel).C, expected, rtol=0, atol=1e-12)


def test_pearson_structure():
    C = pearson_matrix(random_panel(7, 30, seed=2)).C
    assert np.array_equal(C, C.T)
    assert np.array_equal(np.diag(C), np.ones(7))
    assert np.all(np.abs(C) <= 1)


def test_zero_variance_row_named():
    panel = TimeSeriesPanel(("a", "flat"), [[1.0, 2.0, 3.0], [4.0, 4.0, 4.0]])
    with pytest.raises(DomainError, match="flat"):
        pearson_matrix(panel)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100), st.floats(-100, 100), st.integers(0, 3))
def test_pearson_affine_invariance(a, b, row):
    panel = random_panel(4, 25, seed=5)
    x = panel.data.copy()
    x[row] = a * x[row] + b
    np.testing.assert_allclose(
        pearson_matrix(TimeSeriesPanel(panel.labels, x)).C, pearson_matrix(panel).C, rtol=0, atol=1e-12
    )


def test_partial_correlation_examples():
    C = np.array([[1.0, 0.3, 0.0], [0.3, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert partial_correlation(C, 0, 1, 2) == pytest.approx(0.3, abs=1e-15)
    C = np.array([[1.0, 0.2, 0.5], [0.2, 1.0, 0.4], [0.5, 0.4, 1.0]])
    assert partial_correlation(C, 0, 1, 2) == pytest.approx(0.0, abs=1e-15)
    C = np.array([[1.0, 0.6, 0.5], [0.6, 1.0, 0.5], [0.5, 0.5, 1.0]])
    assert partial_correlation(C, 0, 1, 2) == pytest.approx(0.35 / 0.75, abs=1e-12)
    assert partial_correlation(C, 0, 1, 2) == pytest.approx(0.4667, abs=1e-4)


def test_partial_correlation_singular():
    C = np.array([[1.0, 0.2, 1.0], [0.2, 1.0, 0.3], [1.0, 0.3, 1.0]])
    with pytest.raises(SingularityError):
        partial_correlation(C, 0, 1, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_partial_correlation_symmetric(seed):
    C = random_correlation(5, seed)
    for i, j, k in itertools.permutations(range(5), 3):
        assert partial_correlation(C, i, j, k) == partial_correlation(C, j, i, k)


def brute_force_influence(C):
    """Triple loop through partial_correlation, excluding k in {i, j}."""
    N = C.n
    D = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            terms = [C.C[i, k] - partial_correlation(C, i, k, j) for k in range(N) if k not in (i, j)]
            D[i, j] = sum(terms) / (N - 2)
    return D


def test_influence_matches_brute_force():
    C = random_correlation(7, seed=4)
    np.testing.assert_allclose(influence_from_correlation(C).D, brute_force_influence(C), rtol=0, atol=1e-13)


def test_influence_n_minus_one_prefactor_rescales():
    C = random_correlation(6, seed=8)
    np.testing.assert_allclose(
        influence_from_correlation(C, prefactor="n-1").D,
        influence_from_correlation(C).D * 4 / 5,
        rtol=1e-14,
    )


def test_influence_independent_series_small():
    D = influence_matrix(random_panel(5, 5000, seed=21)).D
    off = ~np.eye(5, dtype=bool)
    assert np.abs(D[off]).max() < 0.05


def test_influence_driver_dominates():
    rng = np.random.default_rng(9)
    xj = rng.standard_normal(5000)
    xi = xj + rng.standard_normal(5000)
    xk = xj + rng.standard_normal(5000)
    D = influence_matrix(TimeSeriesPanel(("i", "j", "k"), [xi, xj, xk])).D
    assert D[0, 1] > D[1, 0]
    assert D[2, 1] > D[1, 2]


def test_influence_deterministic_and_bounded():
    panel = random_panel(6, 50, seed=13)
    D1 = influence_matrix(panel).D
    D2 = influence_matrix(panel).D
    assert np.array_equal(D1, D2)
    assert np.all(np.abs(D1) <= 2)
    assert np.all(np.isfinite(D1))
    assert np.all(np.diag(D1) == 0)


def test_influence_singular_propagates_triple():
    x = np.random.default_rng(0).standard_normal(30)
    y = np.random.default_rng(1).standard_normal(30)
    panel = TimeSeriesPanel(("a", "b", "c"), [x, 2 * x, y])
    with pytest.raises(SingularityError, match="triple"):
        influence_matrix(panel)


def test_influence_needs_three_nodes():
    with pytest.raises(DomainError):
        influence_matrix(random_panel(2, 20, seed=0))


def test_matrix_exports_roundtrip(tmp_path):
    C = random_correlation(4, seed=3)
    C.to_csv(tmp_path / "c.csv")
    C.to_json(tmp_path / "c.json")
    assert np.array_equal(CorrelationMatrix.from_csv(tmp_path / "c.csv").C, C.C)
    back = CorrelationMatrix.from_json(tmp_path / "c.json")
    assert back.labels == C.labels and np.array_equal(back.C, C.C)
    D = influence_from_correlation(C)
    D.to_json(tmp_path / "d.json")
    assert np.array_equal(InfluenceMatrix.from_json(tmp_path / "d.json").D, D.D)
