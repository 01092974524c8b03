import numpy as np
import pytest

from shocknet.errors import ConfigError
from shocknet.synthetic import SyntheticSpec, generate_synthetic
from shocknet.var import check_stability


@pytest.mark.parametrize("kind", ["PCPG", "PMFG", "MST"])
def test_radius_target_is_met(kind):
    _, truth = generate_synthetic(SyntheticSpec(7, 50, kind, 0.6, seed=1))
    _, r = check_stability([truth.A1])
    assert 0.59 <= r <= 0.61


def test_truth_respects_graph_support():
    _, truth = generate_synthetic(SyntheticSpec(8, 50, "PCPG", 0.5, seed=2))
    assert np.all(truth.B0[~truth.support] == 0)
    assert np.all(truth.A1[~truth.support] == 0)
    d = np.diag(truth.B0)
    assert np.all((d >= 0.5) & (d <= 1.5))
    off = truth.B0[truth.support & ~np.eye(8, dtype=bool)]
    assert np.all(np.abs(off) <= 0.3)
    assert len(truth.graph.edges) == 3 * (8 - 2)


def test_residual_covariance_matches_truth():
    panel, truth = generate_synthetic(SyntheticSpec(5, 10_000, "PCPG", 0.5, seed=4))
    x = panel.data
    u = x[:, 1:] - truth.A1 @ x[:, :-1]
    S = u @ u.T / u.shape[1]
    assert np.linalg.norm(S - truth.Sigma_u) / np.linalg.norm(truth.Sigma_u) < 0.05


def test_deterministic():
    a, _ = generate_synthetic(SyntheticSpec(5, 300, seed=9))
    b, _ = generate_synthetic(SyntheticSpec(5, 300, seed=9))
    c, _ = generate_synthetic(SyntheticSpec(5, 300, seed=10))
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)


@pytest.mark.parametrize("kwargs", [{"radius": 1.0}, {"radius": -0.1}, {"N": 2}, {"kind": "XYZ"}])
def test_invalid_spec(kwargs):
    base = dict(N=5, T=100)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        SyntheticSpec(**base)
