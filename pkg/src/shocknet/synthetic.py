"""Synthetic panels with known graph, dynamics and impact matrix.

Used to validate the estimation chain: the truth is a random planar graph,
an impact matrix ``B0`` supported on it and a sparse ``A1`` on the same
pattern, simulated as ``x[t] = A1 x[t-1] + B0 eps[t]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assoc import CorrelationMatrix, InfluenceMatrix
from .errors import ConfigError
from .panel import TimeSeriesPanel
from .planar import KINDS, FilteredGraph, mst, pcpg, pmfg
from .var import check_stability, simulate_var


@dataclass(frozen=True)
class SyntheticSpec:
    N: int
    T: int
    kind: str = "PCPG"
    radius: float = 0.5
    seed: int = 0
    burn_in: int = 200

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown graph kind {self.kind!r}")
        if not 0 <= self.radius < 1:
            raise ConfigError(f"spectral radius target must lie in [0, 1), got {self.radius}")
        if self.N < 3:
            raise ConfigError("synthetic networks need N >= 3")
        if self.T < 2:
            raise ConfigError("synthetic panels need T >= 2")


@dataclass(frozen=True)
class SyntheticTruth:
    A1: np.ndarray
    B0: np.ndarray
    graph: FilteredGraph
    support: np.ndarray

    @property
    def Sigma_u(self) -> np.ndarray:
        return self.B0 @ self.B0.T


def random_graph(kind: str, labels, rng: np.random.Generator) -> FilteredGraph:
    """Planar graph of ``kind`` obtained by filtering random weights."""
    n = len(labels)
    W = rng.uniform(-1.0, 1.0, size=(n, n))
    if kind == "PCPG":
        np.fill_diagonal(W, 0.0)
        return pcpg(InfluenceMatrix(labels, W))
    W = np.tril(W, -1)
    W = W + W.T
    np.fill_diagonal(W, 1.0)
    C = CorrelationMatrix(labels, W)
    return pmfg(C) if kind == "PMFG" else mst(C)


def generate_synthetic(spec: SyntheticSpec) -> tuple[TimeSeriesPanel, SyntheticTruth]:
    rng = np.random.default_rng(spec.seed)
    labels = tuple(f"X{i + 1}" for i in range(spec.N))
    graph = random_graph(spec.kind, labels, rng)
    support = np.eye(spec.N, dtype=bool)
    for s, t, _ in graph.edges:
        support[t, s] = True
        if not graph.directed:
            support[s, t] = True

    B0 = np.zeros((spec.N, spec.N))
    off = support & ~np.eye(spec.N, dtype=bool)
    B0[off] = rng.uniform(-0.3, 0.3, size=int(off.sum()))
    B0[np.diag_indices(spec.N)] = rng.uniform(0.5, 1.5, size=spec.N)

    A1 = np.zeros((spec.N, spec.N))
    A1[support] = rng.standard_normal(int(support.sum()))
    _, r = check_stability([A1])
    A1 = A1 * (spec.radius / r) if r > 0 else A1

    eps = rng.standard_normal((spec.N, spec.T + spec.burn_in))
    x = simulate_var([A1], B0 @ eps)[:, spec.burn_in :]
    note = f"synthetic(kind={spec.kind}, N={spec.N}, T={spec.T}, radius={spec.radius}, seed={spec.seed})"
    panel = TimeSeriesPanel(labels, x, "other", (note,))
    return panel, SyntheticTruth(A1, B0, graph, support)
