"""Planar filtered graphs and identification counting.

Both filters walk a ranked list of candidate edges and keep an edge only if
the graph stays planar, stopping at the 3(N-2) edges of a maximal planar
graph. PMFG ranks undirected pairs by Pearson correlation. PCPG ranks
directed influences ``D[i, j]``, keeping only the stronger direction of each
pair.

Adjacency convention: ``adjacency[i, j]`` is the weight of the edge from
``j`` to ``i`` (``j`` influences ``i``). Undirected graphs are symmetric.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .assoc import CorrelationMatrix, InfluenceMatrix, _as_array
from .errors import DomainError, GraphError, SchemaError
from .planarity import is_planar

GraphKind = Literal["PMFG", "PCPG", "MST"]
KINDS = ("PMFG", "PCPG", "MST")


@dataclass(frozen=True)
class FilteredGraph:
    """Edges are ``(source, target, weight)`` node-index triples in insertion order."""

    labels: tuple[str, ...]
    kind: GraphKind
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown graph kind {self.kind!r}")
        edges = tuple((int(s), int(t), float(w)) for s, t, w in self.edges)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "edges", edges)

    @property
    def directed(self) -> bool:
        return self.kind == "PCPG"

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for s, t, w in self.edges:
            A[t, s] = w
            if not self.directed:
                A[s, t] = w
        return A

    def undirected_edges(self) -> list[tuple[int, int]]:
        return [(min(s, t), max(s, t)) for s, t, _ in self.edges]

    def edge_set(self, directed: bool | None = None) -> set[tuple[int, int]]:
        """Edge keys as index pairs; ``(source, target)`` when directed."""
        directed = self.directed if directed is None else directed
        if directed:
            return {(s, t) for s, t, _ in self.edges}
        return set(self.undirected_edges())

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        nbrs: dict[int, set[int]] = {i: set() for i in range(self.n)}
        for a, b in self.undirected_edges():
            nbrs[a].add(b)
            nbrs[b].add(a)
        seen = {0}
        stack = [0]
        while stack:
            for w in nbrs[stack.pop()] - seen:
                seen.add(w)
                stack.append(w)
        return len(seen) == self.n

    def out_degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for s, _, _ in self.edges:
            deg[s] += 1
        return deg

    # -- export / import ------------------------------------------------

    def to_dict(self) -> dict:
        adjacency: dict[str, list] = {label: [] for label in self.labels}
        for rank, (s, t, w) in enumerate(self.edges):
            adjacency[self.labels[s]].append({"target": self.labels[t], "weight": w, "rank": rank})
        return {
            "kind": self.kind,
            "directed": self.directed,
            "labels": list(self.labels),
            "adjacency": adjacency,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilteredGraph":
        labels = tuple(d["labels"])
        index = {label: i for i, label in enumerate(labels)}
        ranked = []
        for src, items in d["adjacency"].items():
            for item in items:
                ranked.append((item["rank"], index[src], index[item["target"]], item["weight"]))
        ranked.sort()
        return cls(labels, d["kind"], tuple((s, t, w) for _, s, t, w in ranked))

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path) -> "FilteredGraph":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dot(self) -> str:
        head, arrow = ("digraph", "->") if self.directed else ("graph", "--")
        lines = [f'{head} "{self.kind}" {{']
        for i, label in enumerate(self.labels):
            lines.append(f'  "{_dot_escape(label)}";')
        for s, t, w in self.edges:
            lines.append(
                f'  "{_dot_escape(self.labels[s])}" {arrow} "{_dot_escape(self.labels[t])}"'
                f' [label="{w:.4g}", weight="{w!r}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"

    def write_dot(self, path) -> None:
        Path(path).write_text(self.to_dot(), encoding="utf-8")

    @classmethod
    def from_dot(cls, text: str) -> "FilteredGraph":
        m = re.match(r'\s*(digraph|graph)\s+"([^"]*)"\s*\{', text)
        if not m:
            raise GraphError("not a DOT graph produced by this package")
        kind = m.group(2)
        labels = []
        edges = []
        node_re = re.compile(r'^\s*"((?:[^"\\]|\\.)*)";\s*$')
        edge_re = re.compile(
            r'^\s*"((?:[^"\\]|\\.)*)"\s*(?:->|--)\s*"((?:[^"\\]|\\.)*)".*weight="([^"]+)"'
        )
        for line in text.splitlines()[1:]:
            if (em := edge_re.match(line)) is not None:
                edges.append((_dot_unescape(em.group(1)), _dot_unescape(em.group(2)), float(em.group(3))))
            elif (nm := node_re.match(line)) is not None:
                labels.append(_dot_unescape(nm.group(1)))
        index = {label: i for i, label in enumerate(labels)}
        return cls(tuple(labels), kind, tuple((index[s], index[t], w) for s, t, w in edges))

    @classmethod
    def read_dot(cls, path) -> "FilteredGraph":
        return cls.from_dot(Path(path).read_text(encoding="utf-8"))


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _dot_unescape(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s)


def max_planar_edges(n: int) -> int:
    return 3 * (n - 2)


def _planar_filter(n: int, candidates, limit: int) -> list[tuple[int, int, float]]:
    kept: list[tuple[int, int, float]] = []
    undirected: list[tuple[int, int]] = []
    for source, target, weight in candidates:
        if len(kept) >= limit:
            break
        trial = undirected + [(source, target)]
        if is_planar(trial, n):
            kept.append((source, target, weight))
            undirected = trial
    return kept


def _labels_of(M, n) -> tuple[str, ...]:
    return M.labels if hasattr(M, "labels") else tuple(str(i) for i in range(n))


def pmfg(C: CorrelationMatrix, *, absolute: bool = False) -> FilteredGraph:
    """Planar maximally filtered graph of a correlation matrix.

    Pairs are ranked by decreasing correlation (raw values unless
    ``absolute=True``); ties go to the lexicographically smaller index pair.
    """
    Cv = _as_array(C)
    n = Cv.shape[0]
    if n < 3:
        raise DomainError(f"PMFG needs at least 3 nodes, got {n}")
    score = np.abs(Cv) if absolute else Cv
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pairs.sort(key=lambda p: (-score[p[1], p[0]], p[0], p[1]))
    candidates = [(i, j, float(Cv[j, i])) for i, j in pairs]
    return FilteredGraph(_labels_of(C, n), "PMFG", tuple(_planar_filter(n, candidates, max_planar_edges(n))))


def pcpg(D: InfluenceMatrix) -> FilteredGraph:
    """Partial correlation planar graph of an influence matrix.

    For each pair only the larger of ``D[i, j]`` and ``D[j, i]`` enters the
    ranking; element ``D[i, j]`` becomes the directed edge ``j -> i``. Equal
    influences keep ``D[i, j]`` with ``i < j``.
    """
    Dv = _as_array(D)
    n = Dv.shape[0]
    if n < 3:
        raise DomainError(f"PCPG needs at least 3 nodes, got {n}")
    elements = []
    for i in range(n):
        for j in range(i + 1, n):
            if Dv[i, j] >= Dv[j, i]:
                elements.append((float(Dv[i, j]), i, j, j, i))
            else:
                elements.append((float(Dv[j, i]), i, j, i, j))
    elements.sort(key=lambda e: (-e[0], e[1], e[2]))
    candidates = [(source, target, w) for w, _, _, source, target in elements]
    return FilteredGraph(_labels_of(D, n), "PCPG", tuple(_planar_filter(n, candidates, max_planar_edges(n))))


def mst(C: CorrelationMatrix) -> FilteredGraph:
    """Maximum-correlation spanning tree (minimum spanning tree on ``sqrt(2(1-C))``)."""
    Cv = _as_array(C)
    n = Cv.shape[0]
    pairs = sorted(
        ((i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda p: (-Cv[p[1], p[0]], p[0], p[1]),
    )
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = []
    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j, float(Cv[j, i])))
            if len(edges) == n - 1:
                break
    return FilteredGraph(_labels_of(C, n), "MST", tuple(edges))


@dataclass(frozen=True)
class IdentificationReport:
    kind: GraphKind
    N: int
    free_parameters: int
    restrictions: int
    required: int

    @property
    def identified(self) -> bool:
        return self.restrictions >= self.required

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "N": self.N,
            "free_parameters": self.free_parameters,
            "restrictions": self.restrictions,
            "required": self.required,
            "identified": self.identified,
        }


def free_parameter_count(kind: GraphKind, N: int) -> int:
    """Unrestricted entries of B: the diagonal plus one (PCPG) or two (PMFG, MST) per edge."""
    if kind == "PMFG":
        return 2 * 3 * (N - 2) + N
    if kind == "PCPG":
        return 3 * (N - 2) + N
    if kind == "MST":
        return 2 * (N - 1) + N
    raise SchemaError(f"unknown graph kind {kind!r}")


def identification_check(kind: GraphKind, N: int) -> IdentificationReport:
    """Order condition for a B-model restricted to the graph's edges.

    The counts follow the edge-count formulas literally for every ``N``
    (so PMFG at ``N <= 2`` passes arithmetically even though no real graph
    exists there): PMFG is identified iff ``N <= 2`` or ``N >= 11``; PCPG
    for every ``N``.
    """
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    free = free_parameter_count(kind, N)
    return IdentificationReport(kind, N, free, N * N - free, N * (N - 1) // 2)


def build_graph(kind: GraphKind, panel_or_corr, *, absolute: bool = False) -> FilteredGraph:
    """Filter a panel (or a ready correlation/influence matrix) into a graph of ``kind``."""
    from .assoc import influence_from_correlation, pearson_matrix
    from .panel import TimeSeriesPanel

    if isinstance(panel_or_corr, TimeSeriesPanel):
        C = pearson_matrix(panel_or_corr)
    else:
        C = panel_or_corr
    if kind == "PMFG":
        return pmfg(C, absolute=absolute)
    if kind == "PCPG":
        D = C if isinstance(C, InfluenceMatrix) else influence_from_correlation(C)
        return pcpg(D)
    if kind == "MST":
        return mst(C)
    raise SchemaError(f"unknown graph kind {kind!r}")
