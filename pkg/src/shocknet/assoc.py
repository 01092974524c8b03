"""Pearson correlation, first-order partial correlation and directed influence."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import DomainError, SchemaError, SingularityError
from .panel import TimeSeriesPanel

# correlations this close to +-1 are perfect dependence up to rounding
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class _LabeledMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        labels = tuple(str(x) for x in self.labels)
        if v.shape != (len(labels), len(labels)):
            raise SchemaError(f"matrix shape {v.shape} does not match {len(labels)} labels")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def to_dict(self) -> dict:
        return {"kind": type(self).__name__, "labels": list(self.labels), "values": self.values.tolist()}

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([""] + list(self.labels))
            for label, row in zip(self.labels, self.values):
                w.writerow([label] + [repr(float(v)) for v in row])

    @classmethod
    def from_json(cls, path):
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(tuple(d["labels"]), np.array(d["values"], dtype=float))

    @classmethod
    def from_csv(cls, path):
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        labels = tuple(rows[0][1:])
        return cls(labels, np.array([[float(c) for c in r[1:]] for r in rows[1:]]))


class CorrelationMatrix(_LabeledMatrix):
    """Symmetric Pearson correlation matrix with unit diagonal."""

    @property
    def C(self) -> np.ndarray:
        return self.values


class InfluenceMatrix(_LabeledMatrix):
    """``D[i, j]`` is the average influence of node ``j`` on node ``i``.

    The diagonal is stored as zero and never ranked.
    """

    @property
    def D(self) -> np.ndarray:
        return self.values


def pearson_matrix(panel: TimeSeriesPanel) -> CorrelationMatrix:
    """Sample Pearson correlations between the rows of ``panel``.

    Only the lower triangle is computed; it is mirrored so the result is
    exactly symmetric.
    """
    x = panel.data
    xc = x - x.mean(axis=1, keepdims=True)
    ss = np.einsum("it,it->i", xc, xc)
    zero = np.flatnonzero(ss <= 0)
    if zero.size:
        raise DomainError(f"node {panel.labels[zero[0]]!r} has zero sample variance")
    z = xc / np.sqrt(ss)[:, None]
    raw = z @ z.T
    low = np.tril(np.clip(raw, -1.0, 1.0), -1)
    C = low + low.T
    np.fill_diagonal(C, 1.0)
    return CorrelationMatrix(panel.labels, C)


def _as_array(C) -> np.ndarray:
    return C.values if isinstance(C, _LabeledMatrix) else np.asarray(C, dtype=float)


def partial_correlation(C, i: int, j: int, k: int) -> float:
    """Correlation of ``i`` and ``j`` after removing the linear effect of ``k``."""
    C = _as_array(C)
    if len({i, j, k}) != 3:
        raise ValueError(f"indices must be distinct, got ({i}, {j}, {k})")
    cik, cjk = C[i, k], C[j, k]
    if abs(cik) >= 1.0 - UNIT_TOL or abs(cjk) >= 1.0 - UNIT_TOL:
        raise SingularityError(f"perfect correlation with conditioning node {k} in triple ({i}, {j}, {k})")
    return float((C[i, j] - cik * cjk) / (np.sqrt(1.0 - cik**2) * np.sqrt(1.0 - cjk**2)))


def influence_from_correlation(
    C: CorrelationMatrix, *, prefactor: Literal["n-2", "n-1"] = "n-2"
) -> InfluenceMatrix:
    """Average influence ``D[i, j]`` of each node ``j`` on each node ``i``.

    ``d(i, k | j) = C[i, k] - PC[i, k | j]`` measures how much conditioning
    on ``j`` changes the correlation between ``i`` and ``k``. ``D[i, j]``
    averages it over every ``k`` other than ``i`` and ``j``, dividing by
    ``N - 2``. The ``k = i`` term is identically zero, so
    ``prefactor="n-1"`` (sum over all ``k != j``, divided by ``N - 1``)
    gives the same ranking scaled by ``(N - 2) / (N - 1)``.
    """
    Cv = _as_array(C)
    N = Cv.shape[0]
    if N < 3:
        raise DomainError(f"influence needs at least 3 nodes, got {N}")
    off = ~np.eye(N, dtype=bool)
    if np.any(np.abs(Cv[off]) >= 1.0 - UNIT_TOL):
        a, b = np.argwhere((np.abs(Cv) >= 1.0 - UNIT_TOL) & off)[0]
        third = next(k for k in range(N) if k not in (a, b))
        raise SingularityError(
            f"partial correlation undefined for triple (i={third}, k={a}, j={b}): |C[{a},{b}]| = 1"
        )
    D = np.zeros((N, N))
    s = np.sqrt(1.0 - Cv**2)
    for j in range(N):
        # pc[i, k] = PC(i, k | j); row/column j is 0/0 and discarded below
        with np.errstate(divide="ignore", invalid="ignore"):
            pc = (Cv - np.outer(Cv[:, j], Cv[:, j])) / np.outer(s[:, j], s[:, j])
        d = Cv - pc
        d[j, :] = 0.0
        d[:, j] = 0.0
        np.fill_diagonal(d, 0.0)
        D[:, j] = d.sum(axis=1)
    np.fill_diagonal(D, 0.0)
    D /= (N - 2) if prefactor == "n-2" else (N - 1)
    labels = C.labels if isinstance(C, _LabeledMatrix) else tuple(str(i) for i in range(N))
    return InfluenceMatrix(labels, D)


def influence_matrix(panel: TimeSeriesPanel, **kwargs) -> InfluenceMatrix:
    if panel.n_nodes < 3:
        raise DomainError(f"influence needs at least 3 nodes, got {panel.n_nodes}")
    return influence_from_correlation(pearson_matrix(panel), **kwargs)
