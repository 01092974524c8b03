"""Reduced-form vector autoregression.

``x[t] = c + A_1 x[t-1] + ... + A_p x[t-p] + u[t]`` fitted equation by
equation with ordinary least squares.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EstimationError, SchemaError
from .panel import TimeSeriesPanel


@dataclass(frozen=True)
class VarModel:
    labels: tuple[str, ...]
    A: tuple[np.ndarray, ...]
    intercept: np.ndarray
    Sigma_u: np.ndarray
    T_eff: int
    residuals: np.ndarray | None = field(default=None, repr=False)
    Sigma_u_ml: np.ndarray | None = None

    def __post_init__(self):
        A = tuple(np.array(a, dtype=float) for a in self.A)
        N = len(self.labels)
        if not A or any(a.shape != (N, N) for a in A):
            raise SchemaError(f"coefficient matrices must be {N}x{N}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "intercept", np.asarray(self.intercept, dtype=float))
        object.__setattr__(self, "Sigma_u", np.asarray(self.Sigma_u, dtype=float))
        if self.Sigma_u_ml is None:
            object.__setattr__(self, "Sigma_u_ml", self.Sigma_u)

    @property
    def p(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.labels)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "p": self.p,
            "A": [a.tolist() for a in self.A],
            "intercept": self.intercept.tolist(),
            "Sigma_u": self.Sigma_u.tolist(),
            "Sigma_u_ml": self.Sigma_u_ml.tolist(),
            "T_eff": self.T_eff,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VarModel":
        return cls(
            tuple(d["labels"]),
            tuple(np.array(a) for a in d["A"]),
            np.array(d["intercept"]),
            np.array(d["Sigma_u"]),
            int(d["T_eff"]),
            None,
            np.array(d["Sigma_u_ml"]) if "Sigma_u_ml" in d else None,
        )

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path) -> "VarModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _lagged_design(x: np.ndarray, p: int, start: int, intercept: bool) -> tuple[np.ndarray, np.ndarray]:
    N, T = x.shape
    Y = x[:, start:]
    blocks = [np.ones((1, T - start))] if intercept else []
    blocks += [x[:, start - j : T - j] for j in range(1, p + 1)]
    return Y, np.vstack(blocks)


def _collinear_nodes(Z: np.ndarray, labels, p: int, intercept: bool) -> list[str]:
    _, s, vt = np.linalg.svd(Z.T, full_matrices=False)
    tol = s[0] * max(Z.shape) * np.finfo(float).eps
    null = vt[s <= tol]
    if null.size == 0:
        return []
    involved = np.any(np.abs(null) > 1e-8, axis=0)
    offset = 1 if intercept else 0
    names = []
    for idx in np.flatnonzero(involved):
        if idx < offset:
            names.append("<intercept>")
            continue
        lag, node = divmod(idx - offset, len(labels))
        names.append(f"{labels[node]}(t-{lag + 1})")
    return names


def _fit(x, labels, p, start, intercept) -> VarModel:
    N, T = x.shape
    Y, Z = _lagged_design(x, p, start, intercept)
    T_eff = Y.shape[1]
    k = Z.shape[0]
    if T_eff <= k:
        raise EstimationError(f"{T_eff} usable observations cannot identify {k} coefficients per equation")
    if np.linalg.matrix_rank(Z) < k:
        raise EstimationError(
            "regressor matrix is rank deficient; collinear terms: "
            + ", ".join(_collinear_nodes(Z, labels, p, intercept))
        )
    coef, *_ = np.linalg.lstsq(Z.T, Y.T, rcond=None)
    coef = coef.T
    U = Y - coef @ Z
    UU = U @ U.T
    UU = 0.5 * (UU + UU.T)
    c = coef[:, 0] if intercept else np.zeros(N)
    off = 1 if intercept else 0
    A = tuple(coef[:, off + j * N : off + (j + 1) * N].copy() for j in range(p))
    dof = T_eff - N * p - (1 if intercept else 0)
    return VarModel(tuple(labels), A, c, UU / dof, T_eff, U, UU / T_eff)


def fit_var(panel: TimeSeriesPanel, p: int, *, intercept: bool = True) -> VarModel:
    """Least-squares VAR(p).

    ``Sigma_u`` is degrees-of-freedom adjusted, ``U U' / (T_eff - N p - 1)``;
    the maximum-likelihood ``U U' / T_eff`` is kept as ``Sigma_u_ml``.

    Raises
    ------
    EstimationError
        If ``T <= N p + p + 1`` or the lagged regressors are collinear.
    """
    if p < 1:
        raise ValueError(f"lag order must be >= 1, got {p}")
    N, T = panel.data.shape
    if T <= N * p + p + 1:
        raise EstimationError(f"T={T} too short for a VAR({p}) in {N} variables (need T > {N * p + p + 1})")
    return _fit(panel.data, panel.labels, p, p, intercept)


def bic(model: VarModel) -> float:
    """``ln det Sigma_ml + p N^2 ln(T) / T``."""
    sign, logdet = np.linalg.slogdet(model.Sigma_u_ml)
    if sign <= 0:
        return np.inf
    T = model.T_eff
    return float(logdet + np.log(T) / T * model.p * model.n**2)


def select_lag_bic(panel: TimeSeriesPanel, p_max: int, *, intercept: bool = True) -> int:
    """Lag order minimising BIC, every candidate fitted on the last ``T - p_max`` points."""
    if p_max < 1:
        raise ValueError(f"p_max must be >= 1, got {p_max}")
    fit_var(panel, p_max, intercept=intercept)  # feasibility at p_max
    scores = [bic(_fit(panel.data, panel.labels, p, p_max, intercept)) for p in range(1, p_max + 1)]
    return int(np.argmin(scores)) + 1


def wold_coefficients(model, horizon: int) -> list[np.ndarray]:
    """Moving-average matrices ``Phi_0 .. Phi_H``.

    ``Phi_0 = I`` and ``Phi_s = sum_{j=1..s} Phi_{s-j} A_j`` with ``A_j = 0``
    beyond the lag order. ``model`` may also be a sequence of coefficient
    matrices.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    A = model.A if isinstance(model, VarModel) else tuple(np.asarray(a, dtype=float) for a in model)
    N = A[0].shape[0]
    phi = [np.eye(N)]
    for s in range(1, horizon + 1):
        acc = np.zeros((N, N))
        for j in range(1, min(s, len(A)) + 1):
            acc += phi[s - j] @ A[j - 1]
        phi.append(acc)
    return phi


def companion_matrix(A) -> np.ndarray:
    A = A.A if isinstance(A, VarModel) else A
    N = A[0].shape[0]
    p = len(A)
    F = np.zeros((N * p, N * p))
    F[:N, :] = np.hstack(A)
    if p > 1:
        F[N:, :-N] = np.eye(N * (p - 1))
    return F


def check_stability(model) -> tuple[bool, float]:
    """Stable iff the companion matrix has spectral radius below one."""
    radius = float(np.max(np.abs(np.linalg.eigvals(companion_matrix(model)))))
    return radius < 1.0, radius


def simulate_var(A, shocks: np.ndarray, intercept=None, x_init=None) -> np.ndarray:
    """Run ``x[t] = c + sum_j A_j x[t-j] + shocks[:, t]`` forward from zero (or ``x_init``) history.

    ``shocks`` is N x T; returns the N x T path.
    """
    A = A.A if isinstance(A, VarModel) else tuple(np.asarray(a, dtype=float) for a in A)
    N, T = shocks.shape
    p = len(A)
    c = np.zeros(N) if intercept is None else np.asarray(intercept, dtype=float)
    x = np.zeros((N, T + p))
    if x_init is not None:
        x[:, :p] = x_init
    for t in range(T):
        acc = c + shocks[:, t]
        for j in range(p):
            acc = acc + A[j] @ x[:, p + t - 1 - j]
        x[:, p + t] = acc
    return x[:, p:]
