"""B-type structural VAR identified by a filtered graph.

Reduced-form errors are written ``u[t] = B eps[t]`` with ``E[eps eps'] = I``.
Entries of ``B`` that correspond to missing graph edges are fixed at zero and
the remaining ones maximise the Gaussian likelihood

    log L(B) = -(N T / 2) ln(2 pi) - (T / 2) ln |B|^2 - (T / 2) tr(B^-T B^-1 S)

where ``S`` is the maximum-likelihood residual covariance. Because the
surface can be flat or multi-modal the search is multistart: every start is
refined by a chain of warm-restarted local optimisations.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, EstimationError, IdentificationError, SchemaError, SingularityError
from .optimize import bfgs_minimize, nelder_mead_minimize
from .planar import FilteredGraph, identification_check
from .var import VarModel, check_stability, wold_coefficients

PENALTY = 1e12
_LOG_DET_FLOOR = math.log(1e-12)
METHODS = ("nelder-mead", "bfgs")


@dataclass(frozen=True)
class RestrictionMask:
    """``free[i, j]`` is True where ``B[i, j]`` is estimated."""

    free: np.ndarray

    def __post_init__(self):
        free = np.array(self.free, dtype=bool, copy=True)
        if free.ndim != 2 or free.shape[0] != free.shape[1]:
            raise SchemaError("mask must be square")
        if not np.all(np.diag(free)):
            raise SchemaError("diagonal entries of B must be free")
        free.setflags(write=False)
        object.__setattr__(self, "free", free)

    @property
    def N(self) -> int:
        return self.free.shape[0]

    @property
    def n_free(self) -> int:
        return int(self.free.sum())

    def to_dict(self) -> dict:
        return {"N": self.N, "free": self.free.astype(int).tolist()}


def restriction_mask(graph: FilteredGraph) -> RestrictionMask:
    """Zero restrictions on ``B`` implied by ``graph``.

    A directed edge ``j -> i`` frees ``B[i, j]`` only; an undirected edge
    frees both ``B[i, j]`` and ``B[j, i]``. The diagonal is always free.

    Raises
    ------
    IdentificationError
        If the graph kind supplies fewer than ``N (N - 1) / 2`` restrictions
        at this node count.
    """
    report = identification_check(graph.kind, graph.n)
    if not report.identified:
        raise IdentificationError(
            f"{graph.kind} with N={graph.n} leaves {report.restrictions} zero restrictions; "
            f"identification needs {report.required}",
            report,
        )
    free = np.eye(graph.n, dtype=bool)
    for s, t, _ in graph.edges:
        free[t, s] = True
        if not graph.directed:
            free[s, t] = True
    return RestrictionMask(free)


def svar_loglik(B, Sigma_u_ml, T: int) -> float:
    """Gaussian log-likelihood of the B-model at ``B``.

    Raises
    ------
    SingularityError
        If ``|det B| < 1e-12``.
    """
    B = np.asarray(B, dtype=float)
    S = np.asarray(Sigma_u_ml, dtype=float)
    N = B.shape[0]
    sign, logabsdet = np.linalg.slogdet(B)
    if sign == 0 or logabsdet < _LOG_DET_FLOOR:
        raise SingularityError("B is singular (|det B| < 1e-12)")
    Binv = np.linalg.inv(B)
    quad = np.trace(Binv.T @ Binv @ S)
    return float(-0.5 * N * T * math.log(2 * math.pi) - T * logabsdet - 0.5 * T * quad)


class _Objective:
    """Average negative log-likelihood over the free entries of B (constant dropped).

    Picklable so the multistart fan-out can ship it to worker processes.
    """

    def __init__(self, Sigma: np.ndarray, free: np.ndarray):
        self.Sigma = np.asarray(Sigma, dtype=float)
        self.free = np.asarray(free, dtype=bool)
        self.N = self.free.shape[0]

    def B(self, theta) -> np.ndarray:
        B = np.zeros((self.N, self.N))
        B[self.free] = theta
        return B

    def _parts(self, theta):
        B = self.B(theta)
        sign, logabsdet = np.linalg.slogdet(B)
        if sign == 0 or logabsdet < _LOG_DET_FLOOR:
            return None
        Binv = np.linalg.inv(B)
        return logabsdet, Binv

    def __call__(self, theta) -> float:
        parts = self._parts(theta)
        if parts is None:
            return PENALTY
        logabsdet, Binv = parts
        return float(logabsdet + 0.5 * np.trace(Binv.T @ Binv @ self.Sigma))

    def gradient(self, theta) -> np.ndarray:
        parts = self._parts(theta)
        if parts is None:
            return np.zeros(len(theta))
        _, Binv = parts
        BinvT = Binv.T
        G = BinvT - BinvT @ Binv @ self.Sigma @ BinvT
        return G[self.free]

    def full_value(self, f: float, T: int) -> float:
        """Map an objective value back to the full negative log-likelihood."""
        return T * f + 0.5 * self.N * T * math.log(2 * math.pi)


def svar_neg_loglik_gradient(B, Sigma_u_ml, T: int) -> np.ndarray:
    """Gradient of ``-log L`` with respect to every entry of ``B``."""
    B = np.asarray(B, dtype=float)
    Binv = np.linalg.inv(B)
    return T * (Binv.T - Binv.T @ Binv @ np.asarray(Sigma_u_ml) @ Binv.T)


@dataclass(frozen=True)
class RunRecord:
    method: str
    start: int
    seed: tuple[int, ...]
    invocations: int
    iterations: int
    n_evals: int
    trace: tuple[float, ...]
    final_value: float
    warnings: int = 0

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["seed"] = list(self.seed)
        d["trace"] = list(self.trace)
        return d


@dataclass(frozen=True)
class SvarModel:
    var: VarModel
    mask: RestrictionMask
    B: np.ndarray
    loglik: float
    diagnostics: tuple[RunRecord, ...] = field(default=(), repr=False)
    best_run: int = 0

    @property
    def implied_covariance(self) -> np.ndarray:
        return self.B @ self.B.T

    def to_dict(self) -> dict:
        return {
            "labels": list(self.var.labels),
            "B": self.B.tolist(),
            "mask": self.mask.to_dict(),
            "loglik": self.loglik,
            "best_run": self.best_run,
            "var": self.var.to_dict(),
            "runs": [r.to_dict() for r in self.diagnostics],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvarModel":
        runs = tuple(
            RunRecord(**{**r, "seed": tuple(r["seed"]), "trace": tuple(r["trace"])}) for r in d.get("runs", [])
        )
        return cls(
            VarModel.from_dict(d["var"]),
            RestrictionMask(np.array(d["mask"]["free"], dtype=bool)),
            np.array(d["B"], dtype=float),
            float(d["loglik"]),
            runs,
            int(d.get("best_run", 0)),
        )

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path) -> "SvarModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def starting_point(Sigma: np.ndarray, free: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Off-diagonal free entries uniform on [-0.5, 0.5]; diagonal at ``sqrt(diag(Sigma))``."""
    N = free.shape[0]
    B0 = np.zeros((N, N))
    B0[free] = rng.uniform(-0.5, 0.5, size=int(free.sum()))
    B0[np.diag_indices(N)] = np.sqrt(np.diag(Sigma))
    return B0[free]


def _run_chain(objective: _Objective, x0, method: str, n_restarts: int, options: dict):
    x = np.asarray(x0, dtype=float)
    values = []
    iterations = evals = n_warn = 0
    for _ in range(n_restarts):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if method == "nelder-mead":
                x, fx, tr = nelder_mead_minimize(
                    objective, x, max_iter=options["nm_max_iter"], tol=options["nm_tol"]
                )
            elif method == "bfgs":
                x, fx, tr = bfgs_minimize(
                    objective, x, grad=objective.gradient,
                    max_iter=options["bfgs_max_iter"], gtol=options["bfgs_gtol"],
                )
            else:
                raise ValueError(f"unknown method {method!r}")
        n_warn += len(caught)
        iterations += tr.iterations
        evals += tr.n_evals
        values.append(fx)
    return x, values, iterations, evals, n_warn


def _start_task(args):
    Sigma, free, T, seed, start, methods, n_restarts, options = args
    objective = _Objective(Sigma, free)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(start,)))
    x0 = starting_point(Sigma, free, rng)
    out = []
    for method in methods:
        try:
            x, values, iters, evals, n_warn = _run_chain(objective, x0, method, n_restarts, options)
        except DomainError:
            x, values, iters, evals, n_warn = x0, [PENALTY], 0, 0, 1
        trace = tuple(objective.full_value(v, T) for v in values)
        record = RunRecord(method, start, (seed, start), n_restarts, iters, evals, trace, trace[-1], n_warn)
        out.append((record, x))
    return out


def normalize_signs(B: np.ndarray) -> np.ndarray:
    """Flip columns so the diagonal is non-negative; the likelihood is unchanged."""
    B = np.array(B, dtype=float)
    flip = np.diag(B) < 0
    B[:, flip] *= -1.0
    B[B == 0] = 0.0  # no negative zeros in masked entries
    return B


def estimate_svar_multistart(
    var: VarModel,
    mask: RestrictionMask,
    *,
    n_starts: int = 25,
    n_restarts: int = 30,
    methods: Sequence[str] = METHODS,
    seed: int = 0,
    nm_max_iter: int = 500,
    nm_tol: float = 1e-10,
    bfgs_max_iter: int = 200,
    bfgs_gtol: float = 1e-8,
    n_jobs: int = 1,
) -> SvarModel:
    """Maximum-likelihood ``B`` under ``mask`` by multistart local search.

    Each of ``n_starts`` random starting points is refined, separately with
    every method in ``methods``, by ``n_restarts`` chained invocations that
    each resume from the previous optimum. The best final value across all
    runs wins, ties going to the earlier run. Start ``k`` always uses the
    same seed, so adding starts can only improve the result.

    ``n_jobs > 1`` evaluates starts in worker processes; results do not
    depend on scheduling.
    """
    if mask.N != var.n:
        raise SchemaError(f"mask is {mask.N}x{mask.N} but the VAR has {var.n} variables")
    required = mask.N * (mask.N - 1) // 2
    if mask.N * mask.N - mask.n_free < required:
        raise IdentificationError(
            f"mask frees {mask.n_free} entries; identification allows at most {mask.N * mask.N - required}"
        )
    stable, radius = check_stability(var)
    if not stable:
        raise EstimationError(f"VAR is not stable (spectral radius {radius:.4f})")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    Sigma = var.Sigma_u_ml
    T = var.T_eff
    options = {"nm_max_iter": nm_max_iter, "nm_tol": nm_tol, "bfgs_max_iter": bfgs_max_iter, "bfgs_gtol": bfgs_gtol}
    tasks = [(Sigma, mask.free, T, seed, k, tuple(methods), n_restarts, options) for k in range(n_starts)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_start_task, tasks))
    else:
        results = [_start_task(t) for t in tasks]

    records, solutions = [], []
    for per_start in results:
        for record, x in per_start:
            records.append(record)
            solutions.append(x)
    # group diagnostics by method, then start, independent of execution order
    order = sorted(range(len(records)), key=lambda i: (list(methods).index(records[i].method), records[i].start))
    records = [records[i] for i in order]
    solutions = [solutions[i] for i in order]
    finals = np.array([r.final_value for r in records])
    if not np.any(finals < PENALTY):
        raise EstimationError(f"all {len(records)} optimisation runs failed")
    best = int(np.argmin(finals))
    B = normalize_signs(_Objective(Sigma, mask.free).B(solutions[best]))
    return SvarModel(var, mask, B, svar_loglik(B, Sigma, T), tuple(records), best)


def cholesky_orthogonalize(Sigma_u) -> np.ndarray:
    """Lower-triangular ``P`` with positive diagonal and ``P P' = Sigma_u``."""
    S = np.asarray(Sigma_u, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError("covariance must be square")
    if not np.allclose(S, S.T, rtol=0, atol=1e-12 * max(1.0, np.abs(S).max())):
        raise DomainError("covariance is not symmetric")
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise DomainError("covariance is not positive definite") from None


ShockKind = Literal["structural_B", "cholesky_P"]


@dataclass(frozen=True)
class IrfResult:
    """``theta[s][i, j]``: response of node ``i`` at horizon ``s`` to a unit shock at ``j``."""

    labels: tuple[str, ...]
    theta: np.ndarray
    shock_kind: ShockKind

    def __post_init__(self):
        th = np.array(self.theta, dtype=float, copy=True)
        if th.ndim != 3 or th.shape[1:] != (len(self.labels),) * 2:
            raise SchemaError(f"theta must be (H+1, N, N); got {th.shape}")
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def horizon(self) -> int:
        return self.theta.shape[0] - 1

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "horizon": self.horizon,
            "shock_kind": self.shock_kind,
            "theta": self.theta.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IrfResult":
        return cls(tuple(d["labels"]), np.array(d["theta"]), d["shock_kind"])

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path) -> "IrfResult":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_csv(self, path) -> None:
        """Long format: one ``node, epicenter, horizon, value`` row per entry."""
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "epicenter", "horizon", "value"])
            for j, epi in enumerate(self.labels):
                for s in range(self.horizon + 1):
                    for i, node in enumerate(self.labels):
                        w.writerow([node, epi, s, repr(float(self.theta[s, i, j]))])

    @classmethod
    def from_csv(cls, path, shock_kind: ShockKind = "structural_B") -> "IrfResult":
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        labels: list[str] = []
        for r in rows:
            if r["node"] not in labels:
                labels.append(r["node"])
        index = {label: i for i, label in enumerate(labels)}
        H = max(int(r["horizon"]) for r in rows)
        theta = np.zeros((H + 1, len(labels), len(labels)))
        for r in rows:
            theta[int(r["horizon"]), index[r["node"]], index[r["epicenter"]]] = float(r["value"])
        return cls(tuple(labels), theta, shock_kind)


def structural_irf(
    var: VarModel,
    impact,
    H: int,
    *,
    shock_kind: ShockKind = "structural_B",
    scale: Literal["shock", "own_unit"] = "shock",
) -> IrfResult:
    """Impulse responses ``theta[s] = Phi_s @ impact`` for ``s = 0..H``.

    ``impact`` is the structural ``B`` or the Cholesky factor ``P``. With
    ``scale="shock"`` each column is a one-unit structural shock, which is
    one standard deviation because shocks have unit variance. With
    ``scale="own_unit"`` each column is rescaled so the epicenter's own
    impact response is one unit of the data.
    """
    impact = np.asarray(impact, dtype=float)
    if scale == "own_unit":
        d = np.diag(impact)
        if np.any(d == 0):
            raise DomainError("own_unit scaling needs a nonzero impact diagonal")
        impact = impact / d
    elif scale != "shock":
        raise ValueError(f"unknown scale {scale!r}")
    phi = wold_coefficients(var, H)
    theta = np.stack([impact.copy()] + [phi[s] @ impact for s in range(1, H + 1)])
    return IrfResult(var.labels, theta, shock_kind)


class TraceRow(NamedTuple):
    node: str
    horizon: int
    response: float


def shock_trace(irf: IrfResult, epicenter: str, horizons: Sequence[int] | None = None) -> list[TraceRow]:
    """Responses of every node to a unit shock at ``epicenter``.

    Rows are sorted by horizon, then by decreasing absolute response (ties
    in node order).
    """
    if epicenter not in irf.labels:
        raise LookupError(f"unknown epicenter {epicenter!r}")
    j = irf.labels.index(epicenter)
    horizons = range(irf.horizon + 1) if horizons is None else sorted(horizons)
    rows = []
    for h in horizons:
        if not 0 <= h <= irf.horizon:
            raise ValueError(f"horizon {h} outside 0..{irf.horizon}")
        col = irf.theta[h, :, j]
        order = sorted(range(len(col)), key=lambda i: (-abs(col[i]), i))
        rows.extend(TraceRow(irf.labels[i], int(h), float(col[i])) for i in order)
    return rows
