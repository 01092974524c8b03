"""Time-series panels and the preprocessing that makes them stationary.

A panel is an N x T matrix: one row per node, one column per time point.
Three transforms are provided: log-returns, the Hodrick-Prescott cycle and
GARCH(1,1) latent volatility.
"""

from __future__ import annotations

import csv
import datetime as _dt
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy import sparse
from scipy.linalg import solveh_banded
from scipy.signal import lfilter

from .errors import (
    BoundaryWarning,
    DomainError,
    EstimationError,
    MissingDataError,
    ParseError,
    SchemaError,
)

Frequency = Literal["quarterly", "monthly", "other"]

HP_LAMBDA_DEFAULTS = {"quarterly": 1600.0, "monthly": 129600.0, "other": 1600.0}

_MISSING_TOKENS = {"", "na", "nan", "n/a", "null", "none", "."}


@dataclass(frozen=True)
class TimeSeriesPanel:
    """Aligned observations for N labelled nodes over T time points.

    ``data`` is stored read-only; derive new panels instead of mutating.
    ``provenance`` is a tuple of human-readable notes describing how the
    panel was produced (dropped date column, forward fills, transforms).
    """

    labels: tuple[str, ...]
    data: np.ndarray
    frequency: Frequency = "other"
    provenance: tuple[str, ...] = field(default=())
    dates: tuple[str, ...] | None = None

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim != 2:
            raise SchemaError(f"panel data must be 2-D (nodes x time), got shape {data.shape}")
        if len(labels) != data.shape[0]:
            raise SchemaError(f"{len(labels)} labels for {data.shape[0]} rows")
        if len(set(labels)) != len(labels):
            dup = sorted({x for x in labels if labels.count(x) > 1})
            raise SchemaError(f"duplicate node labels: {dup}")
        if data.shape[1] < 2:
            raise SchemaError("a panel needs at least two time points")
        if not np.all(np.isfinite(data)):
            raise MissingDataError("panel contains missing or non-finite values")
        if self.frequency not in HP_LAMBDA_DEFAULTS:
            raise SchemaError(f"unknown frequency {self.frequency!r}")
        data.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if self.dates is not None:
            object.__setattr__(self, "dates", tuple(self.dates))

    @property
    def n_nodes(self) -> int:
        return self.data.shape[0]

    @property
    def n_obs(self) -> int:
        return self.data.shape[1]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LookupError(f"unknown node label {label!r}") from None

    def derive(self, data, note: str, *, dates=None) -> "TimeSeriesPanel":
        """Return a new panel with the same labels and an extra provenance note."""
        return TimeSeriesPanel(
            self.labels, data, self.frequency, self.provenance + (note,), dates
        )


def _is_iso_date(text: str) -> bool:
    text = text.strip()
    if not text:
        return False
    try:
        _dt.date.fromisoformat(text)
        return True
    except ValueError:
        pass
    try:
        _dt.datetime.fromisoformat(text)
        return True
    except ValueError:
        return False


def load_panel(
    path,
    *,
    missing: Literal["reject", "ffill"] = "reject",
    frequency: Frequency = "other",
    delimiter: str = ",",
) -> TimeSeriesPanel:
    """Read a CSV file laid out as one time point per row.

    The header row carries node labels. If every cell in the first column is
    an ISO-8601 date, that column is dropped and recorded in provenance.

    Parameters
    ----------
    path : path-like
        UTF-8 CSV file.
    missing : {"reject", "ffill"}
        ``"reject"`` raises :class:`MissingDataError` on any empty cell;
        ``"ffill"`` carries the previous observation forward and notes each
        filled cell in the panel provenance.
    frequency : {"quarterly", "monthly", "other"}
        Stored on the panel; selects the default HP smoothing parameter.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise ParseError(f"{path}: need a header row and at least one data row")

    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    width = len(header)
    for lineno, row in enumerate(body, start=2):
        if len(row) != width:
            raise ParseError(f"{path}: line {lineno} has {len(row)} fields, expected {width}")

    provenance = [f"loaded from {path.name}"]
    dates = None
    if all(_is_iso_date(row[0]) for row in body):
        dates = [row[0].strip() for row in body]
        provenance.append(f"dropped date column {header[0] or '<unnamed>'!r}")
        header = header[1:]
        body = [row[1:] for row in body]
        col_offset = 1
    else:
        col_offset = 0

    if not header:
        raise SchemaError(f"{path}: no data columns")
    if len(set(header)) != len(header):
        dup = sorted({x for x in header if header.count(x) > 1})
        raise SchemaError(f"{path}: duplicate node labels {dup}")

    T, N = len(body), len(header)
    values = np.empty((T, N))
    holes = []
    for t, row in enumerate(body):
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell.lower() in _MISSING_TOKENS:
                values[t, j] = np.nan
                holes.append((t, j))
                continue
            try:
                values[t, j] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric value {cell!r} at line {t + 2}, "
                    f"column {j + 1 + col_offset} ({header[j]})"
                ) from None
            if not math.isfinite(values[t, j]):
                raise ParseError(f"{path}: non-finite value at line {t + 2}, column {header[j]}")

    if holes:
        if missing == "reject":
            t, j = holes[0]
            raise MissingDataError(
                f"{path}: {len(holes)} missing cell(s), first at line {t + 2}, column {header[j]}"
            )
        if missing != "ffill":
            raise ValueError(f"unknown missing-data policy {missing!r}")
        for t, j in holes:
            if t == 0:
                raise MissingDataError(
                    f"{path}: cannot forward-fill column {header[j]}: first observation missing"
                )
            values[t, j] = values[t - 1, j]
            provenance.append(f"forward-filled {header[j]} at row {t + 1}")

    return TimeSeriesPanel(tuple(header), values.T, frequency, tuple(provenance), dates)


def write_panel(panel: TimeSeriesPanel, path) -> None:
    """Write ``panel`` in the layout :func:`load_panel` reads."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        lead = ["date"] if panel.dates is not None else []
        w.writerow(lead + list(panel.labels))
        for t in range(panel.n_obs):
            row = [panel.dates[t]] if panel.dates is not None else []
            w.writerow(row + [repr(float(v)) for v in panel.data[:, t]])


def log_returns(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Per-node log-returns ``ln(x[t+1] / x[t])``; the panel loses one column."""
    x = panel.data
    if np.any(x <= 0):
        i, t = np.argwhere(x <= 0)[0]
        raise DomainError(
            f"log-returns need strictly positive values; {panel.labels[i]} has {x[i, t]} at t={t}"
        )
    r = np.diff(np.log(x), axis=1)
    dates = panel.dates[1:] if panel.dates is not None else None
    return panel.derive(r, "log_returns", dates=dates)


def standardize(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Z-score each node (zero mean, unit sample standard deviation)."""
    x = panel.data
    sd = x.std(axis=1, ddof=1, keepdims=True)
    if np.any(sd == 0):
        bad = [panel.labels[i] for i in np.flatnonzero(sd.ravel() == 0)]
        raise DomainError(f"cannot standardize zero-variance nodes: {bad}")
    return panel.derive((x - x.mean(axis=1, keepdims=True)) / sd, "standardized", dates=panel.dates)


def _second_difference(T: int) -> sparse.csr_matrix:
    return sparse.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(T - 2, T), format="csr")


def hp_filter(series, lamb: float = 1600.0) -> tuple[np.ndarray, np.ndarray]:
    """Hodrick-Prescott trend/cycle decomposition.

    The trend solves the symmetric pentadiagonal system
    ``(I + lamb * D'D) trend = y`` where ``D`` takes second differences; it is
    solved in banded Cholesky form in O(T).

    Returns
    -------
    trend, cycle : ndarray
        ``cycle = series - trend``.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise DomainError("hp_filter expects a 1-D series")
    if y.size < 4:
        raise DomainError(f"hp_filter needs at least 4 observations, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise DomainError("hp_filter input contains non-finite values")
    if not lamb > 0:
        raise DomainError(f"smoothing parameter must be positive, got {lamb}")
    T = y.size
    D = _second_difference(T)
    M = (lamb * (D.T @ D)).todia()
    # upper form for solveh_banded: row 0 = 2nd superdiagonal, row 2 = main diagonal
    ab = np.zeros((3, T))
    ab[0, 2:] = M.diagonal(2)
    ab[1, 1:] = M.diagonal(1)
    ab[2, :] = M.diagonal(0) + 1.0
    trend = solveh_banded(ab, y)
    return trend, y - trend


def hp_cycle(
    panel: TimeSeriesPanel, lamb: float | None = None, *, log: bool = True
) -> TimeSeriesPanel:
    """Replace every node by its HP cycle.

    ``lamb`` defaults to 1600 for quarterly data and 129600 for monthly data;
    other frequencies fall back to 1600.
    With ``log=True`` (default) the series is logged before filtering, so
    the cycle reads as a proportional deviation from trend.
    """
    if lamb is None:
        lamb = HP_LAMBDA_DEFAULTS[panel.frequency]
    x = panel.data
    if log:
        if np.any(x <= 0):
            raise DomainError("log-then-filter needs strictly positive series; pass log=False")
        x = np.log(x)
    cycles = np.vstack([hp_filter(row, lamb)[1] for row in x])
    note = f"hp_cycle(lambda={lamb:g}, log={log})"
    return panel.derive(cycles, note, dates=panel.dates)


# -- GARCH(1,1) ---------------------------------------------------------------


@dataclass(frozen=True)
class GarchFit:
    c_bar: float
    alpha: float
    beta: float
    loglik: float
    sigma_series: np.ndarray
    mean: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def persistence(self) -> float:
        return self.alpha + self.beta


def garch11_variance(returns, c_bar: float, alpha: float, beta: float, sigma0_sq: float) -> np.ndarray:
    """Conditional variances ``s2[t] = c_bar + alpha*r[t-1]**2 + beta*s2[t-1]``.

    ``s2[0]`` is ``sigma0_sq``. ``returns`` must already be demeaned.
    """
    r = np.asarray(returns, dtype=float)
    s2 = np.empty(r.size)
    s2[0] = sigma0_sq
    if r.size > 1:
        drive = c_bar + alpha * r[:-1] ** 2
        s2[1:], _ = lfilter([1.0], [1.0, -beta], drive, zi=[beta * sigma0_sq])
    return s2


def _garch_unpack(theta) -> tuple[float, float, float]:
    log_c, a, b = theta
    persistence = 1.0 / (1.0 + math.exp(-a))
    share = 1.0 / (1.0 + math.exp(-b))
    return math.exp(log_c), persistence * share, persistence * (1.0 - share)


def _garch_pack(c_bar: float, alpha: float, beta: float) -> np.ndarray:
    s = alpha + beta
    w = alpha / s
    return np.array([math.log(c_bar), math.log(s / (1 - s)), math.log(w / (1 - w))])


def _garch_nll(theta, r, sigma0_sq) -> float:
    try:
        c_bar, alpha, beta = _garch_unpack(theta)
    except OverflowError:
        return 1e12
    s2 = garch11_variance(r, c_bar, alpha, beta, sigma0_sq)
    if not np.all(s2 > 0) or not np.all(np.isfinite(s2)):
        return 1e12
    return 0.5 * float(np.sum(np.log(2 * np.pi) + np.log(s2) + r**2 / s2))


def garch11_fit(
    returns,
    *,
    starts: Sequence[tuple[float, float]] = ((0.05, 0.10), (0.10, 0.80), (0.05, 0.93)),
    max_iter: int = 500,
    tie_tol: float = 1e-3,
) -> GarchFit:
    """Gaussian maximum-likelihood GARCH(1,1) fit.

    The series is demeaned first and the variance recursion starts at the
    sample variance. Parameters are searched in an unconstrained space:
    ``log(c_bar)``, the logit of ``alpha + beta`` and the logit of
    ``alpha / (alpha + beta)``, which keeps ``c_bar > 0``, both coefficients
    non-negative and the process covariance-stationary. Each pair in
    ``starts`` is an ``(alpha, beta)`` starting point; ``c_bar`` starts at
    ``var * (1 - alpha - beta)``. Optima whose negative log-likelihood is
    within ``tie_tol`` of the best are treated as equivalent and the least
    persistent one is returned.

    Raises
    ------
    EstimationError
        If the series is degenerate or no start converges to a finite value.
    """
    from .optimize import bfgs_minimize, nelder_mead_minimize

    r = np.asarray(returns, dtype=float)
    if r.ndim != 1 or r.size < 3:
        raise EstimationError("GARCH(1,1) needs a 1-D series of at least 3 returns")
    if not np.all(np.isfinite(r)):
        raise EstimationError("GARCH(1,1) input contains non-finite values")
    diagnostics: dict = {"warnings": []}
    if r.size < 100:
        msg = f"only {r.size} observations; GARCH(1,1) estimates will be unreliable"
        warnings.warn(msg, UserWarning, stacklevel=2)
        diagnostics["warnings"].append(msg)
    mu = float(r.mean())
    r = r - mu
    var = float(r.var())
    if not var > 0:
        raise EstimationError("degenerate likelihood: returns have zero variance")

    def f(theta):
        return _garch_nll(theta, r, var)

    runs = []
    for alpha0, beta0 in starts:
        x0 = _garch_pack(var * (1 - alpha0 - beta0), alpha0, beta0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            x, fx, _ = bfgs_minimize(f, x0, max_iter=max_iter, gtol=1e-6 * r.size)
            x, fx, _ = nelder_mead_minimize(f, x, max_iter=max_iter, tol=1e-10)
        runs.append({"start": (alpha0, beta0), "nll": fx, "x": x})
    ok = [run for run in runs if np.isfinite(run["nll"]) and run["nll"] < 1e12]
    if not ok:
        raise EstimationError("GARCH(1,1) optimisation failed from every start")
    # with alpha near 0, beta only shapes the decay from sigma0^2 and the surface is
    # flat along it: among likelihood-equivalent optima keep the least persistent
    floor = min(run["nll"] for run in ok)
    tied = [run for run in ok if run["nll"] <= floor + tie_tol]
    chosen = min(tied, key=lambda run: sum(_garch_unpack(run["x"])[1:]))
    best = (chosen["x"], chosen["nll"])
    for run in runs:
        run["x"] = list(map(float, run["x"]))

    c_bar, alpha, beta = _garch_unpack(best[0])
    diagnostics["runs"] = runs
    if alpha + beta > 0.999 or alpha < 1e-6 or beta < 1e-6:
        msg = (
            f"estimate on the parameter boundary (alpha={alpha:.3g}, beta={beta:.3g}, "
            f"alpha+beta={alpha + beta:.6f})"
        )
        diagnostics["warnings"].append(msg)
        diagnostics["boundary"] = BoundaryWarning.__name__
    sigma = np.sqrt(garch11_variance(r, c_bar, alpha, beta, var))
    return GarchFit(c_bar, alpha, beta, -best[1], sigma, mu, diagnostics)


def garch11_simulate(
    T: int, c_bar: float, alpha: float, beta: float, rng: np.random.Generator, burn: int = 500
) -> np.ndarray:
    """Simulate ``T`` Gaussian GARCH(1,1) returns after a burn-in."""
    if not alpha + beta < 1:
        raise DomainError("alpha + beta must be < 1")
    eps = rng.standard_normal(T + burn)
    r = np.empty(T + burn)
    s2 = c_bar / (1 - alpha - beta)
    for t in range(T + burn):
        r[t] = math.sqrt(s2) * eps[t]
        s2 = c_bar + alpha * r[t] ** 2 + beta * s2
    return r[burn:]


def garch_volatility(panel: TimeSeriesPanel, **kwargs) -> tuple[TimeSeriesPanel, dict[str, GarchFit]]:
    """Fit GARCH(1,1) to each node and return the panel of latent volatilities."""
    fits = {label: garch11_fit(row, **kwargs) for label, row in zip(panel.labels, panel.data)}
    vol = np.vstack([fits[label].sigma_series for label in panel.labels])
    return panel.derive(vol, "garch11_volatility", dates=panel.dates), fits
