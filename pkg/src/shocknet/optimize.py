"""Local minimisers used by the likelihood estimators.

Both routines return ``(x_best, f_best, trace)``. They never raise on slow
convergence; the trace says whether the stopping rule was met.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceWarning, DomainError

Objective = Callable[[np.ndarray], float]


@dataclass
class OptimizeTrace:
    method: str
    iterations: int = 0
    n_evals: int = 0
    converged: bool = False
    message: str = ""
    history: list[float] = field(default_factory=list)


def finite_difference_gradient(f: Objective, x, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with step ``rel_step * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def nelder_mead_minimize(
    f: Objective,
    x0,
    *,
    max_iter: int = 1000,
    tol: float = 1e-10,
    initial_step=None,
) -> tuple[np.ndarray, float, OptimizeTrace]:
    """Downhill simplex search.

    Uses reflection 1, expansion 2, contraction 0.5 and shrink 0.5. The
    initial simplex perturbs each coordinate of ``x0`` by ``initial_step``
    (default: 5% of the coordinate, or 0.00025 when it is zero). Stops when
    the spread of function values over the simplex falls below ``tol`` or
    after ``max_iter`` iterations. ``x0`` is a vertex of the first simplex,
    so the returned value never exceeds ``f(x0)``.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    trace = OptimizeTrace("nelder-mead")

    def fe(x):
        trace.n_evals += 1
        v = float(f(x))
        return v if math.isfinite(v) else math.inf

    f0 = fe(x0)
    if not math.isfinite(f0):
        raise DomainError("objective is not finite at the starting point")

    if initial_step is None:
        step = np.where(x0 != 0, 0.05 * x0, 0.00025)
    else:
        step = np.broadcast_to(np.asarray(initial_step, dtype=float), (n,))
    simplex = np.vstack([x0] + [x0 + step[i] * np.eye(n)[i] for i in range(n)])
    fvals = np.array([f0] + [fe(v) for v in simplex[1:]])

    rho, chi, gamma, sigma = 1.0, 2.0, 0.5, 0.5
    for it in range(max_iter):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        trace.history.append(float(fvals[0]))
        if fvals[-1] - fvals[0] < tol:
            trace.converged = True
            trace.message = "simplex function spread below tolerance"
            break
        trace.iterations = it + 1
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + rho * (centroid - worst)
        fr = fe(xr)
        if fr < fvals[0]:
            xe = centroid + chi * (xr - centroid)
            fe_ = fe(xe)
            if fe_ < fr:
                simplex[-1], fvals[-1] = xe, fe_
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + gamma * (xr - centroid)
            fc = fe(xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + gamma * (worst - centroid)
            fc = fe(xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        best = simplex[0]
        simplex[1:] = best + sigma * (simplex[1:] - best)
        fvals[1:] = [fe(v) for v in simplex[1:]]
    else:
        trace.message = "maximum iterations reached"

    i = int(np.argmin(fvals))
    return simplex[i].copy(), float(fvals[i]), trace


def _wolfe_line_search(phi, phi0, dphi0, alpha1, c1=1e-4, c2=0.9, max_iter=40):
    """Strong-Wolfe step length (bracketing then zoom).

    ``phi(alpha)`` returns ``(value, directional_derivative, payload)``.
    Returns ``(alpha, value, payload)`` or ``None`` on failure.
    """

    def zoom(lo, hi, phi_lo, dphi_lo, payload_lo, phi_hi):
        for _ in range(max_iter):
            d = hi - lo
            denom = 2.0 * (phi_hi - phi_lo - dphi_lo * d)
            a = lo - dphi_lo * d * d / denom if denom > 0 else lo + 0.5 * d
            a_min, a_max = sorted((lo + 0.1 * d, hi - 0.1 * d))
            if not (a_min <= a <= a_max) or not math.isfinite(a):
                a = lo + 0.5 * d
            phi_a, dphi_a, payload = phi(a)
            if phi_a > phi0 + c1 * a * dphi0 or phi_a >= phi_lo:
                hi, phi_hi = a, phi_a
            else:
                if abs(dphi_a) <= -c2 * dphi0:
                    return a, phi_a, payload
                if dphi_a * (hi - lo) >= 0:
                    hi, phi_hi = lo, phi_lo
                lo, phi_lo, dphi_lo, payload_lo = a, phi_a, dphi_a, payload
            if abs(hi - lo) <= 1e-14 * max(1.0, abs(lo)):
                break
        # settle for sufficient decrease if the curvature test never passed
        if lo > 0 and phi_lo < phi0 + c1 * lo * dphi0:
            return lo, phi_lo, payload_lo
        return None

    a_prev, phi_prev, dphi_prev, payload_prev = 0.0, phi0, dphi0, None
    a = alpha1
    for i in range(max_iter):
        phi_a, dphi_a, payload = phi(a)
        if phi_a > phi0 + c1 * a * dphi0 or (i > 0 and phi_a >= phi_prev):
            return zoom(a_prev, a, phi_prev, dphi_prev, payload_prev, phi_a)
        if abs(dphi_a) <= -c2 * dphi0:
            return a, phi_a, payload
        if dphi_a >= 0:
            return zoom(a, a_prev, phi_a, dphi_a, payload, phi_prev)
        a_prev, phi_prev, dphi_prev, payload_prev = a, phi_a, dphi_a, payload
        a *= 2.0
    return None


def bfgs_minimize(
    f: Objective,
    x0,
    *,
    grad: Callable[[np.ndarray], np.ndarray] | None = None,
    max_iter: int = 200,
    gtol: float = 1e-6,
    fd_step: float = 1e-6,
) -> tuple[np.ndarray, float, OptimizeTrace]:
    """Quasi-Newton minimisation with BFGS inverse-Hessian updates.

    Without ``grad`` the gradient is taken by central finite differences.
    Each step satisfies the strong Wolfe conditions (c1=1e-4, c2=0.9). Stops
    when the gradient norm drops below ``gtol``. If the line search fails
    the best point so far is returned and a :class:`ConvergenceWarning` is
    issued.
    """
    x = np.asarray(x0, dtype=float).ravel().copy()
    n = x.size
    trace = OptimizeTrace("bfgs")

    def fg(z):
        trace.n_evals += 1
        v = float(f(z))
        if not math.isfinite(v):
            return math.inf, np.zeros(n)
        g = grad(z) if grad is not None else finite_difference_gradient(f, z, fd_step)
        return v, np.asarray(g, dtype=float)

    fx, g = fg(x)
    if not math.isfinite(fx):
        raise DomainError("objective is not finite at the starting point")
    H = np.eye(n)
    first = True
    for it in range(max_iter):
        trace.history.append(fx)
        gnorm = float(np.linalg.norm(g))
        if gnorm < gtol:
            trace.converged = True
            trace.message = "gradient norm below tolerance"
            break
        p = -H @ g
        slope = float(g @ p)
        if slope >= 0:
            H = np.eye(n)
            p = -g
            slope = -gnorm * gnorm

        def phi(a, p=p):
            v, gv = fg(x + a * p)
            return v, float(gv @ p), gv

        alpha1 = min(1.0, 1.0 / gnorm) if first else 1.0
        found = _wolfe_line_search(phi, fx, slope, alpha1)
        if found is None:
            trace.message = "line search failed"
            warnings.warn(
                f"BFGS line search failed at iteration {it} (|g|={gnorm:.3g})",
                ConvergenceWarning,
                stacklevel=2,
            )
            break
        a, f_new, g_new = found
        s = a * p
        y = g_new - g
        sy = float(s @ y)
        if first and sy > 0:
            H = np.eye(n) * (sy / float(y @ y))
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            Hy = H @ y
            H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s)
        x = x + s
        fx, g = f_new, g_new
        first = False
        trace.iterations = it + 1
    else:
        trace.message = "maximum iterations reached"
        trace.history.append(fx)
    return x, fx, trace
