"""Damped Gauss-Newton (Levenberg-Marquardt) least-squares engine.

The solver minimises ``sum(w * (y - m(x; theta))**2)`` over the free
parameters.  It knows nothing about the models; callers hand it a residual
function and optionally an analytic Jacobian of the model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class FitError(RuntimeError):
    """Numerical failure inside the optimiser."""


class SingularFitError(FitError):
    """Normal equations are singular (a parameter has no effect on the model)."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


@dataclass
class LMState:
    theta: np.ndarray
    cost: float
    iterations: int
    converged: bool
    gradient_norm: float
    jacobian: np.ndarray
    message: str


def numeric_jacobian(fun: Callable[[np.ndarray], np.ndarray], theta: np.ndarray,
                     rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``fun`` at ``theta``.

    The step for parameter j is ``rel_step * |theta_j|``, or ``rel_step``
    when ``theta_j`` is zero.
    """
    theta = np.asarray(theta, dtype=float)
    cols = []
    for j in range(theta.size):
        h = rel_step * (abs(theta[j]) or 1.0)
        tp = theta.copy()
        tm = theta.copy()
        tp[j] += h
        tm[j] -= h
        cols.append((fun(tp) - fun(tm)) / (tp[j] - tm[j]))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def ridders_jacobian(fun: Callable[[np.ndarray], np.ndarray], theta: np.ndarray,
                     first_step: float = 0.1, shrink: float = 1.4, levels: int = 40) -> np.ndarray:
    """Jacobian by Richardson-extrapolated central differences (Ridders).

    Starts at ``first_step * max(|theta_j|, 1)`` and shrinks the step by
    ``shrink`` per level; each entry keeps the extrapolant with the smallest
    error estimate.  The estimate includes a roundoff term so that tiny steps,
    whose difference quotients are quantised, are not mistaken for exact.
    """
    theta = np.asarray(theta, dtype=float)
    fac0 = shrink * shrink
    roundoff = 4.0 * np.finfo(float).eps * np.abs(fun(theta))
    cols = []
    for j in range(theta.size):
        h = first_step * max(abs(theta[j]), 1.0)

        def central(step):
            tp = theta.copy()
            tm = theta.copy()
            tp[j] += step
            tm[j] -= step
            return (fun(tp) - fun(tm)) / (tp[j] - tm[j])

        prev = [central(h)]
        best = prev[0]
        best_err = np.full(best.shape, np.inf)
        for _ in range(1, levels):
            h /= shrink
            row = [central(h)]
            fac = fac0
            for k in range(1, len(prev) + 1):
                row.append((row[k - 1] * fac - prev[k - 1]) / (fac - 1.0))
                fac *= fac0
                err = np.maximum(np.abs(row[k] - row[k - 1]), np.abs(row[k] - prev[k - 1]))
                err = err + roundoff / h
                better = err <= best_err
                best = np.where(better, row[k], best)
                best_err = np.where(better, err, best_err)
            prev = row
        cols.append(best)
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def _scaled_gradient(J: np.ndarray, r: np.ndarray, rfloor: float = 0.0) -> float:
    # cosine between residual and each Jacobian column (MINPACK gtol measure);
    # rfloor keeps roundoff-level residuals of exact data from reading as large
    rnorm = max(np.linalg.norm(r), rfloor)
    if rnorm == 0.0:
        return 0.0
    colnorm = np.linalg.norm(J, axis=0)
    g = np.abs(J.T @ r)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(colnorm > 0, g / (colnorm * rnorm), 0.0)
    return float(np.max(cos)) if cos.size else 0.0


def levenberg_marquardt(
    model: Callable[[np.ndarray], np.ndarray],
    theta0: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray,
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    max_iter: int = 200,
    xtol: float = 1e-10,
    gtol: float = 1e-10,
    gtol_accept: float = 1e-6,
    lambda0: float = 1e-3,
) -> LMState:
    """Minimise the weighted squared residual of ``model`` against ``y``.

    Parameters
    ----------
    model : callable
        ``model(theta) -> predicted y`` over the data points.
    theta0 : ndarray
        Starting values of the free parameters.
    y, weights : ndarray
        Observations and non-negative weights.
    jacobian : callable, optional
        ``jacobian(theta) -> d model / d theta`` with shape (n_points, n_params).
        Central differences are used when omitted.
    max_iter : int
        Iteration cap; hitting it returns the best point with ``converged=False``.
    xtol, gtol : float
        Relative-step and scaled-gradient stopping thresholds.
    gtol_accept : float
        A stop triggered by a small step (or by damping saturation) only counts
        as converged when the scaled gradient is also below this value.
    lambda0 : float
        Initial Marquardt damping, multiplied or divided by 10 after each trial.

    Returns
    -------
    LMState
    """
    sw = np.sqrt(np.asarray(weights, dtype=float))
    y = np.asarray(y, dtype=float)
    theta = np.array(theta0, dtype=float)

    def resid(t):
        return sw * (y - model(t))

    def jac(t):
        Jm = jacobian(t) if jacobian is not None else numeric_jacobian(model, t)
        return -sw[:, None] * Jm

    rfloor = 1e-6 * float(np.linalg.norm(sw * y))
    r = resid(theta)
    if not np.all(np.isfinite(r)):
        raise FitError("model is not finite at the initial guess")
    cost = float(r @ r)
    J = jac(theta)
    lam = lambda0
    gnorm = _scaled_gradient(J, r, rfloor)

    zero_cols = np.where(np.linalg.norm(J, axis=0) == 0.0)[0]
    if zero_cols.size:
        raise SingularFitError(
            f"parameters {list(zero_cols)} have no influence on the model", float("inf")
        )

    if gnorm < gtol:
        return LMState(theta, cost, 0, True, gnorm, J, "gradient below tolerance")

    message = "iteration limit reached"
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        A = J.T @ J
        g = J.T @ r
        D = np.diag(A).copy()
        D[D <= 0] = 1.0
        accepted = False
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(D), -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                trial = theta + step
                r_new = resid(trial)
                cost_new = float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
                if cost_new < cost:
                    accepted = True
                    break
            lam *= 10.0
            if lam > 1e16:
                break
        if not accepted:
            converged = gnorm <= gtol_accept
            message = "damping saturated without further decrease"
            break
        rel_step = np.linalg.norm(step) / (np.linalg.norm(theta) + xtol)
        theta, r, cost = trial, r_new, cost_new
        lam = max(lam / 10.0, 1e-12)
        J = jac(theta)
        gnorm = _scaled_gradient(J, r, rfloor)
        if gnorm < gtol:
            converged = True
            message = "gradient below tolerance"
            break
        if rel_step < xtol:
            converged = gnorm <= gtol_accept
            message = "relative step below tolerance"
            break

    return LMState(theta, cost, it, converged, gnorm, J, message)


def covariance(J: np.ndarray, cost: float, n_points: int) -> np.ndarray:
    """Parameter covariance ``(J^T W J)^-1`` scaled by the reduced residual.

    ``J`` is the weighted residual Jacobian returned in :class:`LMState`.
    """
    n_par = J.shape[1]
    if n_par == 0:
        return np.zeros((0, 0))
    A = J.T @ J
    d = np.sqrt(np.diag(A))
    if np.any(d == 0):
        raise SingularFitError("normal equations are singular at the optimum", float("inf"))
    As = A / np.outer(d, d)
    cond = np.linalg.cond(As)
    if not np.isfinite(cond) or cond > 1e15:
        raise SingularFitError("normal equations are singular at the optimum", float(cond))
    dof = n_points - n_par
    scale = cost / dof if dof > 0 else 0.0
    return np.linalg.inv(As) / np.outer(d, d) * scale
