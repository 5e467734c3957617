"""Nonlinear least-squares fitting for spectra, decays and correlation histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import (
    FWHM_TO_SIGMA,
    MODELS,
    exp_gauss,
    g2_peak_weights,
    model_decay_irf,
    model_g2_comb,
    model_linear,
    model_lorentzian,
    peak_areas,
)
from .optimizer import (
    FitError,
    SingularFitError,
    covariance,
    levenberg_marquardt,
    numeric_jacobian,
    ridders_jacobian,
)

__all__ = [
    "FitError",
    "FitResult",
    "ModelSpec",
    "SingularFitError",
    "evaluate",
    "fit",
    "jacobian_check",
    "model_decay_irf",
    "model_g2_comb",
    "model_linear",
    "model_lorentzian",
    "exp_gauss",
    "g2_peak_weights",
    "peak_areas",
    "FWHM_TO_SIGMA",
]


@dataclass(frozen=True)
class ModelSpec:
    """Which model to fit and how.

    Parameters
    ----------
    model_id : str
        One of ``lorentzian``, ``linear``, ``decay_irf``, ``g2_comb``.
    fixed_parameters : dict
        Values pinned during optimisation.
    initial_guess : dict
        Overrides for the model's heuristic starting values.
    options : dict
        Structural settings: ``n_components`` for ``decay_irf``;
        ``bin_width`` and ``n_side_peaks`` for ``g2_comb``.
    """

    model_id: str
    fixed_parameters: dict = field(default_factory=dict)
    initial_guess: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model_id not in MODELS:
            raise ValueError(f"unknown model_id {self.model_id!r}; choose from {sorted(MODELS)}")
        names = self.parameter_names
        for key in list(self.fixed_parameters) + list(self.initial_guess):
            if key not in names:
                raise ValueError(f"{self.model_id} has no parameter {key!r}; parameters are {names}")

    @property
    def parameter_names(self) -> list:
        return MODELS[self.model_id].param_names(self.options)

    @property
    def free_parameters(self) -> list:
        return [n for n in self.parameter_names if n not in self.fixed_parameters]


@dataclass(frozen=True)
class FitResult:
    model_id: str
    parameters: dict
    standard_errors: dict
    residual_norm: float
    iterations: int
    converged: bool
    gradient_norm: float = 0.0
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "parameters": {k: float(v) for k, v in self.parameters.items()},
            "standard_errors": {k: float(v) for k, v in self.standard_errors.items()},
            "residual_norm": float(self.residual_norm),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


def evaluate(model: ModelSpec, x, params: dict) -> np.ndarray:
    """Evaluate ``model`` at ``x`` with a full parameter dictionary."""
    return MODELS[model.model_id].evaluate(np.asarray(x, dtype=float), params, model.options)


def _default_weights(mdef, y):
    if mdef.count_data:
        return 1.0 / np.maximum(y, 1.0)
    return np.ones_like(y)


def fit(model: ModelSpec, x, y, weights=None, max_iter: int = 200) -> FitResult:
    """Fit ``model`` to ``(x, y)`` by weighted least squares.

    Count models (``decay_irf``, ``g2_comb``) default to Poisson weights
    ``1/max(y, 1)``; the others default to uniform weights.  When the data are
    rescaled counts, pass weights computed from the raw counts instead.

    Raises
    ------
    ValueError
        Too few points, mismatched lengths or negative weights.
    SingularFitError
        A free parameter has no influence on the model.
    """
    mdef = MODELS[model.model_id]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be one-dimensional arrays of equal length")
    w = _default_weights(mdef, y) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != y.shape:
        raise ValueError("weights must match the data length")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    free = model.free_parameters
    if np.count_nonzero(w) < len(free):
        raise ValueError(f"need at least {len(free)} weighted points for {len(free)} free parameters")

    start = dict(mdef.guess(x, y, dict(model.options), dict(model.fixed_parameters)))
    start.update(model.initial_guess)
    start.update(model.fixed_parameters)
    names = model.parameter_names

    def unpack(theta):
        p = dict(start)
        p.update(zip(free, theta))
        return p

    def predict(theta):
        return mdef.evaluate(x, unpack(theta), model.options)

    jac = None
    if mdef.jacobian is not None:
        cols = [names.index(n) for n in free]

        def jac(theta):
            return mdef.jacobian(x, unpack(theta), model.options)[:, cols]

    theta0 = np.array([start[n] for n in free], dtype=float)
    state = levenberg_marquardt(predict, theta0, y, w, jacobian=jac, max_iter=max_iter)
    cov = covariance(state.jacobian, state.cost, np.count_nonzero(w))
    errs = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    params = unpack(state.theta)
    stderr = {n: 0.0 for n in names}
    stderr.update(zip(free, errs))
    return FitResult(
        model_id=model.model_id,
        parameters={n: float(params[n]) for n in names},
        standard_errors={n: float(stderr[n]) for n in names},
        residual_norm=math.sqrt(state.cost),
        iterations=state.iterations,
        converged=state.converged,
        gradient_norm=state.gradient_norm,
        message=state.message,
    )


def jacobian_check(model: ModelSpec, params: dict, x, rel_step: float = 1e-6) -> float:
    """Largest relative disagreement between two Jacobian estimates.

    Models with an analytic Jacobian are compared against
    Richardson-extrapolated central differences.  Models without one compare central differences taken at
    ``rel_step`` and ``2*rel_step``.  Each column is scaled by its largest
    analytic (or finer-step) entry.
    """
    mdef = MODELS[model.model_id]
    names = model.parameter_names
    x = np.asarray(x, dtype=float)
    theta = np.array([params[n] for n in names], dtype=float)

    def f(t):
        return mdef.evaluate(x, dict(zip(names, t)), model.options)

    if mdef.jacobian is not None:
        ref = mdef.jacobian(x, dict(zip(names, theta)), model.options)
        other = ridders_jacobian(f, theta)
    else:
        ref = numeric_jacobian(f, theta, rel_step)
        other = numeric_jacobian(f, theta, 2 * rel_step)
    scale = np.max(np.abs(ref), axis=0)
    scale[scale == 0] = 1.0
    return float(np.max(np.abs(ref - other) / scale))
