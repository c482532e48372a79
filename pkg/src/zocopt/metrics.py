"""Stationarity metrics for composite problems.

Two notions are covered:

* the proximal gradient mapping ``(x - prox(x - gamma g, gamma)) / gamma``,
  whose norm measures stationarity for prox-driven methods, and
* the regularized Frank-Wolfe gap ``max_y [h(x) - h(y) + <y - x, -g>]``,
  the analogous quantity for conditional-gradient methods.

Both are defined at an exact smoothed gradient, which is unavailable; the
``*_metric_estimate`` functions plug in a large-minibatch estimate and
report the estimate's standard error so callers can gate on it.  The
plug-in value is an upper bound on the underlying minimum over the
smoothed subdifferential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasiblePoint
from .problem import ProblemSpec
from .regularizers import Regularizer
from .rng import RngStream
from .smoothing import minibatch_gradient
from .validation import as_vector, check_positive


@dataclass
class StationarityReport:
    """An estimated stationarity metric at one point.

    ``stderr_proxy`` propagates the gradient estimate's standard error to
    the metric scale: the proximal mapping is 1-Lipschitz in the gradient,
    the Frank-Wolfe gap is ``2R``-Lipschitz over the radius-``R`` feasible
    set.
    """

    metric_kind: str  # "pgsp_norm" | "cggsp_gap"
    value: float
    stderr_proxy: float
    samples: int
    delta: float
    gamma: float | None = None


def gradient_mapping(x, g, gamma: float, h: Regularizer) -> np.ndarray:
    """Proximal gradient mapping at point ``x`` and gradient ``g``."""
    x = as_vector(x)
    g = as_vector(g, dim=x.shape[0], name="g")
    gamma = check_positive(gamma, "gamma")
    if h.prox_is_identity:
        # prox is the identity, so the mapping is exactly g
        return g.copy()
    return (x - h.prox(x - gamma * g, gamma)) / gamma


def fw_gap(x, g, h: Regularizer) -> float:
    """Regularized Frank-Wolfe gap ``h(x) - h(y') + <y' - x, -g>``.

    ``y'`` is the regularizer's linear-minimization output for ``g``.  The
    gap is nonnegative since ``y = x`` is feasible in the underlying max.
    """
    x = as_vector(x)
    g = as_vector(g, dim=x.shape[0], name="g")
    hx = h.value(x)
    if not np.isfinite(hx):
        raise InfeasiblePoint("fw_gap needs a point with finite regularizer value")
    y = h.lmo(g)
    return float(hx - h.value(y) + np.dot(y - x, -g))


def _gradient_estimate_with_stderr(problem, x, delta, n_samples, rng):
    est = minibatch_gradient(problem.oracle, x, delta, n_samples, rng)
    return est.vector, est.stderr(n_samples)


def pgsp_metric_estimate(
    problem: ProblemSpec,
    x,
    gamma: float,
    delta: float,
    n_samples: int,
    rng: RngStream,
) -> StationarityReport:
    """Estimated proximal-mapping norm at ``x``.

    Estimates the smoothed gradient with an ``n_samples`` minibatch and
    returns the norm of the proximal gradient mapping at it.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    x = as_vector(x, dim=problem.dim)
    vector, stderr = _gradient_estimate_with_stderr(problem, x, delta, n_samples, rng)
    value = float(np.linalg.norm(gradient_mapping(x, vector, gamma, problem.regularizer)))
    return StationarityReport(
        metric_kind="pgsp_norm",
        value=value,
        stderr_proxy=stderr,
        samples=n_samples,
        delta=delta,
        gamma=gamma,
    )


def cggsp_metric_estimate(
    problem: ProblemSpec,
    x,
    delta: float,
    n_samples: int,
    rng: RngStream,
) -> StationarityReport:
    """Estimated Frank-Wolfe gap at ``x``."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    x = as_vector(x, dim=problem.dim)
    vector, stderr = _gradient_estimate_with_stderr(problem, x, delta, n_samples, rng)
    value = fw_gap(x, vector, problem.regularizer)
    radius = problem.regularizer.anchor_radius(problem.lipschitz_G, problem.dim).radius
    return StationarityReport(
        metric_kind="cggsp_gap",
        value=value,
        stderr_proxy=2.0 * radius * stderr,
        samples=n_samples,
        delta=delta,
        gamma=None,
    )
