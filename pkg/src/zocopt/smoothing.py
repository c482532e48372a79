"""Randomized-smoothing gradient estimators.

The smoothed surrogate of ``F`` averages function values over a sphere of
radius ``delta`` around the query point.  Its gradient admits the two-point
estimator

    ghat(x; u, token) = d / (2 delta) * [f(x + delta u) - f(x - delta u)] * u

with ``u`` uniform on the unit sphere.  This module provides the sphere
sampler, the single estimate, the minibatch average (option ``g1``), the
recursive variance-reduced estimate (option ``g2``) and a Monte-Carlo
estimate of the smoothed function value.

Randomness is consumed in a documented, fixed order (directions first, then
sample tokens; one batched draw each) so that runs are bit-reproducible and
an epoch start of option ``g2`` is bit-identical to a ``g1`` minibatch of
the same size on the same stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .problem import StochasticOracle
from .rng import RngStream
from .validation import as_vector, check_positive, check_positive_int, check_unit_vector


@dataclass
class GradEstimatorConfig:
    """Configuration of the per-step gradient estimate.

    ``g1`` averages ``batch`` fresh two-point estimates every step.  ``g2``
    refreshes with a ``batch_b0`` minibatch whenever ``t % period_q == 0``
    and otherwise applies a shared-sample correction of size ``batch_b1`` to
    the previous estimate.
    """

    option: str
    delta: float
    batch: int | None = None
    batch_b0: int | None = None
    batch_b1: int | None = None
    period_q: int | None = None

    def __post_init__(self):
        self.option = str(self.option).lower()
        if self.option not in ("g1", "g2"):
            raise ValueError(f"option must be 'g1' or 'g2', got {self.option!r}")
        self.delta = check_positive(self.delta, "delta")
        if self.option == "g1":
            if self.batch is None:
                raise ValueError("batch is required for option g1")
            self.batch = check_positive_int(self.batch, "batch")
        else:
            if self.batch_b0 is None or self.batch_b1 is None or self.period_q is None:
                raise ValueError(
                    "batch_b0, batch_b1 and period_q are required for option g2"
                )
            self.batch_b0 = check_positive_int(self.batch_b0, "batch_b0")
            self.batch_b1 = check_positive_int(self.batch_b1, "batch_b1")
            self.period_q = check_positive_int(self.period_q, "period_q")


@dataclass
class GradientEstimate:
    """A gradient estimate plus its oracle cost.

    ``fevals`` counts oracle calls consumed: two per sample pair for fresh
    estimates, four per pair for variance-reduced corrections.
    ``second_moment`` is the per-sample mean of ``|ghat_i|^2`` when the
    estimate is an i.i.d. average (None for corrected estimates); it feeds
    standard-error reporting and the second-moment diagnostics.
    """

    vector: np.ndarray
    fevals: int
    second_moment: float | None = None

    def stderr(self, batch: int) -> float:
        """Standard error of the mean estimate over ``batch`` i.i.d. samples."""
        if self.second_moment is None or batch < 2:
            return float("nan")
        var = max(self.second_moment - float(np.dot(self.vector, self.vector)), 0.0)
        return float(np.sqrt(var / (batch - 1)))


def sample_sphere(rng: RngStream, d: int) -> np.ndarray:
    """One point distributed uniformly on the unit sphere in d dimensions."""
    return _sphere_batch(rng, 1, check_positive_int(d, "d"))[0]


def _sphere_batch(rng: RngStream, n: int, d: int) -> np.ndarray:
    """n independent uniform unit vectors, one per row.

    Normalized standard Gaussians; the (measure-zero) zero vector is
    redrawn.  Row i equals the i-th call of :func:`sample_sphere` on the
    same stream, so batched and sequential sampling agree bitwise.
    """
    out = rng.generator.standard_normal((n, d))
    norms = np.linalg.norm(out, axis=1)
    while np.any(norms == 0.0):  # pragma: no cover - probability zero
        bad = norms == 0.0
        out[bad] = rng.generator.standard_normal((int(np.sum(bad)), d))
        norms = np.linalg.norm(out, axis=1)
    return out / norms[:, None]


def two_point_estimate(
    oracle: StochasticOracle, x, delta: float, u, token: int
) -> np.ndarray:
    """Single two-point estimate of the smoothed gradient at ``x``.

    Consumes exactly two oracle evaluations.
    """
    x = as_vector(x, dim=oracle.dim)
    delta = check_positive(delta, "delta")
    u = check_unit_vector(u)
    if u.shape[0] != x.shape[0]:
        raise ValueError(f"direction has length {u.shape[0]}, expected {x.shape[0]}")
    d = x.shape[0]
    diff = oracle.evaluate(x + delta * u, int(token)) - oracle.evaluate(
        x - delta * u, int(token)
    )
    return (d / (2.0 * delta)) * diff * u


def _serial_mean(rows: np.ndarray) -> np.ndarray:
    """Mean of the rows accumulated strictly in index order."""
    acc = np.zeros(rows.shape[1])
    for row in rows:
        acc += row
    return acc / rows.shape[0]


def _pairwise_mean(rows: np.ndarray) -> np.ndarray:
    """Mean of the rows via a deterministic pairwise tree.

    Matches what a fan-out/reduce over workers computes; may differ from the
    serial order in the last bits.
    """
    level = rows
    while level.shape[0] > 1:
        n = level.shape[0]
        half = n // 2
        paired = level[: 2 * half : 2] + level[1 : 2 * half : 2]
        if n % 2:
            paired = np.vstack([paired, level[-1:]])
        level = paired
    return level[0] / rows.shape[0]


def _per_sample_estimates(oracle, x, delta, batch, rng):
    """Matrix of ``batch`` two-point estimates, one per row.

    Draw order: all directions first, then all tokens; evaluation order:
    the plus points, then the minus points.
    """
    d = x.shape[0]
    directions = _sphere_batch(rng, batch, d)
    tokens = oracle.sample(rng, batch)
    plus = oracle.evaluate_batch(x + delta * directions, tokens)
    minus = oracle.evaluate_batch(x - delta * directions, tokens)
    coeff = (d / (2.0 * delta)) * (np.asarray(plus) - np.asarray(minus))
    return coeff[:, None] * directions, coeff


def minibatch_gradient(
    oracle: StochasticOracle,
    x,
    delta: float,
    batch: int,
    rng: RngStream,
    pairwise: bool = False,
) -> GradientEstimate:
    """Average of ``batch`` i.i.d. two-point estimates at ``x`` (option g1).

    ``pairwise=True`` switches the reduction from strict sample-index order
    to the deterministic pairwise tree used by parallel fan-out.
    """
    x = as_vector(x, dim=oracle.dim)
    delta = check_positive(delta, "delta")
    batch = check_positive_int(batch, "batch")
    estimates, coeff = _per_sample_estimates(oracle, x, delta, batch, rng)
    reduce = _pairwise_mean if pairwise else _serial_mean
    vector = reduce(estimates)
    # |ghat_i| == |coeff_i| because the directions are unit vectors
    second_moment = float(_serial_mean((coeff * coeff)[:, None])[0])
    return GradientEstimate(vector=vector, fevals=2 * batch, second_moment=second_moment)


def vr_gradient_step(
    oracle: StochasticOracle,
    x,
    x_prev,
    g_prev,
    delta: float,
    batch: int,
    rng: RngStream,
    pairwise: bool = False,
) -> GradientEstimate:
    """Recursive variance-reduced estimate (option g2, off-epoch steps).

    Adds to ``g_prev`` the average of ``batch`` shared-sample differences of
    two-point estimates at ``x`` and ``x_prev``: each sample pair reuses the
    same direction and token at both points, consuming four evaluations.
    """
    x = as_vector(x, dim=oracle.dim)
    x_prev = as_vector(x_prev, dim=oracle.dim)
    g_prev = as_vector(g_prev, dim=oracle.dim)
    delta = check_positive(delta, "delta")
    batch = check_positive_int(batch, "batch")
    d = x.shape[0]
    directions = _sphere_batch(rng, batch, d)
    tokens = oracle.sample(rng, batch)
    cur_plus = oracle.evaluate_batch(x + delta * directions, tokens)
    cur_minus = oracle.evaluate_batch(x - delta * directions, tokens)
    prev_plus = oracle.evaluate_batch(x_prev + delta * directions, tokens)
    prev_minus = oracle.evaluate_batch(x_prev - delta * directions, tokens)
    coeff = (d / (2.0 * delta)) * (
        (np.asarray(cur_plus) - np.asarray(cur_minus))
        - (np.asarray(prev_plus) - np.asarray(prev_minus))
    )
    reduce = _pairwise_mean if pairwise else _serial_mean
    correction = reduce(coeff[:, None] * directions)
    return GradientEstimate(vector=g_prev + correction, fevals=4 * batch)


class GradientEstimator:
    """Stateful per-iterate gradient estimator for an optimizer loop.

    ``step(x)`` returns the estimate for the current iterate and advances
    the internal step counter; with option g2 it keeps the previous iterate
    and estimate for the recursive correction.  ``cum_fevals`` accumulates
    the oracle cost of every step.
    """

    def __init__(self, oracle: StochasticOracle, config: GradEstimatorConfig, rng: RngStream):
        self.oracle = oracle
        self.config = config
        self.rng = rng
        self.reset()

    def reset(self):
        self.t = 0
        self.cum_fevals = 0
        self._x_prev = None
        self._g_prev = None

    def step(self, x) -> GradientEstimate:
        cfg = self.config
        x = as_vector(x, dim=self.oracle.dim)
        if cfg.option == "g1":
            est = minibatch_gradient(self.oracle, x, cfg.delta, cfg.batch, self.rng)
        elif self.t % cfg.period_q == 0:
            est = minibatch_gradient(self.oracle, x, cfg.delta, cfg.batch_b0, self.rng)
        else:
            est = vr_gradient_step(
                self.oracle, x, self._x_prev, self._g_prev, cfg.delta, cfg.batch_b1, self.rng
            )
        if cfg.option == "g2":
            self._x_prev = x.copy()
            self._g_prev = est.vector.copy()
        self.t += 1
        self.cum_fevals += est.fevals
        return est


def estimator_sequence(
    oracle: StochasticOracle,
    iterate_stream: Iterable,
    config: GradEstimatorConfig,
    rng: RngStream,
) -> Iterator[GradientEstimate]:
    """Map a stream of iterates to their per-step gradient estimates."""
    estimator = GradientEstimator(oracle, config, rng)
    for x in iterate_stream:
        yield estimator.step(x)


def smoothed_value_estimate(
    oracle: StochasticOracle, x, delta: float, n_samples: int, rng: RngStream
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the smoothed function at ``x``.

    Averages ``f(x + delta * u, token)`` over ``n_samples`` independent
    (direction, token) pairs.
    """
    x = as_vector(x, dim=oracle.dim)
    delta = check_positive(delta, "delta")
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2 to report a standard error")
    directions = _sphere_batch(rng, n_samples, x.shape[0])
    tokens = oracle.sample(rng, n_samples)
    values = np.asarray(oracle.evaluate_batch(x + delta * directions, tokens))
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / np.sqrt(n_samples))
    return mean, stderr
