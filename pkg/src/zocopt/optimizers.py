"""Zeroth-order proximal gradient and generalized conditional gradient loops.

Both methods run ``T`` steps of

    estimate g_t  ->  move x_t using the regularizer's oracle

where the move is ``prox(x_t - gamma g_t, gamma)`` for the proximal method
and ``x_t + gamma (lmo(g_t) - x_t)`` for the conditional-gradient method.
The returned trace records every iterate together with its objective
estimate and cumulative oracle cost, and the output point is drawn
uniformly from the visited iterates.

``theorem_hyperparams`` computes the step size, batch sizes and iteration
count that the convergence analysis prescribes for a target accuracy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import EmptyTrace, GCGInfeasibleStart, InvalidProblem, MissingRadius
from .metrics import cggsp_metric_estimate, pgsp_metric_estimate
from .problem import ProblemSpec, objective_estimate, validate_problem
from .regularizers import Regularizer, ZeroRegularizer
from .rng import RngStream
from .smoothing import GradEstimatorConfig, GradientEstimator
from .validation import as_vector, check_positive, check_positive_int


def prox_step(x, g, gamma: float, h: Regularizer) -> np.ndarray:
    """One proximal gradient step ``prox(x - gamma g, gamma)``."""
    x = as_vector(x)
    g = as_vector(g, dim=x.shape[0], name="g")
    gamma = check_positive(gamma, "gamma")
    return h.prox(x - gamma * g, gamma)


def gcg_step(x, g, gamma: float, h: Regularizer) -> tuple[np.ndarray, np.ndarray]:
    """One conditional-gradient step; returns ``(y, x_next)``.

    ``y`` is the linear-minimization output for ``g`` and
    ``x_next = x + gamma (y - x)`` with ``gamma`` in (0, 1].
    """
    x = as_vector(x)
    g = as_vector(g, dim=x.shape[0], name="g")
    gamma = check_positive(gamma, "gamma")
    if gamma > 1.0:
        raise ValueError(f"gamma must be in (0, 1] for conditional gradient, got {gamma}")
    y = h.lmo(g)
    return y, x + gamma * (y - x)


@dataclass
class TheoremHyperParams:
    """Hyperparameters prescribed by the convergence analysis."""

    kind: str
    steps: int
    gamma: float
    batch: int | None = None
    batch_b0: int | None = None
    batch_b1: int | None = None
    period_q: int | None = None
    predicted_fevals: int = 0

    def estimator_config(self, delta: float) -> GradEstimatorConfig:
        if self.batch is not None:
            return GradEstimatorConfig(option="g1", delta=delta, batch=self.batch)
        return GradEstimatorConfig(
            option="g2",
            delta=delta,
            batch_b0=self.batch_b0,
            batch_b1=self.batch_b1,
            period_q=self.period_q,
        )


def theorem_hyperparams(
    kind: str,
    lipschitz_G: float,
    dim: int,
    delta: float,
    eps: float,
    initial_gap: float,
    radius: float | None = None,
    smoothing_c: float = 1.0,
) -> TheoremHyperParams:
    """Exact hyperparameters guaranteeing an ``eps``-stationary output.

    ``kind`` is one of ``pgd_g1``, ``pgd_g2``, ``gcg_g1``, ``gcg_g2``.
    ``initial_gap`` is the caller's estimate of the initial composite
    suboptimality (a reasonable default is the objective estimate at the
    start point, treating the unknown minimum as 0).  The conditional
    gradient kinds additionally need the regularizer growth ``radius``.

    Real-valued counts are rounded up; for the variance-reduced kinds the
    step count is additionally rounded up to a multiple of the period so
    the predicted evaluation total is exact for the loop as implemented.
    """
    kind = kind.lower()
    if kind not in ("pgd_g1", "pgd_g2", "gcg_g1", "gcg_g2"):
        raise ValueError(f"unknown hyperparameter kind {kind!r}")
    G = check_positive(lipschitz_G, "lipschitz_G")
    d = check_positive_int(dim, "dim")
    delta = check_positive(delta, "delta")
    eps = check_positive(eps, "eps")
    c = check_positive(smoothing_c, "smoothing_c")
    if initial_gap < 0:
        raise ValueError("initial_gap must be nonnegative")
    if kind.startswith("gcg"):
        if radius is None:
            raise MissingRadius(f"kind {kind!r} requires the growth radius")
        radius = check_positive(radius, "radius")

    sqrt_d = math.sqrt(d)
    total_gap = initial_gap + 2.0 * delta * G

    if kind == "pgd_g1":
        steps = math.ceil(8.0 * c * G * sqrt_d * total_gap / (delta * eps**2))
        batch = math.ceil(1024.0 * d * G**2 / eps**2)
        gamma = delta / (c * G * sqrt_d)
        return TheoremHyperParams(
            kind=kind,
            steps=steps,
            gamma=gamma,
            batch=batch,
            predicted_fevals=2 * steps * batch,
        )

    if kind == "pgd_g2":
        b0 = math.ceil(1764.0 * d * G**2 / eps**2)
        b1 = q = math.ceil(42.0 * sqrt_d * G / eps)
        steps = math.ceil(320.0 * G * (d + c * sqrt_d) * total_gap / (delta * eps**2))
        steps = _round_up_to_multiple(steps, q)
        gamma = delta / (2.0 * G * (d + c * sqrt_d))
        return TheoremHyperParams(
            kind=kind,
            steps=steps,
            gamma=gamma,
            batch_b0=b0,
            batch_b1=b1,
            period_q=q,
            predicted_fevals=2 * b0 * (steps // q) + 4 * b1 * (steps - steps // q),
        )

    if kind == "gcg_g1":
        steps = math.ceil(
            32.0 * c * G * radius**2 * sqrt_d * total_gap / (delta * eps**2)
        )
        batch = math.ceil(1764.0 * d * radius**2 * G**2 / eps**2)
        gamma = math.sqrt(2.0 * delta * total_gap / (steps * c * G * sqrt_d)) / radius
        return TheoremHyperParams(
            kind=kind,
            steps=steps,
            gamma=_clamp_gcg_gamma(gamma),
            batch=batch,
            predicted_fevals=2 * steps * batch,
        )

    b0 = math.ceil(676.0 * d * radius**2 * G**2 / eps**2)
    b1 = q = math.ceil(26.0 * radius * G * sqrt_d / eps)
    steps = math.ceil(
        16.0 * G * radius**2 * (4.0 * d + 2.0 * c * sqrt_d) * total_gap / (delta * eps**2)
    )
    steps = _round_up_to_multiple(steps, q)
    gamma = (
        math.sqrt(delta * total_gap / (steps * G * (4.0 * d + 2.0 * c * sqrt_d))) / radius
    )
    return TheoremHyperParams(
        kind=kind,
        steps=steps,
        gamma=_clamp_gcg_gamma(gamma),
        batch_b0=b0,
        batch_b1=b1,
        period_q=q,
        predicted_fevals=2 * b0 * (steps // q) + 4 * b1 * (steps - steps // q),
    )


def _round_up_to_multiple(n: int, q: int) -> int:
    return ((n + q - 1) // q) * q


def _clamp_gcg_gamma(gamma: float) -> float:
    if gamma > 1.0:
        warnings.warn(
            f"conditional-gradient step size {gamma:.3g} exceeds 1; clamping to 1",
            stacklevel=3,
        )
        return 1.0
    return gamma


@dataclass
class TraceRecord:
    """One step of a run: the iterate entering the step, its objective
    estimate, and the cumulative oracle cost after the step's gradient
    estimate."""

    step: int
    x: np.ndarray
    objective: float
    cum_fevals: int
    metric: float | None = None


@dataclass
class RunTrace:
    """Full record of a run plus the uniformly selected output iterate.

    ``cum_fevals`` counts algorithm evaluations only; the oracle cost of
    per-record objective estimates and stationarity metrics is accounted
    separately in ``objective_fevals`` and ``metric_fevals`` so complexity
    plots reflect the algorithm alone.
    """

    records: list[TraceRecord] = field(default_factory=list)
    output_index: int = -1
    output_point: np.ndarray | None = None
    objective_fevals: int = 0
    metric_fevals: int = 0

    @property
    def cum_fevals(self) -> int:
        return self.records[-1].cum_fevals if self.records else 0

    def best_metric_index(self) -> int | None:
        """Index of the recorded iterate with the smallest metric, if any."""
        best, best_val = None, math.inf
        for rec in self.records:
            if rec.metric is not None and rec.metric < best_val:
                best, best_val = rec.step, rec.metric
        return best


def select_output(trace: RunTrace, rng: RngStream) -> tuple[int, np.ndarray]:
    """Uniformly select one recorded iterate as the output point."""
    if not trace.records:
        raise EmptyTrace("cannot select an output from an empty trace")
    index = int(rng.generator.integers(0, len(trace.records)))
    return index, trace.records[index].x.copy()


@dataclass
class RunConfig:
    """Configuration of one optimizer run.

    ``gamma=None`` takes the step size (and the estimator batch sizes, via
    ``estimator``) from ``theorem_params``.  ``record_metric_every=0``
    disables stationarity-metric recording; ``objective_samples=0``
    disables per-record objective estimates (records then carry NaN).
    ``objective_exact=True`` uses a full without-replacement pass of a
    finite-sum oracle instead of sampled estimates.
    """

    algorithm: str
    estimator: GradEstimatorConfig
    steps: int
    gamma: float | None = None
    seed: int = 0
    x0: np.ndarray | None = None
    record_metric_every: int = 0
    metric_batch: int = 2000
    objective_samples: int = 64
    objective_exact: bool = False
    theorem_params: TheoremHyperParams | None = None

    def __post_init__(self):
        self.algorithm = str(self.algorithm).lower()
        if self.algorithm not in ("pgd", "gcg"):
            raise ValueError(f"algorithm must be 'pgd' or 'gcg', got {self.algorithm!r}")
        self.steps = check_positive_int(self.steps, "steps")
        if self.gamma is None:
            if self.theorem_params is None:
                raise ValueError("gamma is required unless theorem_params is given")
        else:
            self.gamma = check_positive(self.gamma, "gamma")
        if self.record_metric_every < 0:
            raise ValueError("record_metric_every must be >= 0")
        if self.record_metric_every and self.metric_batch < 2:
            raise ValueError("metric_batch must be >= 2")
        if self.objective_samples < 0:
            raise ValueError("objective_samples must be >= 0")


def run(problem: ProblemSpec, config: RunConfig, rng: RngStream | None = None) -> RunTrace:
    """Run the configured algorithm for ``config.steps`` iterations.

    The stream defaults to ``RngStream(config.seed)``; identical configs and
    seeds produce identical traces.  Conditional-gradient runs require a
    start point within the regularizer's growth radius of its anchor.
    """
    if rng is None:
        rng = RngStream(config.seed)
    is_gcg = config.algorithm == "gcg"
    validate_problem(problem, require_radius=is_gcg)
    h = problem.regularizer

    gamma = config.gamma if config.gamma is not None else config.theorem_params.gamma
    if is_gcg and gamma > 1.0:
        raise ValueError(f"conditional gradient requires gamma <= 1, got {gamma}")

    if config.x0 is None:
        x = np.zeros(problem.dim)
    else:
        x = as_vector(config.x0, dim=problem.dim, name="x0").copy()
    if is_gcg:
        anchor, radius = h.anchor_radius(problem.lipschitz_G, problem.dim)
        start_dist = float(np.linalg.norm(x - anchor))
        if start_dist > radius * (1 + 1e-12) + 1e-12:
            raise GCGInfeasibleStart(
                f"start point lies {start_dist:.6g} from the anchor, "
                f"outside the radius {radius:.6g}"
            )

    est_rng, obj_rng, metric_rng, select_rng = rng.split(4)
    estimator = GradientEstimator(problem.oracle, config.estimator, est_rng)
    trace = RunTrace()

    for t in range(config.steps):
        estimate = estimator.step(x)

        objective = math.nan
        if config.objective_exact:
            n_total = getattr(problem.oracle, "n_samples", None)
            if n_total is None:
                raise InvalidProblem("objective_exact needs a finite-sum oracle")
            objective = objective_estimate(
                problem, x, n_total, obj_rng, without_replacement=True
            )
            trace.objective_fevals += n_total
        elif config.objective_samples:
            objective = objective_estimate(problem, x, config.objective_samples, obj_rng)
            trace.objective_fevals += config.objective_samples

        metric = None
        if config.record_metric_every and t % config.record_metric_every == 0:
            if is_gcg:
                report = cggsp_metric_estimate(
                    problem, x, config.estimator.delta, config.metric_batch, metric_rng
                )
            else:
                report = pgsp_metric_estimate(
                    problem, x, gamma, config.estimator.delta, config.metric_batch, metric_rng
                )
            metric = report.value
            trace.metric_fevals += 2 * config.metric_batch

        trace.records.append(
            TraceRecord(
                step=t,
                x=x.copy(),
                objective=objective,
                cum_fevals=estimator.cum_fevals,
                metric=metric,
            )
        )

        if is_gcg:
            _, x = gcg_step(x, estimate.vector, gamma, h)
        else:
            x = prox_step(x, estimate.vector, gamma, h)

    trace.output_index, trace.output_point = select_output(trace, select_rng)
    return trace


class _ZerothOrderSolver(BaseEstimator):
    """Shared scikit-learn-style front end for both optimizer loops.

    Hyperparameters are stored verbatim (so ``get_params`` / ``set_params``
    and cloning work); ``fit`` consumes a stochastic oracle plus an optional
    start point and exposes the run results as fitted attributes.
    """

    _algorithm = ""

    def __init__(
        self,
        regularizer=None,
        gamma=0.01,
        steps=100,
        option="g1",
        batch=64,
        batch_b0=None,
        batch_b1=None,
        period_q=None,
        delta=1e-3,
        lipschitz_G=1.0,
        smoothing_c=1.0,
        seed=0,
        record_metric_every=0,
        metric_batch=2000,
        objective_samples=64,
    ):
        self.regularizer = regularizer
        self.gamma = gamma
        self.steps = steps
        self.option = option
        self.batch = batch
        self.batch_b0 = batch_b0
        self.batch_b1 = batch_b1
        self.period_q = period_q
        self.delta = delta
        self.lipschitz_G = lipschitz_G
        self.smoothing_c = smoothing_c
        self.seed = seed
        self.record_metric_every = record_metric_every
        self.metric_batch = metric_batch
        self.objective_samples = objective_samples

    def _run_config(self) -> RunConfig:
        estimator = GradEstimatorConfig(
            option=self.option,
            delta=self.delta,
            batch=self.batch,
            batch_b0=self.batch_b0,
            batch_b1=self.batch_b1,
            period_q=self.period_q,
        )
        return RunConfig(
            algorithm=self._algorithm,
            estimator=estimator,
            steps=self.steps,
            gamma=self.gamma,
            seed=self.seed,
            record_metric_every=self.record_metric_every,
            metric_batch=self.metric_batch,
            objective_samples=self.objective_samples,
        )

    def fit(self, oracle, x0=None):
        """Minimize the oracle's composite objective from ``x0``."""
        regularizer = self.regularizer if self.regularizer is not None else ZeroRegularizer()
        problem = ProblemSpec(
            dim=oracle.dim,
            oracle=oracle,
            regularizer=regularizer,
            lipschitz_G=self.lipschitz_G,
            smoothing_c=self.smoothing_c,
        )
        config = self._run_config()
        config.x0 = None if x0 is None else as_vector(x0, dim=oracle.dim)
        self.problem_ = problem
        self.trace_ = run(problem, config)
        self.output_index_ = self.trace_.output_index
        self.output_point_ = self.trace_.output_point
        return self

    def stationarity(self, x=None, n_samples=2000, seed=0):
        """Estimated stationarity metric at ``x`` (default: the output point)."""
        point = self.output_point_ if x is None else x
        rng = RngStream(seed)
        if self._algorithm == "gcg":
            return cggsp_metric_estimate(self.problem_, point, self.delta, n_samples, rng)
        return pgsp_metric_estimate(
            self.problem_, point, self.gamma, self.delta, n_samples, rng
        )


class ZerothOrderProximalGradient(_ZerothOrderSolver):
    """Zeroth-order proximal gradient descent as a scikit-learn estimator.

    With ``regularizer=None`` the proximal step degenerates to a plain
    zeroth-order gradient step.
    """

    _algorithm = "pgd"


class ZerothOrderConditionalGradient(_ZerothOrderSolver):
    """Zeroth-order generalized conditional gradient as a scikit-learn
    estimator.

    Requires a regularizer with a growth radius (e.g. an elastic net or a
    ball/box indicator); the step size must lie in (0, 1].
    """

    _algorithm = "gcg"
