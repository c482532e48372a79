"""Zeroth-order optimization of stochastic nonsmooth composite objectives.

Minimizes ``F(x) + h(x)`` where ``F`` is an expectation of possibly
nonsmooth sampled losses available only through function evaluations and
``h`` is a convex regularizer with cheap prox / linear-minimization
oracles.  Provides randomized-smoothing gradient estimators (minibatch and
variance-reduced), proximal-gradient and conditional-gradient loops,
stationarity metrics, analysis-driven hyperparameter calculators, and a
reproducible two-layer ReLU network benchmark.
"""

from .exceptions import (
    DimensionError,
    EmptyTrace,
    GCGInfeasibleStart,
    InfeasiblePoint,
    InvalidProblem,
    MissingRadius,
    NoRadius,
    NonFiniteLogits,
    ParseError,
    UnboundedLMO,
    UnknownKey,
    ZocoptError,
)
from .metrics import (
    StationarityReport,
    cggsp_metric_estimate,
    fw_gap,
    gradient_mapping,
    pgsp_metric_estimate,
)
from .optimizers import (
    RunConfig,
    RunTrace,
    TheoremHyperParams,
    TraceRecord,
    ZerothOrderConditionalGradient,
    ZerothOrderProximalGradient,
    gcg_step,
    prox_step,
    run,
    select_output,
    theorem_hyperparams,
)
from .oracles import (
    ConstantOracle,
    CountingOracle,
    FiniteSumOracle,
    HalfSquaredNormOracle,
    L1NormOracle,
    LinearOracle,
    NoisyLinearOracle,
)
from .problem import ProblemSpec, StochasticOracle, objective_estimate, oracle_eval, validate_problem
from .regularizers import (
    AnchorRadius,
    BallIndicator,
    BoxIndicator,
    ElasticNet,
    L1,
    Regularizer,
    SquaredL2,
    ZeroRegularizer,
    soft_threshold,
)
from .rng import RngStream
from .smoothing import (
    GradEstimatorConfig,
    GradientEstimate,
    GradientEstimator,
    estimator_sequence,
    minibatch_gradient,
    sample_sphere,
    smoothed_value_estimate,
    two_point_estimate,
    vr_gradient_step,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorRadius",
    "BallIndicator",
    "BoxIndicator",
    "ConstantOracle",
    "CountingOracle",
    "DimensionError",
    "ElasticNet",
    "EmptyTrace",
    "FiniteSumOracle",
    "GCGInfeasibleStart",
    "GradEstimatorConfig",
    "GradientEstimate",
    "GradientEstimator",
    "HalfSquaredNormOracle",
    "InfeasiblePoint",
    "InvalidProblem",
    "L1",
    "L1NormOracle",
    "LinearOracle",
    "MissingRadius",
    "NoRadius",
    "NoisyLinearOracle",
    "NonFiniteLogits",
    "ParseError",
    "ProblemSpec",
    "Regularizer",
    "RngStream",
    "RunConfig",
    "RunTrace",
    "SquaredL2",
    "StationarityReport",
    "StochasticOracle",
    "TheoremHyperParams",
    "TraceRecord",
    "UnboundedLMO",
    "UnknownKey",
    "ZerothOrderConditionalGradient",
    "ZerothOrderProximalGradient",
    "ZeroRegularizer",
    "ZocoptError",
    "cggsp_metric_estimate",
    "estimator_sequence",
    "fw_gap",
    "gcg_step",
    "gradient_mapping",
    "minibatch_gradient",
    "objective_estimate",
    "oracle_eval",
    "pgsp_metric_estimate",
    "prox_step",
    "run",
    "sample_sphere",
    "select_output",
    "smoothed_value_estimate",
    "soft_threshold",
    "theorem_hyperparams",
    "two_point_estimate",
    "validate_problem",
    "vr_gradient_step",
]
