"""Problem definition: stochastic oracle abstraction and validation.

A problem couples a stochastic zeroth-order oracle (scalar evaluations
``f(x, token)`` of a noisy objective) with a convex regularizer, a Lipschitz
second-moment bound ``G`` on the oracle and the absolute constant ``c`` that
scales the gradient-Lipschitz bound of the smoothed surrogate.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .exceptions import DimensionError, InvalidProblem, NoRadius
from .rng import RngStream
from .validation import as_vector, check_positive_int

if TYPE_CHECKING:  # pragma: no cover
    from .regularizers import Regularizer


class StochasticOracle(ABC):
    """Scalar zeroth-order oracle ``(x, token) -> f_token(x)``.

    ``token`` is an opaque integer identifying one stochastic sample:
    finite-sum oracles interpret it as a dataset index, synthetic oracles as
    an RNG sub-seed.  Evaluation must be a pure function of ``(x, token)``
    so results are reproducible and safe to compute concurrently.
    """

    #: dimension of the decision vector
    dim: int

    @abstractmethod
    def evaluate(self, x: np.ndarray, token: int) -> float:
        """Evaluate the sampled objective at ``x`` for one sample token."""

    @abstractmethod
    def sample(self, rng: RngStream, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. sample tokens from the oracle's distribution."""

    def evaluate_batch(self, points: np.ndarray, tokens: np.ndarray) -> np.ndarray:
        """Evaluate ``points[i]`` on ``tokens[i]`` for every row i.

        The default loops over :meth:`evaluate`; subclasses with vectorized
        math should override.  Must be equivalent to the per-row loop.
        """
        points = np.asarray(points, dtype=float)
        return np.array(
            [self.evaluate(points[i], int(tokens[i])) for i in range(len(tokens))]
        )


def oracle_eval(oracle: StochasticOracle, x, token: int) -> float:
    """Validated single oracle evaluation ``f_token(x)``."""
    x = as_vector(x, dim=oracle.dim)
    return float(oracle.evaluate(x, int(token)))


@dataclass
class ProblemSpec:
    """A composite optimization problem ``F(x) + h(x)``.

    Parameters
    ----------
    dim : int
        Dimension of the decision vector.
    oracle : StochasticOracle
        Stochastic oracle for the smooth-free part ``F``.
    regularizer : Regularizer
        Convex regularizer ``h`` with prox / LMO oracles.
    lipschitz_G : float
        Bound ``G`` with ``E[L^2] <= G^2`` over the sampled Lipschitz
        constants.  User supplied; never estimated here.
    smoothing_c : float
        Absolute constant in the ``c*G*sqrt(d)/delta`` gradient-Lipschitz
        bound of the smoothed surrogate.  Defaults to 1; all derived step
        sizes scale as ``1/c`` so tuning absorbs it.
    """

    dim: int
    oracle: StochasticOracle
    regularizer: "Regularizer"
    lipschitz_G: float
    smoothing_c: float = 1.0
    name: str = field(default="", compare=False)


def validate_problem(spec: ProblemSpec, require_radius: bool = False) -> None:
    """Check a problem against the standing requirements.

    Raises :class:`InvalidProblem` naming the violated requirement.  With
    ``require_radius=True`` (conditional-gradient use) the regularizer must
    also admit a finite growth radius for ``lipschitz_G``.
    """
    if int(spec.dim) < 1:
        raise InvalidProblem(f"dim must be >= 1, got {spec.dim}")
    if not spec.lipschitz_G > 0:
        raise InvalidProblem(f"lipschitz_G must be positive, got {spec.lipschitz_G}")
    if not spec.smoothing_c > 0:
        raise InvalidProblem(f"smoothing_c must be positive, got {spec.smoothing_c}")
    oracle_dim = getattr(spec.oracle, "dim", None)
    if oracle_dim is not None and oracle_dim != spec.dim:
        raise InvalidProblem(
            f"oracle dimension {oracle_dim} does not match problem dim {spec.dim}"
        )
    reg_dim = getattr(spec.regularizer, "dim", None)
    if reg_dim is not None and reg_dim != spec.dim:
        raise InvalidProblem(
            f"regularizer dimension {reg_dim} does not match problem dim {spec.dim}"
        )
    anchor = spec.regularizer.anchor(spec.dim)
    if not np.isfinite(spec.regularizer.value(anchor)):
        raise InvalidProblem("regularizer reports no feasible anchor with finite value")
    if require_radius:
        try:
            spec.regularizer.anchor_radius(spec.lipschitz_G, spec.dim)
        except NoRadius as exc:
            raise InvalidProblem(
                f"regularizer growth radius undefined: {exc}"
            ) from exc


def objective_estimate(
    problem: ProblemSpec,
    x,
    n_samples: int,
    rng: RngStream,
    without_replacement: bool = False,
) -> float:
    """Monte-Carlo estimate of the composite objective at ``x``.

    Averages ``n_samples`` oracle evaluations (tokens drawn i.i.d. through
    ``rng``) and adds the regularizer value.  ``without_replacement`` draws
    distinct dataset indices from a finite-sum oracle, so a full pass gives
    the exact finite-sum objective.
    """
    x = as_vector(x, dim=problem.dim)
    n_samples = check_positive_int(n_samples, "n_samples")
    oracle = problem.oracle
    if without_replacement:
        n_total = getattr(oracle, "n_samples", None)
        if n_total is None:
            raise InvalidProblem(
                "without_replacement sampling needs a finite-sum oracle"
            )
        if n_samples > n_total:
            raise InvalidProblem(
                f"cannot draw {n_samples} distinct indices from {n_total} samples"
            )
        tokens = rng.generator.choice(n_total, size=n_samples, replace=False)
    else:
        tokens = oracle.sample(rng, n_samples)
    points = np.broadcast_to(x, (n_samples, x.shape[0]))
    values = oracle.evaluate_batch(points, tokens)
    return float(np.mean(values)) + float(problem.regularizer.value(x))
