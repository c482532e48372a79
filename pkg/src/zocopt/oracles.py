"""Concrete stochastic oracles: synthetic test functions and finite sums.

Synthetic oracles treat the sample token as an RNG sub-seed, finite-sum
oracles treat it as a dataset index.  All evaluations are pure functions of
``(x, token)``.
"""

from __future__ import annotations

import numpy as np

from .problem import StochasticOracle
from .rng import RngStream
from .validation import as_vector

_TOKEN_RANGE = 2**63


def _draw_tokens(rng: RngStream, size: int) -> np.ndarray:
    return rng.generator.integers(0, _TOKEN_RANGE, size=size, dtype=np.int64)


class SyntheticOracle(StochasticOracle):
    """Base for oracles whose tokens are plain RNG sub-seeds."""

    def sample(self, rng: RngStream, size: int) -> np.ndarray:
        return _draw_tokens(rng, size)


class FiniteSumOracle(StochasticOracle):
    """Oracle that averages a finite collection of sampled terms.

    Tokens are dataset indices, drawn uniformly, so the expectation is the
    plain average over the collection.
    """

    #: number of terms in the sum
    n_samples: int

    def sample(self, rng: RngStream, size: int) -> np.ndarray:
        return rng.generator.integers(0, self.n_samples, size=size, dtype=np.int64)

    def full_pass_value(self, x: np.ndarray) -> float:
        """Exact average over every term."""
        x = as_vector(x, dim=self.dim)
        points = np.broadcast_to(x, (self.n_samples, self.dim))
        return float(np.mean(self.evaluate_batch(points, np.arange(self.n_samples))))


class LinearOracle(SyntheticOracle):
    """Deterministic linear objective ``<a, x>``; Lipschitz bound ``|a|``."""

    def __init__(self, slope):
        self.slope = as_vector(slope, name="slope")
        self.dim = self.slope.shape[0]
        self.lipschitz_bound = float(np.linalg.norm(self.slope))

    def evaluate(self, x, token):
        return float(np.dot(self.slope, as_vector(x, self.dim)))

    def evaluate_batch(self, points, tokens):
        return np.asarray(points, dtype=float) @ self.slope


class NoisyLinearOracle(SyntheticOracle):
    """Linear objective with a zero-mean random slope perturbation.

    ``f(x, token) = <a + scale * z(token), x>`` with ``z(token)`` standard
    normal, so ``F(x) = <a, x>`` and ``E[L^2] = |a|^2 + scale^2 * dim``.
    """

    def __init__(self, slope, noise_scale=0.1):
        self.slope = as_vector(slope, name="slope")
        self.noise_scale = float(noise_scale)
        self.dim = self.slope.shape[0]
        self.lipschitz_bound = float(
            np.sqrt(np.dot(self.slope, self.slope) + self.noise_scale**2 * self.dim)
        )

    def _slope_for(self, token):
        z = np.random.default_rng(token).standard_normal(self.dim)
        return self.slope + self.noise_scale * z

    def evaluate(self, x, token):
        return float(np.dot(self._slope_for(token), as_vector(x, self.dim)))


class L1NormOracle(SyntheticOracle):
    """Deterministic ``|x|_1``; Lipschitz bound ``sqrt(dim)`` in l2."""

    def __init__(self, dim):
        self.dim = int(dim)
        self.lipschitz_bound = float(np.sqrt(self.dim))

    def evaluate(self, x, token):
        return float(np.sum(np.abs(as_vector(x, self.dim))))

    def evaluate_batch(self, points, tokens):
        return np.sum(np.abs(np.asarray(points, dtype=float)), axis=1)


class HalfSquaredNormOracle(SyntheticOracle):
    """Deterministic ``0.5 * |x - center|^2`` (smooth; locally Lipschitz)."""

    def __init__(self, dim, center=None):
        self.dim = int(dim)
        self.center = (
            np.zeros(self.dim) if center is None else as_vector(center, self.dim)
        )

    def evaluate(self, x, token):
        diff = as_vector(x, self.dim) - self.center
        return float(0.5 * np.dot(diff, diff))

    def evaluate_batch(self, points, tokens):
        diff = np.asarray(points, dtype=float) - self.center
        return 0.5 * np.sum(diff * diff, axis=1)


class ConstantOracle(SyntheticOracle):
    """Oracle returning a constant regardless of point or token."""

    def __init__(self, dim, value=0.0):
        self.dim = int(dim)
        self.value = float(value)
        self.lipschitz_bound = 0.0

    def evaluate(self, x, token):
        as_vector(x, self.dim)
        return self.value

    def evaluate_batch(self, points, tokens):
        return np.full(len(tokens), self.value)


class CountingOracle(StochasticOracle):
    """Wrapper that counts every evaluation made through it.

    Used to verify that reported function-evaluation totals match the number
    of calls an oracle actually receives.
    """

    def __init__(self, inner: StochasticOracle):
        self.inner = inner
        self.dim = inner.dim
        self.count = 0

    def reset(self):
        self.count = 0

    def evaluate(self, x, token):
        self.count += 1
        return self.inner.evaluate(x, token)

    def evaluate_batch(self, points, tokens):
        self.count += len(tokens)
        return self.inner.evaluate_batch(points, tokens)

    def sample(self, rng, size):
        return self.inner.sample(rng, size)

    @property
    def n_samples(self):
        return getattr(self.inner, "n_samples", None)
