"""Convex regularizers with value, prox, and linear-minimization oracles.

Every regularizer ``h`` provides:

* ``value(x)`` -- possibly ``+inf`` for indicator functions,
* ``prox(v, gamma)`` -- the minimizer of ``h(y) + |y - v|^2 / (2 gamma)``,
* ``lmo(g)`` -- a minimizer of ``h(y) + <y, g>`` (raises
  :class:`UnboundedLMO` when none exists),
* ``anchor(dim)`` / ``anchor_radius(G, dim)`` -- a feasible point and a
  radius ``R`` such that ``h(x) > h(anchor) + G * |x - anchor|`` whenever
  ``|x - anchor| > R``.  For ``|g| <= G`` every LMO output then stays within
  ``R`` of the anchor.

All operations are pure and therefore safe for unrestricted concurrent use.
"""

from __future__ import annotations

import warnings
from abc import ABC, abstractmethod
from typing import NamedTuple

import numpy as np

from .exceptions import NoRadius, UnboundedLMO
from .validation import as_vector, check_positive

# Relative slack when testing membership of indicator sets, so points that
# are feasible up to rounding (e.g. iterates of a projection loop) do not
# get an infinite value.
_MEMBERSHIP_RTOL = 1e-9
_MEMBERSHIP_ATOL = 1e-12


class AnchorRadius(NamedTuple):
    anchor: np.ndarray
    radius: float


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    """Elementwise ``sign(v) * max(|v| - t, 0)``."""
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class Regularizer(ABC):
    """Base class for convex regularizers."""

    #: intrinsic dimension, or None when the regularizer works in any dimension
    dim: int | None = None
    #: True when ``prox(v, gamma) == v`` identically (the zero regularizer)
    prox_is_identity: bool = False

    @abstractmethod
    def value(self, x) -> float:
        """``h(x)``; ``+inf`` outside an indicator's set."""

    @abstractmethod
    def prox(self, v, gamma: float) -> np.ndarray:
        """Minimizer of ``h(y) + |y - v|^2 / (2 gamma)``."""

    @abstractmethod
    def lmo(self, g) -> np.ndarray:
        """A minimizer of ``h(y) + <y, g>``."""

    @abstractmethod
    def anchor(self, dim: int) -> np.ndarray:
        """A feasible point with finite value."""

    @abstractmethod
    def anchor_radius(self, lipschitz_bound: float, dim: int) -> AnchorRadius:
        """Anchor plus growth radius for the given Lipschitz bound."""

    def _check(self, x, name="x") -> np.ndarray:
        return as_vector(x, dim=self.dim, name=name)


class L1(Regularizer):
    """``lam * |x|_1``."""

    def __init__(self, lam: float):
        self.lam = check_positive(lam, "lam")

    def value(self, x):
        return self.lam * float(np.sum(np.abs(self._check(x))))

    def prox(self, v, gamma):
        gamma = check_positive(gamma, "gamma")
        return soft_threshold(self._check(v, "v"), gamma * self.lam)

    def lmo(self, g):
        g = self._check(g, "g")
        if np.max(np.abs(g), initial=0.0) > self.lam:
            raise UnboundedLMO(
                "l1 linear minimization is unbounded when max|g| exceeds the weight"
            )
        return np.zeros_like(g)

    def anchor(self, dim):
        return np.zeros(dim)

    def anchor_radius(self, lipschitz_bound, dim):
        G = check_positive(lipschitz_bound, "lipschitz_bound")
        if self.lam <= G:
            raise NoRadius(
                "pure l1 growth cannot dominate the objective slope unless its "
                f"weight exceeds the Lipschitz bound (lam={self.lam}, G={G})"
            )
        # lam > G: the growth condition holds for every positive radius and
        # the composite minimizer collapses onto the anchor.
        warnings.warn(
            "l1 weight exceeds the Lipschitz bound: the problem is degenerate "
            "(the minimizer is the anchor); returning the conventional radius 1.0",
            stacklevel=2,
        )
        return AnchorRadius(np.zeros(dim), 1.0)


class SquaredL2(Regularizer):
    """``lam / 2 * |x|^2``."""

    def __init__(self, lam: float):
        self.lam = check_positive(lam, "lam")

    def value(self, x):
        x = self._check(x)
        return 0.5 * self.lam * float(np.dot(x, x))

    def prox(self, v, gamma):
        gamma = check_positive(gamma, "gamma")
        return self._check(v, "v") / (1.0 + gamma * self.lam)

    def lmo(self, g):
        return -self._check(g, "g") / self.lam

    def anchor(self, dim):
        return np.zeros(dim)

    def anchor_radius(self, lipschitz_bound, dim):
        G = check_positive(lipschitz_bound, "lipschitz_bound")
        # lam/2 * r^2 > G * r as soon as r > 2G/lam
        return AnchorRadius(np.zeros(dim), 2.0 * G / self.lam)


class ElasticNet(Regularizer):
    """``lam1 * |x|_1 + lam2 / 2 * |x|^2``."""

    def __init__(self, lam1: float, lam2: float):
        self.lam1 = check_positive(lam1, "lam1")
        self.lam2 = check_positive(lam2, "lam2")

    def value(self, x):
        x = self._check(x)
        return self.lam1 * float(np.sum(np.abs(x))) + 0.5 * self.lam2 * float(
            np.dot(x, x)
        )

    def prox(self, v, gamma):
        gamma = check_positive(gamma, "gamma")
        v = self._check(v, "v")
        return soft_threshold(v, gamma * self.lam1) / (1.0 + gamma * self.lam2)

    def lmo(self, g):
        # coordinatewise stationarity of lam1|y| + lam2/2 y^2 + g y
        g = self._check(g, "g")
        return -soft_threshold(g, self.lam1) / self.lam2

    def anchor(self, dim):
        return np.zeros(dim)

    def anchor_radius(self, lipschitz_bound, dim):
        G = check_positive(lipschitz_bound, "lipschitz_bound")
        # quadratic part alone dominates; the l1 part only helps
        return AnchorRadius(np.zeros(dim), 2.0 * G / self.lam2)


class BallIndicator(Regularizer):
    """Indicator of the Euclidean ball ``{x : |x - center| <= radius}``."""

    def __init__(self, center, radius: float):
        self.center = as_vector(center, name="center")
        self.radius = check_positive(radius, "radius")
        self.dim = self.center.shape[0]

    def _inside(self, x) -> bool:
        dist = float(np.linalg.norm(x - self.center))
        return dist <= self.radius * (1.0 + _MEMBERSHIP_RTOL) + _MEMBERSHIP_ATOL

    def value(self, x):
        x = self._check(x)
        return 0.0 if self._inside(x) else np.inf

    def prox(self, v, gamma):
        check_positive(gamma, "gamma")
        v = self._check(v, "v")
        offset = v - self.center
        norm = float(np.linalg.norm(offset))
        if norm <= self.radius:
            return v.copy()
        return self.center + offset * (self.radius / norm)

    def lmo(self, g):
        g = self._check(g, "g")
        norm = float(np.linalg.norm(g))
        if norm == 0.0:
            # every feasible point is optimal; the center is deterministic
            return self.center.copy()
        return self.center - g * (self.radius / norm)

    def anchor(self, dim):
        if dim != self.dim:
            raise NoRadius(f"ball is {self.dim}-dimensional, problem wants {dim}")
        return self.center.copy()

    def anchor_radius(self, lipschitz_bound, dim):
        check_positive(lipschitz_bound, "lipschitz_bound")
        return AnchorRadius(self.anchor(dim), self.radius)


class BoxIndicator(Regularizer):
    """Indicator of the box ``{x : lower <= x <= upper}`` (componentwise)."""

    def __init__(self, lower, upper):
        self.lower = as_vector(lower, name="lower")
        self.upper = as_vector(upper, dim=self.lower.shape[0], name="upper")
        if not np.all(self.lower < self.upper):
            raise ValueError("lower must be strictly below upper componentwise")
        self.dim = self.lower.shape[0]

    def _inside(self, x) -> bool:
        span = self.upper - self.lower
        slack = _MEMBERSHIP_RTOL * span + _MEMBERSHIP_ATOL
        return bool(
            np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack)
        )

    def value(self, x):
        x = self._check(x)
        return 0.0 if self._inside(x) else np.inf

    def prox(self, v, gamma):
        check_positive(gamma, "gamma")
        return np.clip(self._check(v, "v"), self.lower, self.upper)

    def lmo(self, g):
        g = self._check(g, "g")
        mid = 0.5 * (self.lower + self.upper)
        # ties at g_i == 0 resolve to the midpoint, mirroring the ball's center rule
        return np.where(g > 0, self.lower, np.where(g < 0, self.upper, mid))

    def anchor(self, dim):
        if dim != self.dim:
            raise NoRadius(f"box is {self.dim}-dimensional, problem wants {dim}")
        return 0.5 * (self.lower + self.upper)

    def anchor_radius(self, lipschitz_bound, dim):
        check_positive(lipschitz_bound, "lipschitz_bound")
        half_diag = 0.5 * float(np.linalg.norm(self.upper - self.lower))
        return AnchorRadius(self.anchor(dim), half_diag)


class ZeroRegularizer(Regularizer):
    """The zero function ``h = 0``.

    Reduces proximal steps to plain gradient steps and the stationarity
    metric to the bare gradient-estimate norm.  It has no growth radius, so
    conditional-gradient runs correctly reject it.
    """

    prox_is_identity = True

    def value(self, x):
        self._check(x)
        return 0.0

    def prox(self, v, gamma):
        check_positive(gamma, "gamma")
        return self._check(v, "v").copy()

    def lmo(self, g):
        g = self._check(g, "g")
        if np.any(g != 0):
            raise UnboundedLMO("linear minimization over all of R^d is unbounded")
        return np.zeros_like(g)

    def anchor(self, dim):
        return np.zeros(dim)

    def anchor_radius(self, lipschitz_bound, dim):
        raise NoRadius("the zero regularizer has no growth radius")
