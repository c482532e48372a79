"""Exception types raised across the package."""


class ZocoptError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ZocoptError, ValueError):
    """A vector argument has the wrong length or shape."""


class InvalidProblem(ZocoptError, ValueError):
    """A problem definition violates one of the standing requirements."""


class UnboundedLMO(ZocoptError, ValueError):
    """The linear minimization subproblem has no finite minimizer."""


class NoRadius(ZocoptError, ValueError):
    """The regularizer admits no finite growth radius for the given bound."""


class MissingRadius(ZocoptError, ValueError):
    """A conditional-gradient calculation needs a radius that was not given."""


class EmptyTrace(ZocoptError, ValueError):
    """An operation requires a trace with at least one record."""


class GCGInfeasibleStart(ZocoptError, ValueError):
    """The conditional-gradient start point lies outside the feasible ball."""


class InfeasiblePoint(ZocoptError, ValueError):
    """A point with infinite regularizer value was passed where a finite one
    is required."""


class NonFiniteLogits(ZocoptError, ValueError):
    """Network logits contain NaN or infinity."""


class ParseError(ZocoptError, ValueError):
    """A config file or config value could not be parsed."""


class UnknownKey(ParseError):
    """A config file contains a key that is not recognized."""
