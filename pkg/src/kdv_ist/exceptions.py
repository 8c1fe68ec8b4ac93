"""Error types raised by the IST engine.

Every error derives from :class:`ISTError`.  Errors that signal a numerical
failure (as opposed to bad input) also derive from :class:`NumericalFailure`,
which the command-line front end maps to exit status 2.
"""


class ISTError(Exception):
    """Base class for all package errors."""


class ConfigError(ISTError, ValueError):
    """Invalid user configuration or input."""


class GridMismatch(ISTError, ValueError):
    """Two grid functions live on different momentum grids."""


class NumericalFailure(ISTError, RuntimeError):
    """Base class for failures of a numerical procedure."""


class NonConvergence(NumericalFailure):
    """An iterative solver hit its iteration cap."""


class IndefiniteOperator(NumericalFailure):
    """A negative Ritz value was found for an operator assumed positive."""


class StiffFailure(NumericalFailure):
    """The ODE integrator failed (step-size underflow)."""


class TailTooShort(NumericalFailure):
    """The truncation box is too short for the potential's tail."""


class NearZeroMomentum(NumericalFailure, ValueError):
    """A momentum inside the excluded band around k = 0 was requested."""


class NotABoundState(NumericalFailure, ValueError):
    """The Wronskian does not vanish at the requested imaginary momentum."""


class UnresolvedJump(NumericalFailure):
    """One-sided limits at a detected jump do not stabilize."""


class ExtrapolationDivergence(NumericalFailure):
    """Successive extrapolation stages disagree beyond tolerance."""


class WronskianNearZero(NumericalFailure):
    """A Wronskian is too small to divide by safely."""


class DivergentIntegrand(NumericalFailure):
    """An integrand is unbounded on a resolved set of nodes."""


class ExponentOverflow(NumericalFailure, OverflowError):
    """An exponential growth factor exceeds the floating-point budget."""


class NoKnownFacts(ISTError, KeyError):
    """No closed-form scattering facts are catalogued for this potential."""


class PoleAtResonance(ISTError, ValueError):
    """A closed-form expression was evaluated at one of its poles."""


class NonSelfAdjointSymbol(ISTError, ValueError):
    """A symbol violates the self-adjointness condition J(phi) = conj(phi)."""
