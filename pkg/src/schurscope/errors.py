"""Exception hierarchy and warning categories used across the library."""


class SchurScopeError(Exception):
    """Base class for every error raised by this library."""


class DomainError(SchurScopeError):
    """An argument violates a domain precondition (point outside the closed
    disk, parameter out of range, symbol failing self-map certification)."""


class DegenerateError(SchurScopeError):
    """The cleared preimage equation vanishes identically (constant symbol
    evaluated at its own value)."""


class SolverError(SchurScopeError):
    """Polynomial root refinement stagnated; a preimage could not be
    certified to the requested residual."""


class BasePointError(SchurScopeError):
    """The counting function was requested at the image of the origin,
    where it is undefined."""


class PreconditionError(SchurScopeError):
    """An inequality or average was requested outside the parameter range
    in which it is asserted."""


class FitError(SchurScopeError):
    """Exponent fit impossible: some mass in the sweep is exactly zero."""


class ZeroMaximalError(SchurScopeError):
    """The maximal counting function vanishes on the requested annulus, so
    the homogeneity ratio is vacuous."""


class ParseError(SchurScopeError):
    """Malformed symbol description (bad JSON or unknown schema)."""


class ResolutionWarning(UserWarning):
    """A boundary-crossing scan produced arcs near the probe spacing;
    crossings may have been missed.  Raise ``n_seed`` to confirm."""
