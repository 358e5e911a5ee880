"""Exception hierarchy shared by the engine, the comparator and the CLI."""

from __future__ import annotations


class HelmrayError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(HelmrayError, ValueError):
    """Invalid unit inputs, scenario parameters or run-config documents."""


class NumericalError(HelmrayError, ArithmeticError):
    """A run left the regime where the discretization is meaningful."""


class DegenerateFrontError(NumericalError):
    pass


class CausticError(NumericalError):
    """Adjacent rays met or crossed; tube widths are no longer positive."""


class EnergyDriftError(NumericalError):
    pass


class TurningPointError(NumericalError):
    """E - V reached zero on a ray (relativistic velocity is singular)."""


class EvanescentError(NumericalError):
    """Refractive index n <= 0 (or n**2 <= 0): the wave cannot propagate."""


class DomainEscapeError(NumericalError):
    pass


class NodeError(NumericalError):
    """Wave function amplitude at a node where guidance/Q_B are undefined."""


class OutOfDomainError(HelmrayError, ValueError):
    """Query outside a tabulated field's grid."""
