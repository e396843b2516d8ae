"""Exception types shared across the library."""


class GnaturalError(Exception):
    """Base class for all errors raised by this package."""


class OutOfChart(GnaturalError):
    """A point, or the finite-difference stencil around it, leaves the chart."""


class NotPositiveDefinite(GnaturalError):
    """The base metric fails the positive-definiteness check."""


class SingularMetric(GnaturalError):
    """The base metric matrix cannot be inverted."""


class SingularMu(GnaturalError):
    """a*(a + b*|u|^2) vanishes, so a*I + b*u*u^T has no closed-form inverse."""


class DegenerateAt(GnaturalError):
    """The bundle metric is degenerate at the requested squared norm t."""

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"bundle metric degenerate at t={self.t:.6g} (alpha*phi ~ 0)")


class SideConditionFailed(GnaturalError):
    """alpha1*(alpha1+alpha3) or phi1*(phi1+phi3) vanishes; the closed-form
    inverse is only certified away from these zeros."""


class DegeneratePlane(GnaturalError):
    """Two lift vectors do not span a plane with nonzero Gram determinant."""


class UnknownPreset(GnaturalError):
    """Unknown profile preset name."""


class UnknownManifold(GnaturalError):
    """Unknown built-in manifold name."""


class ProfileFormatError(GnaturalError):
    """A profile document does not match the expected schema."""


class ConfigError(GnaturalError):
    """Invalid command-line configuration."""
