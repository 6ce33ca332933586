"""Exception taxonomy shared across the package."""


class GeomasianError(Exception):
    """Base class for all package errors."""


class DomainExitError(GeomasianError):
    """A transform argument left the strip on which F or R is finite."""


class BlowUpError(GeomasianError):
    """Riccati solution exploded before the horizon (moment explosion)."""

    def __init__(self, t: float, magnitude: float):
        super().__init__(f"|psi| exceeded blow-up threshold at t={t:.6g} (|psi|~{magnitude:.3g})")
        self.t = t
        self.magnitude = magnitude


class StepUnderflowError(GeomasianError):
    """Adaptive step collapsed below resolution (or step budget exhausted)."""


class NoConvergenceError(GeomasianError):
    """A series or iteration exhausted its budget without converging."""


class BranchAmbiguityError(GeomasianError):
    """Logarithm unwinding grid too coarse to track the branch; refine."""


class PoleProximityError(GeomasianError):
    """Transform argument too close to a kernel pole at u=0 or u=1."""


class NoValidAbscissaError(GeomasianError):
    """No contour abscissa with finite exponential moments was found."""


class TailNotDecayingError(GeomasianError):
    """Contour integrand at the truncation point is too large relative to its peak."""


class UnsupportedModelError(GeomasianError):
    """Requested operation is not available for this model variant."""


class ConfigError(GeomasianError):
    """Invalid or inconsistent job configuration."""


class PricingError(GeomasianError):
    """Wrapper for failures raised while computing a price."""
