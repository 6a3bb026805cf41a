"""Exception hierarchy for the shock-interaction solver."""


class ShockIntError(Exception):
    """Base class for all solver errors."""


class ConfigError(ShockIntError):
    """Malformed or inconsistent run configuration."""


class NonPositiveDensity(ShockIntError):
    """Density must be strictly positive."""


class OutOfRangeInvariants(ShockIntError):
    """(alpha+beta)/2 fell below the range of the Riemann potential."""


class DegenerateJump(ShockIntError):
    """Density jump too small to define a shock speed."""


class NewtonDiverged(ShockIntError):
    """Newton iteration failed to converge or left the admissible region."""


class SingularJacobian(ShockIntError):
    """Derivative of the jump residual vanished (sonic degeneracy)."""


class NotOnHugoniot(ShockIntError):
    """Jump pair does not satisfy the jump conditions within tolerance."""


class SonicDegeneracy(ShockIntError):
    """Shock speed coincides with a characteristic speed behind the shock."""


class CharacteristicFocusing(ShockIntError):
    """Simple-wave characteristics would cross inside the time horizon."""


class HorizonExceeded(ShockIntError):
    """Query time outside the validity interval of an ahead field."""


class BadResolution(ShockIntError):
    """Grid resolution below the supported minimum."""


class OutOfRow(ShockIntError):
    """Integration limits outside the u-range of the requested grid row."""


class LeavesDomain(ShockIntError):
    """Integration path leaves the triangular domain."""


class OutsideDomain(ShockIntError):
    """Evaluation point outside the triangular domain."""


class NoAdmissibleRoot(ShockIntError):
    """Interaction-point jump conditions have no admissible solution."""


class AmbiguousRoot(ShockIntError):
    """More than one admissible interaction-point solution was found."""


class DeterminismViolated(ShockIntError):
    """A determinism inequality failed where it was required to hold."""


class ContainmentViolated(ShockIntError):
    """A shock trace left the future development of its data set."""


class NotConverged(ShockIntError):
    """Fixed-point iteration did not reach the requested tolerance."""


class UniquenessCheckFailed(ShockIntError):
    """Perturbed-seed rerun did not land on the baseline solution."""
