"""Exception hierarchy shared across the package."""

from __future__ import annotations


class KeplerError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateStateError(KeplerError):
    """A computation was requested at a state where it is undefined."""


class SingularOriginError(DegenerateStateError):
    """Position magnitude at or below the force-law singularity floor."""


class RadialStateError(DegenerateStateError):
    """Angular momentum vanishes; plane-of-motion constructions undefined."""


class DegenerateDirectionError(DegenerateStateError):
    """LRL vector vanishes (circular orbit); its direction is undefined."""


class ApsisError(DegenerateStateError):
    """r.v = 0 and the requested gauge completion has no finite value there."""


class IntegrationError(KeplerError):
    """Numerical integration could not be completed."""


class CollisionError(IntegrationError):
    """Trajectory radius fell below the collision floor."""


class StepUnderflowError(IntegrationError):
    """Adaptive step size collapsed below the representable minimum."""


class FlowDegeneracyError(DegenerateStateError):
    """Symmetry-flow integration hit a degenerate or non-finite state."""


class InadmissibleTransformError(KeplerError):
    """Transform parameters leave the domain where the closed form is real.

    Carries the offending square-root argument when one exists.
    """

    def __init__(self, message: str, root_argument: float | None = None):
        super().__init__(message)
        self.root_argument = root_argument


class UsageError(KeplerError):
    """Malformed user input (CLI parsing, bad configuration values)."""
