"""Classification labels for resonances."""
from enum import Enum

__all__ = ["ModeKind"]


class ModeKind(str, Enum):
    """Where a pole sits in the z-plane.

    Surface modes lie on the positive imaginary axis (eps < 0), bulk modes on
    the positive real axis (0 < eps < 1) and scattering resonances in the
    lower half plane. Anything else in the upper half plane is a
    discretization artifact.
    """

    SURFACE = "Surface"
    BULK = "Bulk"
    SCATTERING = "Scattering"
    ARTIFACT = "Artifact"

    def __str__(self):
        return self.value
