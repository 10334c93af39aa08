"""Drude permittivity and the permittivity <-> spectral-parameter maps.

All frequencies are normalized by the plasma frequency, so ``omega_hat = 1``
is the plasma edge and ``gamma_hat`` is the dimensionless damping rate.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularityError

__all__ = ["DrudeParams", "SpectralPoint", "drude_eps", "z_from_eps", "eps_from_z", "spectral_point"]


@dataclass(frozen=True)
class DrudeParams:
    gamma_hat: float = 0.0

    def __post_init__(self):
        if not self.gamma_hat >= 0:
            raise DomainError(f"gamma_hat must be >= 0, got {self.gamma_hat}")


@dataclass(frozen=True)
class SpectralPoint:
    """Material state at one frequency; ``k = z / h`` is the longitudinal wavenumber."""

    omega_hat: float
    eps: complex
    z: complex
    h: float
    k: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "k", self.z / self.h)


def drude_eps(omega_hat, params):
    """Drude permittivity ``1 - 1 / (w^2 + i g w)`` in plasma units.

    Vectorized over ``omega_hat``.
    """
    w = np.asarray(omega_hat, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega_hat must be positive")
    eps = 1.0 - 1.0 / (w * w + 1j * params.gamma_hat * w)
    return complex(eps) if eps.ndim == 0 else eps


def z_from_eps(eps):
    """Spectral parameter ``z = sqrt(eps / (1 - eps))`` on the physical branch.

    The principal root is taken and then flipped into the upper half plane,
    so real negative ``eps`` lands on the positive imaginary axis and
    ``0 < eps < 1`` on the positive real axis. For ``Im(z^2) >= 0`` the
    result lies in the closed first quadrant.
    """
    e = np.asarray(eps, dtype=complex)
    if np.any(e == 1):
        raise SingularityError("z(eps) has a pole at eps = 1")
    z = np.sqrt(e / (1.0 - e))
    flip = (z.imag < 0) | ((z.imag == 0) & (z.real < 0))
    z = np.where(flip, -z, z)
    return complex(z) if z.ndim == 0 else z


def eps_from_z(z):
    """Permittivity ``z^2 / (z^2 + 1)``."""
    zz = np.asarray(z, dtype=complex)
    z2 = zz * zz
    if np.any(z2 == -1):
        raise SingularityError("eps(z) has poles at z = +/- i")
    eps = z2 / (z2 + 1.0)
    return complex(eps) if eps.ndim == 0 else eps


def spectral_point(omega_hat, params, h):
    eps = drude_eps(omega_hat, params)
    return SpectralPoint(float(omega_hat), eps, z_from_eps(eps), float(h))
