"""Spherical Bessel, Hankel and real spherical harmonic functions.

Complex arguments are supported throughout. The Bessel functions are computed
for all orders ``0..lmax`` at once (Miller's downward recurrence for ``j``,
upward recurrence for ``h``), so callers that need a whole ladder of degrees
pay for a single sweep.

Scaled variants factor out the exponential size of the functions so that
products such as ``h_l(k) j_l(k)`` stay finite when ``|Im k|`` is in the
thousands::

    j_true = j_stored * exp(|Im x|)
    h_true = h_stored * exp(-Im x)
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln, lpmv

from .errors import DomainError, SingularityError

__all__ = [
    "SphBesselPair",
    "SphHankelPair",
    "JHProducts",
    "sph_jn_all",
    "sph_h1_all",
    "jh_products_all",
    "sph_jn_logderiv_all",
    "sph_bessel_j",
    "sph_hankel1",
    "scaled_jh_products",
    "real_sph_harm",
]

_BIG = 1e250
_SMALL_X = 0.5


@dataclass(frozen=True)
class SphBesselPair:
    j: complex
    jp: complex


@dataclass(frozen=True)
class SphHankelPair:
    """Value and derivative of h_l^(1); true value is ``h * exp(scale_log)``."""

    h: complex
    hp: complex
    scale_log: float = 0.0

    def unscaled(self):
        f = math.exp(self.scale_log)
        return self.h * f, self.hp * f


@dataclass(frozen=True)
class JHProducts:
    hj: complex
    hjp: complex


def _as_complex(x):
    x = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(x)):
        raise DomainError("spherical Bessel argument must be finite")
    return x


def _miller_start(lmax, xmax):
    # Contamination by y_l decays like exp(-c (N - |x|)^1.5 / sqrt|x|);
    # 8 |x|^(1/3) extra terms push it below double precision.
    return int(max(lmax, math.ceil(xmax)) + 20 + math.ceil(8.0 * xmax ** (1.0 / 3.0)))


def _scaled_sin_cos(x):
    """sin(x), cos(x) multiplied by exp(-|Im x|)."""
    a, b = x.real, x.imag
    e = np.exp(-2.0 * np.abs(b))
    ch = 0.5 * (1.0 + e)
    sh = np.sign(b) * 0.5 * (1.0 - e)
    s = np.sin(a) * ch + 1j * np.cos(a) * sh
    c = np.cos(a) * ch - 1j * np.sin(a) * sh
    return s, c


def _j01_series(x):
    x2 = x * x
    j0 = np.zeros_like(x)
    j1 = np.zeros_like(x)
    t0 = np.ones_like(x)
    t1 = x / 3.0
    for m in range(14):
        j0 = j0 + t0
        j1 = j1 + t1
        t0 = t0 * (-x2 / 2.0) / ((m + 1) * (2 * m + 3))
        t1 = t1 * (-x2 / 2.0) / ((m + 1) * (2 * m + 5))
    return j0, j1


def _j01_scaled(x):
    """j_0, j_1 times exp(-|Im x|)."""
    small = np.abs(x) < _SMALL_X
    xs = np.where(small, 1.0, x)
    s, c = _scaled_sin_cos(xs)
    j0 = s / xs
    j1 = s / (xs * xs) - c / xs
    if np.any(small):
        sj0, sj1 = _j01_series(np.where(small, x, 0.0))
        damp = np.exp(-np.abs(x.imag))
        j0 = np.where(small, sj0 * damp, j0)
        j1 = np.where(small, sj1 * damp, j1)
    return j0, j1


def sph_jn_all(lmax, x, scaled=False):
    """Spherical Bessel ``j_l`` and ``j_l'`` for ``l = 0..lmax``.

    Parameters
    ----------
    lmax : int
        Highest degree.
    x : complex or array_like
        Argument(s).
    scaled : bool
        If True the values are multiplied by ``exp(-|Im x|)`` and the log
        scale ``|Im x|`` is returned as a third output.

    Returns
    -------
    j, jp : ndarray, shape ``(lmax + 1,) + x.shape``
    scale_log : ndarray, only when ``scaled``
    """
    if lmax < 0:
        raise DomainError("lmax must be >= 0")
    x = _as_complex(x)
    shape = x.shape
    x = x.ravel()
    zero = x == 0
    xs = np.where(zero, 1.0, x)
    n_start = _miller_start(lmax, float(np.max(np.abs(xs))) if xs.size else 1.0)

    f = np.zeros((n_start + 2, x.size), dtype=complex)
    f[n_start] = 1.0
    inv = 1.0 / xs
    for ell in range(n_start, 0, -1):
        f[ell - 1] = (2 * ell + 1) * inv * f[ell] - f[ell + 1]
        big = np.abs(f[ell - 1]) > _BIG
        if np.any(big):
            f[ell - 1:, big] *= 1.0 / _BIG

    j0, j1 = _j01_scaled(xs)
    f0, f1 = f[0], f[1]
    # Least-squares normalization against both closed forms: robust near
    # zeros of either one.
    m = np.maximum(np.abs(f0), np.abs(f1))
    g0, g1 = f0 / m, f1 / m
    s = (j0 * np.conj(g0) + j1 * np.conj(g1)) / (np.abs(g0) ** 2 + np.abs(g1) ** 2) / m
    j = f[: lmax + 2] * s
    j[0], j[1] = j0, j1

    jp = np.empty((lmax + 1, x.size), dtype=complex)
    jp[0] = -j[1]
    if lmax >= 1:
        ells = np.arange(1, lmax + 1)[:, None]
        jp[1:] = j[:lmax] - (ells + 1) * inv * j[1: lmax + 1]
    j = j[: lmax + 1]

    scale_log = np.abs(x.imag)
    if np.any(zero):
        j[:, zero] = 0.0
        j[0, zero] = 1.0
        jp[:, zero] = 0.0
        if lmax >= 1:
            jp[1, zero] = 1.0 / 3.0
    if not scaled:
        growth = np.exp(scale_log)
        j = j * growth
        jp = jp * growth
        return j.reshape((lmax + 1,) + shape), jp.reshape((lmax + 1,) + shape)
    return (
        j.reshape((lmax + 1,) + shape),
        jp.reshape((lmax + 1,) + shape),
        scale_log.reshape(shape),
    )


def sph_jn_logderiv_all(lmax, x):
    """Log-derivatives ``x j_l'(x) / j_l(x)`` for ``l = 0..lmax``.

    Built from the backward recurrence of the ratios ``j_l / j_{l-1}``, so
    nothing underflows even when ``j_l`` itself is far below the smallest
    double. Undefined at real zeros of ``j_l``.
    """
    if lmax < 0:
        raise DomainError("lmax must be >= 0")
    x = _as_complex(x)
    shape = x.shape
    x = x.ravel()
    zero = x == 0
    xs = np.where(zero, 1.0, x)
    n_start = _miller_start(lmax, float(np.max(np.abs(xs))) if xs.size else 1.0)
    out = np.empty((lmax + 1, x.size), dtype=complex)
    q = np.zeros(x.size, dtype=complex)
    for ell in range(n_start, 0, -1):
        # q_l = j_l / j_{l-1}
        q = xs / ((2 * ell + 1) - xs * q)
        if ell <= lmax:
            out[ell] = xs / q - (ell + 1)
    out[0] = -xs * q
    if np.any(zero):
        out[:, zero] = np.arange(lmax + 1)[:, None]
    return out.reshape((lmax + 1,) + shape)


def sph_h1_all(lmax, x, scaled=False):
    """Spherical Hankel ``h_l^(1)`` and derivative for ``l = 0..lmax``.

    With ``scaled=True`` the factor ``exp(-Im x)`` is removed and returned as
    ``scale_log = -Im x``.
    """
    if lmax < 0:
        raise DomainError("lmax must be >= 0")
    x = _as_complex(x)
    if np.any(x == 0):
        raise SingularityError("h_l^(1) is singular at x = 0")
    shape = x.shape
    x = x.ravel()
    inv = 1.0 / x
    phase = np.exp(1j * x.real)
    h = np.empty((lmax + 2, x.size), dtype=complex)
    h[0] = -1j * phase * inv
    h[1] = -phase * (x + 1j) * inv * inv
    for ell in range(1, lmax + 1):
        h[ell + 1] = (2 * ell + 1) * inv * h[ell] - h[ell - 1]
    hp = np.empty((lmax + 1, x.size), dtype=complex)
    hp[0] = -h[1]
    if lmax >= 1:
        ells = np.arange(1, lmax + 1)[:, None]
        hp[1:] = h[:lmax] - (ells + 1) * inv * h[1: lmax + 1]
    h = h[: lmax + 1]
    scale_log = -x.imag
    if not scaled:
        f = np.exp(scale_log)
        h = h * f
        hp = hp * f
        return h.reshape((lmax + 1,) + shape), hp.reshape((lmax + 1,) + shape)
    return (
        h.reshape((lmax + 1,) + shape),
        hp.reshape((lmax + 1,) + shape),
        scale_log.reshape(shape),
    )


def jh_products_all(lmax, k):
    """Products ``h_l(k) j_l(k)`` and ``h_l(k) j_l'(k)`` for ``l = 0..lmax``.

    The exponential scales of the two factors cancel exactly for
    ``Im k >= 0``, so the products are finite even where ``j`` alone
    overflows and ``h`` alone underflows.
    """
    k = _as_complex(k)
    if np.any(k == 0):
        raise SingularityError("h_l j_l products are singular at k = 0")
    j, jp, sj = sph_jn_all(lmax, k, scaled=True)
    h, hp, sh = sph_h1_all(lmax, k, scaled=True)
    f = np.exp(sj + sh)
    return h * j * f, h * jp * f


def sph_bessel_j(ell, x):
    """``j_l(x)`` and ``j_l'(x)`` for a single degree and argument."""
    if ell < 0:
        raise DomainError("ell must be >= 0")
    j, jp = sph_jn_all(ell, complex(x))
    return SphBesselPair(complex(j[ell]), complex(jp[ell]))


def sph_hankel1(ell, x, scaled=False):
    """``h_l^(1)(x)`` and its derivative for a single degree and argument."""
    if ell < 0:
        raise DomainError("ell must be >= 0")
    if complex(x) == 0:
        raise SingularityError("h_l^(1) is singular at x = 0")
    if scaled:
        h, hp, s = sph_h1_all(ell, complex(x), scaled=True)
        return SphHankelPair(complex(h[ell]), complex(hp[ell]), float(s))
    h, hp = sph_h1_all(ell, complex(x))
    return SphHankelPair(complex(h[ell]), complex(hp[ell]), 0.0)


def scaled_jh_products(ell, k):
    """``h_l(k) j_l(k)`` and ``h_l(k) j_l'(k)`` for a single degree."""
    if ell < 0:
        raise DomainError("ell must be >= 0")
    hj, hjp = jh_products_all(ell, complex(k))
    return JHProducts(complex(hj[ell]), complex(hjp[ell]))


def real_sph_harm(ell, m, theta, phi):
    """Real orthonormal spherical harmonic ``Y_lm(theta, phi)``.

    ``m > 0`` uses ``cos(m phi)``, ``m < 0`` uses ``sin(|m| phi)``; the
    Condon-Shortley phase is included. Vectorized over ``theta`` and ``phi``.
    """
    if ell < 0 or abs(m) > ell:
        raise DomainError(f"need 0 <= |m| <= ell, got ell={ell}, m={m}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(m)
    lognorm = 0.5 * (
        math.log((2 * ell + 1) / (4 * math.pi)) + gammaln(ell - am + 1) - gammaln(ell + am + 1)
    )
    p = lpmv(am, ell, np.cos(theta)) * math.exp(lognorm)
    if m == 0:
        out = p
    elif m > 0:
        out = math.sqrt(2.0) * p * np.cos(am * phi)
    else:
        out = math.sqrt(2.0) * p * np.sin(am * phi)
    return out if out.ndim else float(out)
