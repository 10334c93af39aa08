"""Closed-form spectral data for a unit sphere.

On the unit sphere every layer operator is diagonal in the spherical
harmonics ``Y_lm``, so the nonlocal pencil reduces to one scalar function
``lambda_l(z)`` per degree. Its zeros are the resonances. Surface roots sit
on the positive imaginary ``z`` axis (``eps < 0``), bulk roots on the
positive real axis (``0 < eps < 1``).

Conventions: ``Gamma^k(x) = -exp(ik|x|) / (4 pi |x|)`` and ``k = z / h``.
The polarizability of the sphere in a uniform field ``v_ext = x_3`` is
``mu`` with ``v - v_ext ~ -mu cos(theta) / r^2``; in the local limit
``mu = (eps - 1) / (eps + 2)``.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.optimize import brentq
from scipy.special import spherical_jn

from .errors import ConvergenceError, DomainError, HypothesisError, ResonanceError, SingularityError
from .errors import TruncationWarning
from ._accel import jit
from .kinds import ModeKind
from .medium import DrudeParams, drude_eps, eps_from_z, z_from_eps
from .specfun import jh_products_all, sph_jn_all, sph_jn_logderiv_all
from .tables import SweepTable

__all__ = [
    "SphereSymbols",
    "DispersionRoot",
    "SpectrumTable",
    "sphere_symbols",
    "lambda_ell",
    "lambda_all",
    "lambda_scale",
    "local_eigenvalue",
    "dispersion_roots",
    "surface_root",
    "eigenvalue_table",
    "perturbation_shift",
    "scattered_coefficient",
    "scattered_coefficients",
    "local_scattered_coefficient",
    "polarizability",
    "absorption_spectrum",
    "dipole_projection",
    "near_field_response",
    "asymptotic_residual",
]

_NEWTON_MAXIT = 50


@dataclass(frozen=True)
class SphereSymbols:
    """Eigenvalues of the layer operators on ``Y_lm``.

    ``sk`` and ``half_kk`` (the symbol of ``-1/2 + K^{*,k}``) are None when
    ``k = 0``.
    """

    ell: int
    s: float
    kstar: float
    sk: complex = None
    half_kk: complex = None


@dataclass(frozen=True)
class DispersionRoot:
    ell: int
    z_root: complex
    eps_root: complex
    kind: ModeKind
    h: float


@dataclass(frozen=True)
class SpectrumTable:
    """Negative eigenvalues indexed with multiplicity ``2l + 1``.

    Attributes
    ----------
    index, ell, eps : ndarray
        Nonlocal entries: running index ``j`` (from 1), degree and
        permittivity, ordered by degree.
    local_index, local_ell, local_eps : ndarray
        The same layout for the local values ``-(l + 1) / l``, all degrees
        up to ``lmax``.
    """

    h: float
    index: np.ndarray
    ell: np.ndarray
    eps: np.ndarray
    local_index: np.ndarray
    local_ell: np.ndarray
    local_eps: np.ndarray

    @property
    def count_ell(self):
        return int(np.unique(self.ell).size)


def _ab(ell):
    ell = np.asarray(ell, dtype=float)
    return (ell + 1) / (2 * ell + 1), ell * (ell + 1) / (2 * ell + 1)


def _check_h(h):
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")


def sphere_symbols(ell, k):
    """Diagonal symbols of ``S``, ``K*``, ``S^k`` and ``-1/2 + K^{*,k}``.

    Parameters
    ----------
    ell : int
        Harmonic degree, ``>= 0``.
    k : complex
        Helmholtz wavenumber. For ``k = 0`` only the static symbols are set.

    Returns
    -------
    SphereSymbols
    """
    if ell < 0:
        raise DomainError("ell must be >= 0")
    s = -1.0 / (2 * ell + 1)
    kstar = 0.5 / (2 * ell + 1)
    k = complex(k)
    if k == 0:
        return SphereSymbols(ell, s, kstar)
    hj, hjp = jh_products_all(ell, k)
    return SphereSymbols(ell, s, kstar, complex(-1j * k * hj[ell]), complex(-1j * k * k * hjp[ell]))


def lambda_all(lmax, z, h):
    """``lambda_l(z)`` for ``l = 0..lmax``; shape ``(lmax + 1,) + z.shape``."""
    _check_h(h)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SingularityError("lambda_l is singular at z = 0")
    k = z / h
    hj, hjp = jh_products_all(lmax, k)
    a, b = _ab(np.arange(lmax + 1).reshape((-1,) + (1,) * z.ndim))
    return 1j * k * (-k * (z * z + a) * hjp + b * hj)


def lambda_ell(ell, z, h):
    """Pencil symbol ``lambda_l(z)`` at degree ``ell``.

    ``lambda_l = i k h_l(k) [-k (z^2 + a) j_l'(k) + b j_l(k)]`` with
    ``k = z / h``, ``a = (l + 1) / (2l + 1)`` and ``b = l (l + 1) / (2l + 1)``.
    The Bessel products are formed from scaled factors, so the value is
    finite for ``|k|`` in the hundreds of thousands.
    """
    if ell < 0:
        raise DomainError("ell must be >= 0")
    out = lambda_all(ell, z, h)[ell]
    return complex(out) if out.ndim == 0 else out


def lambda_scale(ell, z, h):
    """Magnitude of the largest term in ``lambda_l(z)``, for relative tests."""
    z = complex(z)
    k = z / h
    hj, hjp = jh_products_all(ell, k)
    a, b = _ab(ell)
    return abs(k) * (abs(k * (z * z + a) * hjp[ell]) + abs(b * hj[ell]))


def local_eigenvalue(ell):
    """Local surface-plasmon permittivity ``-(l + 1) / l``."""
    if ell < 1:
        raise DomainError("the constant mode l = 0 carries no plasmon")
    return -(ell + 1) / ell


def perturbation_shift(ell, h):
    """First-order nonlocal permittivity ``eps_loc + h (2l+1) sqrt(eps_loc (eps_loc - 1))``."""
    if ell < 1:
        raise DomainError("ell must be >= 1")
    e = local_eigenvalue(ell)
    return e + h * (2 * ell + 1) * math.sqrt(e * (e - 1))


# -- root finding -----------------------------------------------------------


@jit
def _i_ratio_ladder(x, lmax):
    """``i_{l+1}(x) / i_l(x)`` for ``l = 0..lmax`` and real ``x >= 0``.

    Backward recurrence of the ratio (equivalently a continued fraction),
    started well above ``max(lmax, x)``. All terms are positive, so there is
    no cancellation.
    """
    n = max(lmax, int(x)) + 20 + int(8.0 * x ** (1.0 / 3.0)) + 1
    out = np.empty(lmax + 1)
    r = 0.0
    for m in range(n, -1, -1):
        r = x / (2 * m + 3 + x * r)
        if m <= lmax:
            out[m] = r
    return out


@jit
def _surface_f_df(ell, t, h):
    """Real restriction of the bracket on ``z = i t`` and its ``t`` derivative.

    ``F = (t^2 - a) g + b`` with ``g = tau i_l'(tau) / i_l(tau)`` and
    ``tau = t / h``; ``F`` is the bracket divided by ``j_l(k) > 0`` up to a
    phase, and vanishes at ``t = 0``. ``g`` obeys the Riccati equation
    ``tau g' = tau^2 + l (l + 1) - g - g^2``.
    """
    a = (ell + 1.0) / (2 * ell + 1.0)
    b = ell * (ell + 1.0) / (2 * ell + 1.0)
    tau = t / h
    g = tau * _i_ratio_ladder(tau, ell)[ell] + ell
    f = (t * t - a) * g + b
    if tau > 0:
        dg = (tau * tau + ell * (ell + 1.0) - g - g * g) / tau
    else:
        dg = 0.0
    return f, 2 * t * g + (t * t - a) * dg / h


@jit
def _surface_scan(lmax, t, h):
    """``F_l(t)`` for ``l = 0..lmax`` on a grid; one ratio sweep per node."""
    out = np.empty((lmax + 1, t.size))
    for i in range(t.size):
        tau = t[i] / h
        r = _i_ratio_ladder(tau, lmax)
        for ell in range(lmax + 1):
            a = (ell + 1.0) / (2 * ell + 1.0)
            b = ell * (ell + 1.0) / (2 * ell + 1.0)
            out[ell, i] = (t[i] * t[i] - a) * (tau * r[ell] + ell) + b
    return out


def _bulk_function(ell, t, h):
    """Real bracket ``-k (t^2 + a) j_l'(k) + b j_l(k)`` on ``z = t``, ``k = t / h``."""
    a, b = _ab(ell)
    tau = np.asarray(t, dtype=float) / h
    return -tau * (t * t + a) * spherical_jn(ell, tau, derivative=True) + b * spherical_jn(ell, tau)


def _bracket_and_dz(ell, z, h):
    """Scaled bracket ``D(z)`` and ``dD/dz`` (same scale factor)."""
    k = z / h
    j, jp, _ = sph_jn_all(ell, k, scaled=True)
    j, jp = complex(j[ell]), complex(jp[ell])
    a, b = _ab(ell)
    jpp = -2.0 / k * jp - (1.0 - ell * (ell + 1) / (k * k)) * j
    d = -k * (z * z + a) * jp + b * j
    dd = (-(z * z + a) * (jp + k * jpp) + b * jp) / h - 2.0 * z * k * jp
    return d, dd, abs(k * (z * z + a) * jp) + abs(b * j)


def _newton_real(fun, x0, what):
    """Newton on a real function ``fun(x) -> (f, df)`` from a bracketed start."""
    x = float(x0)
    for _ in range(_NEWTON_MAXIT):
        f, df = fun(x)
        if f == 0.0:
            return x
        step = f / df
        x -= step
        if abs(step) <= 1e-14 * abs(x):
            return x
    raise ConvergenceError(f"Newton did not converge for {what}", last=x)


def _newton_complex(ell, z0, h, axis):
    """Newton on the complex bracket, projected back onto the known axis."""
    z = complex(z0)
    for _ in range(_NEWTON_MAXIT):
        d, dd, scale = _bracket_and_dz(ell, z, h)
        if abs(d) <= 1e-15 * scale:
            return z
        step = d / dd
        z = z - step
        z = complex(0.0, z.imag) if axis == "imag" else complex(z.real, 0.0)
        if abs(step) <= 1e-14 * abs(z):
            return z
    raise ConvergenceError(f"Newton did not converge for l={ell}, h={h}", last=z)


def _surface_grid():
    return np.concatenate([np.geomspace(1e-6, 0.05, 150, endpoint=False), np.linspace(0.05, 1 - 1e-9, 400)])


def _surface_root_from_scan(ell, h, t, f):
    idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    if idx.size == 0:
        return None
    i = idx[-1]
    ts = brentq(lambda s: _surface_f_df(ell, s, h)[0], t[i], t[i + 1], xtol=1e-300, rtol=1e-15, maxiter=200)
    ts = _newton_real(lambda s: _surface_f_df(ell, s, h), ts, f"surface root l={ell}, h={h}")
    z = complex(0.0, ts)
    return DispersionRoot(ell, z, complex(eps_from_z(z).real, 0.0), ModeKind.SURFACE, h)


def surface_root(ell, h):
    """Surface root ``z = i t`` of ``lambda_l``, or None when it has left ``eps < 0``.

    Roots with ``eps < 0`` have ``0 < t < 1``. The real restriction of
    ``lambda_l`` to the imaginary axis is scanned on a grid that is
    logarithmic toward ``t = 0`` (where ``eps`` reaches 0), bracketed, and
    polished by Newton along the axis.
    """
    if ell < 1:
        raise DomainError("ell must be >= 1")
    _check_h(h)
    t = _surface_grid()
    return _surface_root_from_scan(ell, h, t, _surface_scan(ell, t, h)[ell])


def _bulk_roots(ell, h, max_bulk, t_max):
    roots = []
    tau_max = t_max / h
    step = 0.05
    lo = 1e-3
    while len(roots) < max_bulk and lo < tau_max:
        hi = min(lo + 200.0, tau_max)
        tau = np.arange(lo, hi + step, step)
        f = _bulk_function(ell, tau * h, h)
        for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
            tr = brentq(lambda s: float(_bulk_function(ell, s * h, h)), tau[i], tau[i + 1], xtol=1e-300, rtol=1e-15)
            z = _newton_complex(ell, complex(tr * h), h, "real")
            roots.append(DispersionRoot(ell, z, complex(eps_from_z(z).real, 0.0), ModeKind.BULK, h))
            if len(roots) == max_bulk:
                break
        lo = tau[-1]
    return roots


def dispersion_roots(ell, h, eps_window=None, max_bulk=10):
    """Zeros of ``lambda_l`` on the two physical axes.

    Parameters
    ----------
    ell : int
        Degree, ``>= 1``.
    h : float
        Nonlocal length.
    eps_window : (float, float), optional
        Keep only roots with ``lo <= eps <= hi``.
    max_bulk : int
        Number of bulk roots to return, in order of increasing ``eps``.

    Returns
    -------
    list of DispersionRoot
        The surface root first (when it exists), then bulk roots.
    """
    if ell < 1:
        raise DomainError("ell must be >= 1")
    _check_h(h)
    roots = []
    s = surface_root(ell, h)
    if s is not None:
        roots.append(s)
    if max_bulk > 0:
        # eps(t_max) = 1 - 1e-3
        t_max = math.sqrt((1 - 1e-3) / 1e-3)
        roots.extend(_bulk_roots(ell, h, max_bulk, t_max))
    if eps_window is not None:
        lo, hi = eps_window
        roots = [r for r in roots if lo <= r.eps_root.real <= hi]
    return roots


def eigenvalue_table(h, lmax):
    """Negative nonlocal eigenvalues of the sphere next to the local ones.

    Each degree contributes ``2l + 1`` equal entries, matching an index axis
    that counts eigenvalues with multiplicity.
    """
    _check_h(h)
    if lmax < 1:
        raise DomainError("lmax must be >= 1")
    idx, ells, eps = [], [], []
    j = 1
    t = _surface_grid()
    scan = _surface_scan(lmax, t, h)
    for ell in range(1, lmax + 1):
        r = _surface_root_from_scan(ell, h, t, scan[ell])
        if r is None or not r.eps_root.real < 0:
            continue
        for _ in range(2 * ell + 1):
            idx.append(j)
            ells.append(ell)
            eps.append(r.eps_root.real)
            j += 1
    lell = np.repeat(np.arange(1, lmax + 1), 2 * np.arange(1, lmax + 1) + 1)
    return SpectrumTable(
        h,
        np.array(idx, dtype=int),
        np.array(ells, dtype=int),
        np.array(eps, dtype=float),
        np.arange(1, lell.size + 1),
        lell,
        -(lell + 1.0) / lell,
    )


# -- scattering ----------------------------------------------------------------


def scattered_coefficients(lmax, z, h):
    """Ratio ``R_l`` for ``l = 0..lmax``; shape ``(lmax + 1,) + z.shape``.

    ``R_l = (k j' - l j) / (-k (z^2 (2l+1) + l + 1) j' + l (l+1) j)``. A
    Neumann datum ``f Y_lm`` of the incident field produces the scattered
    field ``-R_l f r^{-(l+1)} Y_lm`` outside the unit sphere.
    """
    _check_h(h)
    z = np.asarray(z, dtype=complex)
    g = sph_jn_logderiv_all(lmax, z / h)
    ell = np.arange(lmax + 1).reshape((-1,) + (1,) * z.ndim).astype(float)
    c = z * z * (2 * ell + 1) + ell + 1
    den = -c * g + ell * (ell + 1)
    scale = np.abs(c * g) + ell * (ell + 1)
    with np.errstate(invalid="ignore"):
        bad = ~(np.abs(den) > 1e-14 * scale)
    if np.any(bad):
        raise ResonanceError("evaluation on a dispersion root", estimate=float(np.nanmin(np.abs(den) / scale)))
    return (g - ell) / den


def scattered_coefficient(ell, z, h):
    """Scattered-field multiplier ``R_l(z)`` at a single degree (see `scattered_coefficients`)."""
    if ell < 1:
        raise DomainError("ell must be >= 1")
    return complex(scattered_coefficients(ell, complex(z), h)[ell])


def local_scattered_coefficient(ell, eps):
    """Local limit ``(eps - 1) / (l eps + l + 1)`` of `scattered_coefficient`."""
    eps = np.asarray(eps, dtype=complex)
    ell = np.asarray(ell, dtype=float)
    return (eps - 1.0) / (ell * eps + ell + 1.0)


def polarizability(omega_hat, params, h):
    """Dipole polarizability ``mu = R_1`` along a Drude trajectory; ``h = 0`` is local."""
    eps = drude_eps(omega_hat, params)
    if h == 0:
        return local_scattered_coefficient(1, eps)
    return scattered_coefficients(1, z_from_eps(eps), h)[1]


def absorption_spectrum(h, params, omega_grid):
    """Far-field absorption ``omega_hat * Im(mu)`` for a uniform incident field.

    Parameters
    ----------
    h : float
        Nonlocal length; ``0`` selects the local model.
    params : DrudeParams
    omega_grid : array_like
        Strictly increasing frequencies in ``(0, 2]``.

    Returns
    -------
    SweepTable
        Columns ``omega_hat`` and ``absorption``.
    """
    w = np.asarray(omega_grid, dtype=float)
    if np.any(w <= 0) or np.any(w > 2):
        raise DomainError("omega grid must lie in (0, 2]")
    mu = np.asarray(polarizability(w, params, h))
    return SweepTable(("omega_hat", "absorption"), w, w * mu.imag)


def dipole_projection(lmax, d):
    """Coefficients of ``dv_ext/dnu`` on ``Y_l0`` for a unit radial dipole.

    The dipole sits at ``(1 + d) e_3`` with moment ``e_3`` and
    ``v_ext = p . grad Gamma^0(x - x_d)``. Expanding ``1/|x - x_d|`` in
    Legendre polynomials gives
    ``f_l = -l (l + 1) D^{-l-2} sqrt(4 pi / (2l + 1)) / (4 pi)``.
    """
    if not d > 0:
        raise DomainError("d must be positive")
    big_d = 1.0 + d
    ell = np.arange(lmax + 1, dtype=float)
    return -ell * (ell + 1) * big_d ** (-ell - 2) * np.sqrt(4 * np.pi / (2 * ell + 1)) / (4 * np.pi)


def _default_lmax(d):
    big_d = 1.0 + d
    lmax = max(int(math.ceil(10.0 / d)), 4)
    while (lmax + 1) ** 3 * big_d ** (-2 * lmax) > 1e-12:
        lmax += 1
    return lmax


def near_field_response(d, h, params, omega_grid, lmax=None):
    """Reflected field gradient at a radial dipole outside the sphere.

    Returns ``|d(v - v_ext)/dr|`` at ``x_d = (1 + d) e_3`` for a unit dipole
    pointing along ``e_3``. ``h = 0`` selects the local model.

    Parameters
    ----------
    d : float
        Distance from the surface.
    h : float
    params : DrudeParams
    omega_grid : array_like
    lmax : int, optional
        Truncation degree; by default large enough for a ``1e-12`` tail.

    Warns
    -----
    TruncationWarning
        When the estimated tail exceeds ``1e-8`` of the partial sum.
    """
    if not d > 0:
        raise DomainError("d must be positive")
    if lmax is None:
        lmax = _default_lmax(d)
    w = np.asarray(omega_grid, dtype=float)
    eps = np.asarray(drude_eps(w, params))
    ell = np.arange(lmax + 1, dtype=float)[:, None]
    if h == 0:
        r = local_scattered_coefficient(ell, eps[None, :])
    else:
        r = scattered_coefficients(lmax, z_from_eps(eps), h)
    big_d = 1.0 + d
    terms = -(1.0 / (4 * np.pi)) * r * (ell * (ell + 1) ** 2 * big_d ** (-2 * ell - 4))
    total = terms.sum(axis=0)
    tail = np.abs(terms[-1]) * big_d ** -2 / (1 - big_d ** -2)
    worst = float(np.max(tail / np.maximum(np.abs(total), 1e-300)))
    if worst > 1e-8:
        warnings.warn(
            f"near-field series truncated at l={lmax}; relative tail estimate {worst:.2e}",
            TruncationWarning,
            stacklevel=2,
        )
    return SweepTable(("omega_hat", "response"), w, np.abs(total))


def asymptotic_residual(ell, z, h_seq):
    """Errors of the small-``h`` limits of the Helmholtz symbols.

    For ``Im z > 0`` and ``k = z / h``, ``S^k`` tends to the multiple
    ``-i h / (2 z)`` of the identity and ``K^{*,k}`` tends to zero.

    Returns
    -------
    list of (h, err_S, err_K)
        ``err_S = |sk + i h / (2 z)|`` and ``err_K = |half_kk + 1/2|``.
    """
    z = complex(z)
    if not z.imag > 0:
        raise HypothesisError("asymptotics require Im z > 0")
    out = []
    for h in h_seq:
        _check_h(h)
        sym = sphere_symbols(ell, z / h)
        out.append((float(h), abs(sym.sk + 1j * h / (2 * z)), abs(sym.half_kk + 0.5)))
    return out

