import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.special import eval_legendre

from nlplasmon import sphere_oracle as so
from nlplasmon.errors import DomainError, HypothesisError, ResonanceError, SingularityError
from nlplasmon.errors import TruncationWarning
from nlplasmon.kinds import ModeKind
from nlplasmon.medium import DrudeParams, eps_from_z, z_from_eps


def _chord_integral(f):
    """``int_0^2 f(r) dr`` for complex ``f``."""
    re = quad(lambda r: f(r).real, 0, 2, limit=200)[0]
    im = quad(lambda r: f(r).imag, 0, 2, limit=200)[0]
    return re + 1j * im


def _symbols_by_quadrature(ell, k):
    """Layer-operator symbols on the unit sphere without Bessel functions.

    With the pole at the north pole and chord length ``r``, the surface
    element is ``2 pi r dr`` and ``(x - y) . nu_x = r^2 / 2``, so both
    operators applied to ``P_l(cos theta)`` reduce to integrals over
    ``r in [0, 2]``.
    """
    p = lambda r: eval_legendre(ell, 1 - r * r / 2)
    sk = _chord_integral(lambda r: -0.5 * np.exp(1j * k * r) * p(r))
    kk = _chord_integral(lambda r: -0.25 * (1j * k * r - 1) * np.exp(1j * k * r) * p(r))
    return sk, kk - 0.5


@pytest.mark.parametrize("k", [0.7 + 0.1j, 3 + 2j, 10j, 25 + 0.5j])
@pytest.mark.parametrize("ell", [0, 1, 2, 4])
def test_helmholtz_symbols_match_direct_quadrature(ell, k):
    sk, half_kk = _symbols_by_quadrature(ell, k)
    sym = so.sphere_symbols(ell, k)
    assert abs(sym.sk - sk) < 1e-11 * abs(sk)
    assert abs(sym.half_kk - half_kk) < 1e-11 * max(abs(half_kk), 1e-3)


@given(st.integers(0, 40))
def test_static_symbols(ell):
    sym = so.sphere_symbols(ell, 0)
    assert sym.s == -1 / (2 * ell + 1) and sym.kstar == 0.5 / (2 * ell + 1)
    assert sym.sk is None
    # the spectrum of K* lies in (-1/2, 1/2], with 1/2 only on constants
    assert -0.5 < sym.kstar <= 0.5
    assert (sym.kstar == 0.5) == (ell == 0)


@given(st.integers(1, 30), st.floats(0.1, 3.0), st.floats(0.05, 3.0), st.floats(1e-3, 0.2))
def test_pencil_symbol_is_the_operator_composition(ell, re, im, h):
    z = complex(re, im)
    sym = so.sphere_symbols(ell, z / h)
    comp = (sym.kstar + z * z + 0.5) * sym.half_kk - (sym.kstar ** 2 - 0.25) / sym.s * sym.sk
    lam = so.lambda_ell(ell, z, h)
    assert abs(comp - lam) <= 1e-9 * so.lambda_scale(ell, z, h)


def test_small_k_limit_recovers_static_symbols():
    sym = so.sphere_symbols(2, 1e-5)
    assert abs(sym.sk - sym.s) < 1e-8
    assert abs(sym.half_kk - (-0.5 + sym.kstar)) < 1e-8


@pytest.mark.parametrize("h", [5e-4, 1e-2, 2e-2, 5e-2])
@pytest.mark.parametrize("ell", [1, 2, 3, 7])
def test_surface_root_is_a_zero(ell, h):
    r = so.surface_root(ell, h)
    assert r.kind is ModeKind.SURFACE and r.z_root.real == 0
    assert abs(so.lambda_ell(ell, r.z_root, h)) < 1e-10 * so.lambda_scale(ell, r.z_root, h)
    assert abs(eps_from_z(r.z_root) - r.eps_root) < 1e-12
    # nonlocality pushes the root above the local value
    assert so.local_eigenvalue(ell) < r.eps_root.real < 0


def test_surface_root_vanishes_for_large_degree():
    assert so.surface_root(200, 5e-2) is None


def test_perturbation_prediction_for_the_dipole():
    h = 0.02
    eps = so.surface_root(1, h).eps_root.real
    pred = -2 + 3 * h * math.sqrt(6)
    assert so.perturbation_shift(1, h) == pytest.approx(pred, rel=1e-15)
    assert abs(eps - pred) < 50 * h * h


@given(st.integers(1, 20))
def test_perturbation_shift_at_zero_length(ell):
    # h -> 0 recovers the local value; the first-order term raises eps
    assert so.perturbation_shift(ell, 1e-300) == so.local_eigenvalue(ell)
    assert so.perturbation_shift(ell, 1e-3) > so.local_eigenvalue(ell)


def test_bulk_roots_approach_one_from_below():
    roots = so.dispersion_roots(1, 0.05, max_bulk=6)
    assert roots[0].kind is ModeKind.SURFACE
    bulk = [r for r in roots if r.kind is ModeKind.BULK]
    assert len(bulk) == 6
    eps = [r.eps_root.real for r in bulk]
    assert all(0 < e < 1 for e in eps)
    assert all(a < b for a, b in zip(eps, eps[1:]))
    for r in bulk:
        assert r.z_root.imag == 0
        assert abs(so.lambda_ell(1, r.z_root, 0.05)) < 1e-9 * so.lambda_scale(1, r.z_root, 0.05)


def test_dispersion_window():
    roots = so.dispersion_roots(2, 0.05, eps_window=(0.0, 1.0), max_bulk=3)
    assert all(r.kind is ModeKind.BULK for r in roots)


def test_eigenvalue_table_layout():
    t = so.eigenvalue_table(0.02, 40)
    assert np.array_equal(t.index, np.arange(1, t.index.size + 1))
    for ell in np.unique(t.ell):
        assert np.sum(t.ell == ell) == 2 * ell + 1
    assert np.all(t.eps < 0)
    assert t.local_eps[0] == -2.0 and t.local_index.size == sum(2 * l + 1 for l in range(1, 41))
    # nonlocal values sit above their local partners
    loc = {int(l): -(l + 1) / l for l in t.ell}
    assert all(e > loc[int(l)] for l, e in zip(t.ell, t.eps))


@pytest.mark.parametrize("ell, eps", [(1, -0.5), (1, -8.0), (2, -30.0), (5, -0.2), (10, -3.0), (3, 0.4 + 0.2j)])
def test_local_scattering_limit(ell, eps):
    # The deviation from the local value is first order in h.
    r = so.scattered_coefficient(ell, z_from_eps(eps), 1e-5)
    loc = so.local_scattered_coefficient(ell, eps)
    assert abs(r - loc) < 1e-3 * abs(loc)


def test_resonance_is_reported():
    r = so.surface_root(1, 0.05)
    with pytest.raises(ResonanceError):
        so.scattered_coefficient(1, r.z_root, 0.05)


def test_local_polarizability():
    mu = so.polarizability(np.array([0.3]), DrudeParams(0.0), 0.0)
    eps = 1 - 1 / 0.09
    assert abs(mu[0] - (eps - 1) / (eps + 2)) < 1e-14


def test_absorption_is_non_negative_and_peaks_near_the_dipole():
    w = np.linspace(0.3, 1.5, 1201)
    t = so.absorption_spectrum(0.02, DrudeParams(0.1), w)
    a = t.column("absorption")
    assert np.all(a >= -1e-14)
    assert 0.55 < w[np.argmax(a)] < 0.65


def test_absorption_grid_errors():
    with pytest.raises(DomainError):
        so.absorption_spectrum(0.02, DrudeParams(0.1), [0.0, 1.0])
    with pytest.raises(DomainError):
        so.absorption_spectrum(0.02, DrudeParams(0.1), [1.0, 2.5])


def test_dipole_projection_against_direct_projection():
    # d v_ext / d nu on the sphere for a radial dipole at (1 + d) e_3
    d = 0.3
    big_d = 1 + d
    x, w = np.polynomial.legendre.leggauss(200)

    def dvdn(c):
        r2 = 1 + big_d ** 2 - 2 * big_d * c
        # v_ext = p . grad_x Gamma(x - x_d) = (x_3 - D) / (4 pi |x - x_d|^3),
        # differentiated along the radius at |x| = 1
        return (c / r2 ** 1.5 - 3 * (c - big_d) * (1 - big_d * c) / r2 ** 2.5) / (4 * np.pi)

    f = so.dipole_projection(6, d)
    for ell in range(7):
        y = math.sqrt((2 * ell + 1) / (4 * math.pi)) * eval_legendre(ell, x)
        direct = 2 * math.pi * np.sum(w * dvdn(x) * y)
        assert abs(direct - f[ell]) < 1e-12


def test_near_field_decays_away_from_the_surface():
    w = np.linspace(0.4, 1.0, 121)
    p = DrudeParams(0.1)
    near = so.near_field_response(0.1, 0.02, p, w).column("response")
    far = so.near_field_response(10.0, 0.02, p, w).column("response")
    assert far.max() < 1e-4 * near.max()


def test_near_field_truncation_warning():
    w = np.linspace(0.4, 1.0, 11)
    with pytest.warns(TruncationWarning):
        so.near_field_response(0.1, 0.02, DrudeParams(0.1), w, lmax=5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        so.near_field_response(0.1, 0.02, DrudeParams(0.1), w)


def test_asymptotic_residual_rates():
    res = so.asymptotic_residual(2, 1j, [0.02, 0.01])
    (_, s0, k0), (_, s1, k1) = res
    assert s1 < s0 and k1 < k0
    with pytest.raises(HypothesisError):
        so.asymptotic_residual(1, 1.0, [0.1])


def test_argument_errors():
    with pytest.raises(DomainError):
        so.lambda_ell(-1, 1j, 0.1)
    with pytest.raises(DomainError):
        so.surface_root(0, 0.1)
    with pytest.raises(DomainError):
        so.eigenvalue_table(-0.1, 10)
    with pytest.raises(SingularityError):
        so.lambda_ell(1, 0.0, 0.1)
    with pytest.raises(DomainError):
        so.local_eigenvalue(0)
