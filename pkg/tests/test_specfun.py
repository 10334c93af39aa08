import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlplasmon.errors import DomainError, SingularityError
from nlplasmon.specfun import (
    jh_products_all,
    real_sph_harm,
    sph_bessel_j,
    sph_h1_all,
    sph_hankel1,
    sph_jn_all,
    sph_jn_logderiv_all,
)

mp.mp.dps = 40


def _mp_j(ell, x):
    x = mp.mpc(x)
    return mp.sqrt(mp.pi / (2 * x)) * mp.besselj(ell + mp.mpf(1) / 2, x)


def _mp_jp(ell, x):
    return mp.diff(lambda t: _mp_j(ell, t), mp.mpc(x))


def _mp_h(ell, x):
    x = mp.mpc(x)
    return mp.sqrt(mp.pi / (2 * x)) * mp.hankel1(ell + mp.mpf(1) / 2, x)


def _rel(a, b):
    return abs(complex(a) - complex(b)) / max(abs(complex(b)), 1e-300)


moduli = st.floats(0.05, 60.0)
angles = st.floats(0.0, math.pi / 2)
degrees = st.integers(0, 25)


@pytest.mark.parametrize("x", [1e-3, 0.3, 1.0, 7.5, 40.0, 3 + 4j, 0.5 + 12j, -2 + 0.7j, 25j])
@pytest.mark.parametrize("ell", [0, 1, 2, 5, 12])
def test_bessel_matches_arbitrary_precision(ell, x):
    j, jp = sph_jn_all(ell, x)
    assert _rel(j[ell], _mp_j(ell, x)) < 1e-12
    assert _rel(jp[ell], _mp_jp(ell, x)) < 1e-10


@pytest.mark.parametrize("x", [0.2, 1.0, 9.0, 2 + 3j, 0.4 + 15j, 30j])
@pytest.mark.parametrize("ell", [0, 1, 3, 8])
def test_hankel_matches_arbitrary_precision(ell, x):
    h, _ = sph_h1_all(ell, x)
    assert _rel(h[ell], _mp_h(ell, x)) < 1e-12


@given(moduli, angles, degrees)
def test_wronskian(r, phi, ell):
    x = r * complex(math.cos(phi), math.sin(phi))
    j = sph_bessel_j(ell, x)
    h = sph_hankel1(ell, x)
    w = j.j * h.hp - j.jp * h.h
    assert abs(w * x * x - 1j) < 1e-10


@given(moduli, angles, st.integers(1, 20))
def test_three_term_recurrence(r, phi, ell):
    x = r * complex(math.cos(phi), math.sin(phi))
    j, _ = sph_jn_all(ell + 1, x)
    lhs = j[ell - 1] + j[ell + 1]
    rhs = (2 * ell + 1) / x * j[ell]
    assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs), abs(j[ell - 1]))


@given(st.floats(1.0, 3000.0), st.floats(-1.0, 1.0), st.integers(0, 30))
def test_products_stay_finite_deep_in_the_upper_half_plane(t, re, ell):
    k = complex(re, t)
    hj, hjp = jh_products_all(ell, k)
    assert np.all(np.isfinite(hj)) and np.all(np.isfinite(hjp))
    # h_l(it) j_l(it) ~ -1 / (2 t^2) for large t at fixed l
    if t > 200 * (ell + 1) ** 2:
        assert abs(hj[ell] * 2 * k * k - 1) < 5e-2


def test_scaled_products_agree_with_unscaled_for_moderate_arguments():
    k = np.array([0.7 + 0.2j, 3.0 + 2.0j, 1.0 + 8.0j])
    j, jp = sph_jn_all(6, k)
    h, _ = sph_h1_all(6, k)
    hj, hjp = jh_products_all(6, k)
    np.testing.assert_allclose(hj, h * j, rtol=1e-12)
    np.testing.assert_allclose(hjp, h * jp, rtol=1e-12)


def test_scaled_hankel_round_trip():
    x = 0.5 + 30j
    scaled = sph_hankel1(3, x, scaled=True)
    plain = sph_hankel1(3, x)
    h, hp = scaled.unscaled()
    assert _rel(h, plain.h) < 1e-12 and _rel(hp, plain.hp) < 1e-12


def test_log_derivative_matches_ratio():
    x = np.array([0.3 + 0.1j, 2.0 + 5.0j, 0.01j])
    j, jp = sph_jn_all(5, x)
    g = sph_jn_logderiv_all(5, x)
    np.testing.assert_allclose(g, x * jp / j, rtol=1e-11)


def test_small_argument_limit():
    x = 1e-8
    j, _ = sph_jn_all(3, x)
    for ell in range(4):
        expect = x ** ell / math.prod(range(1, 2 * ell + 2, 2))
        assert _rel(j[ell], expect) < 1e-10


def test_errors():
    with pytest.raises(DomainError):
        sph_bessel_j(-1, 1.0)
    with pytest.raises(SingularityError):
        sph_hankel1(0, 0.0)
    with pytest.raises(SingularityError):
        jh_products_all(2, 0.0)
    with pytest.raises(DomainError):
        real_sph_harm(2, 3, 0.1, 0.2)


def test_real_harmonics_are_orthonormal():
    # Gauss-Legendre in cos(theta) times trapezoid in phi is exact here.
    x, w = np.polynomial.legendre.leggauss(20)
    phi = 2 * np.pi * np.arange(40) / 40
    theta = np.arccos(x)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.outer(w, np.full(40, 2 * np.pi / 40))
    modes = [(l, m) for l in range(4) for m in range(-l, l + 1)]
    ys = np.array([real_sph_harm(l, m, tt, pp) for l, m in modes])
    gram = np.einsum("aij,bij,ij->ab", ys, ys, ww)
    np.testing.assert_allclose(gram, np.eye(len(modes)), atol=1e-12)
