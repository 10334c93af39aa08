import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlplasmon import _accel
from nlplasmon.bem import (
    BoundaryDensity,
    OperatorKind,
    PencilEvaluator,
    PointDipole,
    TriMesh,
    UniformField,
    assemble_helmholtz,
    assemble_pencils,
    assemble_static,
    build_icosphere,
    dump_operator,
    external_neumann,
    load_mesh,
    load_operator,
    save_mesh,
    solve_scattering,
)
from nlplasmon.bem.kernels import gamma1, gamma1_radial_antiderivative, helmholtz_matrices, static_matrices
from nlplasmon.bem.quadrature import DUNAVANT7
from nlplasmon.bem.scattering import single_layer_at
from nlplasmon.errors import DomainError, MeshError, MeshOrientationWarning, ResonanceError
from nlplasmon.medium import z_from_eps


# -- mesh -----------------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_icosphere_geometry(n):
    m = build_icosphere(n)
    assert m.n_triangles == 20 * 4 ** n
    assert np.allclose(np.linalg.norm(m.vertices, axis=1), 1.0)
    # outward normals agree with the radial direction
    assert np.all(np.einsum("ij,ij->i", m.normals, m.centroids) > 0)
    assert m.areas.sum() < 4 * math.pi and m.signed_volume() < 4 * math.pi / 3


def test_area_converges_to_the_sphere():
    errs = [4 * math.pi - build_icosphere(n).areas.sum() for n in (1, 2, 3)]
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_mesh_validation(ico1):
    with pytest.raises(MeshError, match="not closed"):
        TriMesh(ico1.vertices, ico1.triangles[1:])
    with pytest.raises(MeshError, match="inward"):
        TriMesh(ico1.vertices, ico1.triangles[:, ::-1])
    bad = ico1.triangles.copy()
    bad[0] = bad[0, ::-1]
    with pytest.raises(MeshError):
        TriMesh(ico1.vertices, bad)
    with pytest.raises(MeshError):
        TriMesh(ico1.vertices, ico1.triangles + 1000)
    with pytest.raises(DomainError):
        build_icosphere(7)


def test_off_round_trip(tmp_path, ico1):
    save_mesh(ico1, tmp_path / "s.off")
    back = load_mesh(tmp_path / "s.off")
    assert np.array_equal(back.vertices, ico1.vertices)
    assert np.array_equal(back.triangles, ico1.triangles)


def test_inward_off_is_flipped(tmp_path, ico1):
    inward = TriMesh(ico1.vertices, ico1.triangles[:, ::-1], validate=False)
    save_mesh(inward, tmp_path / "in.off")
    with pytest.warns(MeshOrientationWarning):
        m = load_mesh(tmp_path / "in.off")
    assert m.signed_volume() > 0


def test_bad_off(tmp_path):
    (tmp_path / "x.off").write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n")
    with pytest.raises(MeshError):
        load_mesh(tmp_path / "x.off")


def test_boundary_density(ico1):
    d = BoundaryDensity(np.ones(ico1.n_triangles), ico1)
    assert d.integral() == pytest.approx(ico1.areas.sum())
    with pytest.raises(DomainError):
        BoundaryDensity(np.ones(3), ico1)


# -- kernels --------------------------------------------------------------------


def _gamma1_direct(r, k):
    x = 1j * k * r
    return -(np.exp(x) - 1 - x) / (4 * math.pi * k * k * r)


@given(st.floats(1e-4, 3.0), st.floats(0.01, 40.0), st.floats(0.0, math.pi / 2))
def test_gamma1_series_and_closed_form_agree(r, mod, phi):
    k = mod * complex(math.cos(phi), math.sin(phi))
    g1, g1p, dk, dkp = gamma1(np.array([r]), k)
    if abs(k * r) > 0.05:
        ref = _gamma1_direct(r, k)
        assert abs(g1[0] - ref) <= 1e-10 * max(abs(ref), 1e-12)
    # derivatives against central differences
    hr, hk = 1e-6 * r, 1e-6 * abs(k)
    fd_r = (gamma1(np.array([r + hr]), k)[0] - gamma1(np.array([r - hr]), k)[0]) / (2 * hr)
    fd_k = (gamma1(np.array([r]), k + hk)[0] - gamma1(np.array([r]), k - hk)[0]) / (2 * hk)
    assert abs(g1p[0] - fd_r[0]) <= 1e-5 * max(abs(g1p[0]), 1e-8)
    assert abs(dk[0] - fd_k[0]) <= 1e-5 * max(abs(dk[0]), 1e-8)


def test_gamma1_is_continuous_across_the_series_radius():
    k = 3.0 + 1.0j
    r0 = 1.0 / abs(k)
    lo, hi = gamma1(np.array([r0 * (1 - 1e-12), r0 * (1 + 1e-12)]), k)[0]
    # the closed form loses about two digits to cancellation at |kr| = 1
    assert abs(lo - hi) < 1e-11 * abs(lo)


def test_gamma1_antiderivative():
    k, big_r = 2.0 + 5.0j, 0.7
    x, w = np.polynomial.legendre.leggauss(60)
    r = 0.5 * big_r * (x + 1)
    num = 0.5 * big_r * np.sum(w * gamma1(r, k)[0] * r)
    f, _ = gamma1_radial_antiderivative(np.array([big_r]), k)
    assert abs(f[0] - num) < 1e-13 * abs(num)


@pytest.mark.skipif(not _accel.NUMBA_ENABLED, reason="numba back end disabled")
def test_numba_and_numpy_back_ends_agree(ico1):
    a = static_matrices(ico1, use_numba=True)
    b = static_matrices(ico1, use_numba=False)
    for x, y in zip(a, b):
        assert np.linalg.norm(x - y) < 1e-13 * np.linalg.norm(y)
    a = helmholtz_matrices(ico1, 4.0 + 9.0j, derivative=True, use_numba=True)
    b = helmholtz_matrices(ico1, 4.0 + 9.0j, derivative=True, use_numba=False)
    for x, y in zip(a, b):
        assert np.linalg.norm(x - y) < 1e-13 * np.linalg.norm(y)


# -- operators ------------------------------------------------------------------


@pytest.fixture(scope="module")
def static2(ico2):
    return assemble_static(ico2)


def test_kstar_spectrum_on_the_sphere(static2):
    _, kst = static2
    lam = np.sort(np.linalg.eigvals(kst.matrix).real)[::-1]
    assert abs(lam[0] - 0.5) < 1e-10
    for ell in (1, 2):
        block = lam[ell ** 2: (ell + 1) ** 2]
        assert np.max(np.abs(block - 0.5 / (2 * ell + 1))) < 3e-2
    assert lam.min() > -0.5


def test_single_layer_spectrum_on_the_sphere(static2):
    s, _ = static2
    lam = np.sort(np.linalg.eigvals(s.matrix).real)
    assert abs(lam[0] + 1) < 2e-2
    assert np.all(lam < 0)


def test_equilibrium_density_is_annihilated(pencil2):
    sigma = pencil2.solve_s(pencil2.ones)
    assert np.linalg.norm(pencil2.Kstar @ sigma - 0.5 * sigma) < 1e-12 * np.linalg.norm(sigma)
    assert np.linalg.norm(pencil2.W @ pencil2.ones) < 1e-12


def test_helmholtz_splitting_matches_direct_far_entries(ico1):
    k = 2.0 + 0.5j
    sk, kk, _, _ = assemble_helmholtz(ico1, k)
    assert sk.kind is OperatorKind.SK and kk.kind is OperatorKind.KSTAR_K
    # far-apart pair, where a 7-point rule on the source triangle is accurate
    c = ico1.centroids
    i, j = 0, int(np.argmax(np.linalg.norm(c - c[0], axis=1)))
    bary, w = DUNAVANT7
    y = bary @ ico1.vertices[ico1.triangles[j]]
    r = np.linalg.norm(y - c[i], axis=1)
    ref = ico1.areas[j] * np.sum(w * -np.exp(1j * k * r) / (4 * math.pi * r))
    assert abs(sk.matrix[i, j] - ref) < 1e-6 * abs(ref)


def test_operator_dump_round_trip(tmp_path, static2):
    s, _ = static2
    dump_operator(s, tmp_path / "s.bin")
    assert np.array_equal(load_operator(tmp_path / "s.bin"), s.matrix)
    (tmp_path / "bad.bin").write_bytes(b"nothing")
    with pytest.raises(DomainError):
        load_operator(tmp_path / "bad.bin")


# -- pencils --------------------------------------------------------------------


@pytest.fixture(scope="module")
def pencil1(ico1):
    return PencilEvaluator(ico1, 0.2)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(-1.0, 2.0))
def test_pencil_identity(pencil1, re, im):
    z = complex(re, im)
    full, tilde = assemble_pencils(pencil1, z)
    diff = np.linalg.norm(z * z * tilde.matrix - full.matrix)
    assert diff < 1e-11 * np.linalg.norm(full.matrix)


def test_pencil_derivative_matches_differences(pencil1):
    z, dz = 0.4 + 0.9j, 1e-5
    fd = (pencil1.tilde(z + dz) - pencil1.tilde(z - dz)) / (2 * dz)
    d = pencil1.tilde_derivative(z)
    assert np.linalg.norm(fd - d) < 1e-7 * np.linalg.norm(d)


def test_perturbed_kstar_breaks_the_identity(ico1):
    ev = PencilEvaluator(ico1, 0.2, kstar_shift=1e-2)
    full, tilde = assemble_pencils(ev, 0.5 + 0.5j)
    z = 0.5 + 0.5j
    assert np.linalg.norm(z * z * tilde.matrix - full.matrix) > 1e-4 * np.linalg.norm(full.matrix)


def test_evaluator_errors(ico1):
    with pytest.raises(DomainError):
        PencilEvaluator(ico1, 0.0)


# -- driven problem -------------------------------------------------------------


def test_dipole_gradient_matches_differences(rng):
    d = PointDipole((0.1, -0.2, 1.3), (0.3, 0.5, -1.0))
    x = rng.normal(size=(5, 3)) * 0.3
    g = d.gradient(x)
    step = 1e-6
    for a in range(3):
        e = np.zeros(3)
        e[a] = step
        fd = (d.potential(x + e) - d.potential(x - e)) / (2 * step)
        np.testing.assert_allclose(g[:, a], fd, rtol=1e-6, atol=1e-9)


def test_single_layer_far_field_is_a_monopole(ico2):
    dens = np.ones(ico2.n_triangles)
    x = np.array([[0.0, 0.0, 50.0]])
    val = single_layer_at(ico2, dens, x)[0]
    assert abs(val + ico2.areas.sum() / (4 * math.pi * 50.0)) < 1e-6


def test_local_sphere_polarizability(pencil2, ico2):
    ev = PencilEvaluator(ico2, 1e-3)
    for eps in (4.0, -8.0 + 1.0j):
        mu = solve_scattering(ev, z_from_eps(eps), UniformField()).dipole_moment()
        loc = (eps - 1) / (eps + 2)
        assert abs(mu - loc) < 5e-2 * abs(loc)


def test_discrete_neumann_data_closes_the_transmission_conditions(pencil2):
    sol = solve_scattering(pencil2, 0.3 + 1.0j, UniformField(), neumann="discrete")
    assert max(sol.boundary_residual()) < 1e-10
    other = solve_scattering(pencil2, 0.3 + 1.0j, UniformField())
    assert abs(other.dipole_moment() - sol.dipole_moment()) < 1e-2 * abs(sol.dipole_moment())


def test_exterior_field_matches_boundary_values(pencil2):
    sol = solve_scattering(pencil2, 0.3 + 1.0j, UniformField((1.0, 0.0, 0.0)), neumann="discrete")
    far = np.array([[4.0, 0.0, 0.0], [0.0, -3.0, 2.0]])
    mu = sol.dipole_moment((1.0, 0.0, 0.0))
    r = np.linalg.norm(far, axis=1)
    approx = -mu * far[:, 0] / r ** 3
    np.testing.assert_allclose(sol.scattered(far), approx, rtol=2e-2, atol=1e-4)


def test_near_resonance_is_refused(pencil2):
    with pytest.raises(ResonanceError) as info:
        solve_scattering(pencil2, 0.3 + 1.0j, UniformField(), max_condition=1.0)
    assert info.value.estimate >= 1.0
    with pytest.raises(DomainError):
        solve_scattering(pencil2, 0.0, UniformField())
    with pytest.raises(DomainError):
        external_neumann(pencil2, UniformField(), "bogus")
