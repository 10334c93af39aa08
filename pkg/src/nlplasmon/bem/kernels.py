"""Pairwise kernel integrals for centroid collocation.

Entry ``(i, j)`` of each matrix is the integral of a kernel over triangle
``j`` with the observation point at the centroid of triangle ``i``. Two
interchangeable back ends are provided: a numba double loop and a
vectorized numpy version that processes pairs in chunks. The numba one is
used when `nlplasmon._accel.NUMBA_ENABLED` is true.

The smooth Helmholtz remainder is
``Gamma_1(r) = -(exp(ikr) - 1 - ikr) / (4 pi k^2 r)``, so that
``Gamma^k = Gamma^0 - ik/(4 pi) + k^2 Gamma_1``. For ``|kr| < 1`` it is
summed from its Taylor series, which avoids the cancellation.
"""
import math

import numpy as np

from .. import _accel
from .._accel import jit
from .quadrature import MAX_LEVEL, laplace_self_integral, polar_self_nodes, stacked_rules

__all__ = [
    "gamma1",
    "gamma1_radial_antiderivative",
    "near_field_levels",
    "static_matrices",
    "helmholtz_matrices",
]

_FOUR_PI = 4.0 * math.pi
SERIES_RADIUS = 1.0
SERIES_TERMS = 30

_m = np.arange(SERIES_TERMS)
_fact = np.array([math.factorial(n) for n in range(SERIES_TERMS + 5)], dtype=float)
_C_G1 = 1.0 / _fact[_m + 2]
_C_G1P = (_m + 1) / _fact[_m + 2]
_C_DG1 = (_m + 1) / _fact[_m + 3]
_C_DG1P = (_m + 1) * (_m + 2) / _fact[_m + 3]
_C_I0 = 1.0 / _fact[_m + 3]
_C_DI0 = (_m + 1) / _fact[_m + 4]


# -- scalar kernels (numba or plain Python) -------------------------------------


@jit
def _horner(c, x):
    acc = 0j
    for n in range(c.size - 1, -1, -1):
        acc = acc * x + c[n]
    return acc


@jit
def _gamma1_scalar(r, k, c2, ik):
    # c2 = 1 / (4 pi k^2) and ik = 1 / k are hoisted out of the pair loop.
    x = 1j * k * r
    if abs(k * r) < SERIES_RADIUS:
        g1 = r * _horner(_C_G1, x) / _FOUR_PI
        g1p = _horner(_C_G1P, x) / _FOUR_PI
        dg1 = 1j * r * r * _horner(_C_DG1, x) / _FOUR_PI
        dg1p = 1j * r * _horner(_C_DG1P, x) / _FOUR_PI
    else:
        e = np.exp(x)
        inv_r = 1.0 / r
        g1 = -(e - 1.0 - x) * c2 * inv_r
        g1p = -(e * (x - 1.0) + 1.0) * c2 * (inv_r * inv_r)
        dg1 = -1j * (e - 1.0) * c2 - 2.0 * g1 * ik
        dg1p = e * (k * c2) - 2.0 * g1p * ik
    return g1, g1p, dg1, dg1p


@jit
def _static_loop(verts, tris, cent, normals, areas, levels, qb, qw, qoff, s_out, k_out):
    n = cent.shape[0]
    for i in range(n):
        xi0, xi1, xi2 = cent[i, 0], cent[i, 1], cent[i, 2]
        n0, n1, n2 = normals[i, 0], normals[i, 1], normals[i, 2]
        for j in range(n):
            if i == j:
                continue
            lv = levels[i, j]
            a, b, c = tris[j, 0], tris[j, 1], tris[j, 2]
            sacc = 0.0
            kacc = 0.0
            for q in range(qoff[lv], qoff[lv + 1]):
                y0 = qb[q, 0] * verts[a, 0] + qb[q, 1] * verts[b, 0] + qb[q, 2] * verts[c, 0]
                y1 = qb[q, 0] * verts[a, 1] + qb[q, 1] * verts[b, 1] + qb[q, 2] * verts[c, 1]
                y2 = qb[q, 0] * verts[a, 2] + qb[q, 1] * verts[b, 2] + qb[q, 2] * verts[c, 2]
                d0, d1, d2 = xi0 - y0, xi1 - y1, xi2 - y2
                r = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                sacc -= qw[q] / r
                kacc += qw[q] * (d0 * n0 + d1 * n1 + d2 * n2) / (r * r * r)
            s_out[i, j] = sacc * areas[j] / _FOUR_PI
            k_out[i, j] = kacc * areas[j] / _FOUR_PI


@jit
def _helmholtz_loop(verts, tris, cent, normals, areas, levels, qb, qw, qoff, k, s1, k1, ds1, dk1, deriv):
    n = cent.shape[0]
    c2 = 1.0 / (_FOUR_PI * k * k)
    ik = 1.0 / k
    for i in range(n):
        xi0, xi1, xi2 = cent[i, 0], cent[i, 1], cent[i, 2]
        n0, n1, n2 = normals[i, 0], normals[i, 1], normals[i, 2]
        for j in range(n):
            if i == j:
                continue
            lv = levels[i, j]
            a, b, c = tris[j, 0], tris[j, 1], tris[j, 2]
            acc_s = 0j
            acc_k = 0j
            acc_ds = 0j
            acc_dk = 0j
            for q in range(qoff[lv], qoff[lv + 1]):
                y0 = qb[q, 0] * verts[a, 0] + qb[q, 1] * verts[b, 0] + qb[q, 2] * verts[c, 0]
                y1 = qb[q, 0] * verts[a, 1] + qb[q, 1] * verts[b, 1] + qb[q, 2] * verts[c, 1]
                y2 = qb[q, 0] * verts[a, 2] + qb[q, 1] * verts[b, 2] + qb[q, 2] * verts[c, 2]
                d0, d1, d2 = xi0 - y0, xi1 - y1, xi2 - y2
                r = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                cosr = (d0 * n0 + d1 * n1 + d2 * n2) / r
                g1, g1p, dg1, dg1p = _gamma1_scalar(r, k, c2, ik)
                acc_s += qw[q] * g1
                acc_k += qw[q] * g1p * cosr
                if deriv:
                    acc_ds += qw[q] * dg1
                    acc_dk += qw[q] * dg1p * cosr
            s1[i, j] = acc_s * areas[j]
            k1[i, j] = acc_k * areas[j]
            if deriv:
                ds1[i, j] = acc_ds * areas[j]
                dk1[i, j] = acc_dk * areas[j]


# -- vectorized numpy back end ----------------------------------------------


def gamma1(r, k):
    """``Gamma_1``, its radial derivative and their ``k`` derivatives.

    Vectorized over ``r``. Returns ``(g1, g1p, dg1_dk, dg1p_dk)``.
    """
    r = np.asarray(r, dtype=float)
    k = complex(k)
    x = 1j * k * r
    small = np.abs(k * r) < SERIES_RADIUS
    out = [np.empty(r.shape, dtype=complex) for _ in range(4)]
    if np.any(small):
        xs, rs = x[small], r[small]
        p = np.polynomial.polynomial
        out[0][small] = rs * p.polyval(xs, _C_G1) / _FOUR_PI
        out[1][small] = p.polyval(xs, _C_G1P) / _FOUR_PI
        out[2][small] = 1j * rs * rs * p.polyval(xs, _C_DG1) / _FOUR_PI
        out[3][small] = 1j * rs * p.polyval(xs, _C_DG1P) / _FOUR_PI
    big = ~small
    if np.any(big):
        xb, rb = x[big], r[big]
        e = np.exp(xb)
        g1 = -(e - 1.0 - xb) / (_FOUR_PI * k * k * rb)
        g1p = -(e * (xb - 1.0) + 1.0) / (_FOUR_PI * k * k * rb * rb)
        out[0][big] = g1
        out[1][big] = g1p
        out[2][big] = -1j * (e - 1.0) / (_FOUR_PI * k * k) - 2.0 * g1 / k
        out[3][big] = e / (_FOUR_PI * k) - 2.0 * g1p / k
    return tuple(out)


def gamma1_radial_antiderivative(radius, k):
    """``F(R) = int_0^R Gamma_1(r) r dr`` and ``dF/dk``, vectorized over ``R``."""
    big_r = np.asarray(radius, dtype=float)
    k = complex(k)
    x = 1j * k * big_r
    small = np.abs(k * big_r) < SERIES_RADIUS
    f = np.empty(big_r.shape, dtype=complex)
    df = np.empty(big_r.shape, dtype=complex)
    if np.any(small):
        xs, rs = x[small], big_r[small]
        p = np.polynomial.polynomial
        f[small] = rs ** 3 * p.polyval(xs, _C_I0) / _FOUR_PI
        df[small] = 1j * rs ** 4 * p.polyval(xs, _C_DI0) / _FOUR_PI
    big = ~small
    if np.any(big):
        xb, rb = x[big], big_r[big]
        e = np.exp(xb)
        bracket = (e - 1.0) / (1j * k) - rb - 0.5 * xb * rb
        dbracket = rb * e / k - (e - 1.0) / (1j * k * k) - 0.5j * rb * rb
        f[big] = -bracket / (_FOUR_PI * k * k)
        df[big] = 2.0 * bracket / (_FOUR_PI * k ** 3) - dbracket / (_FOUR_PI * k * k)
    return f, df


def _pair_chunks(levels, n_nodes, budget=2_000_000):
    """Yield ``(level, i_idx, j_idx)`` chunks of off-diagonal pairs."""
    off = ~np.eye(levels.shape[0], dtype=bool)
    for lv in range(MAX_LEVEL + 1):
        ii, jj = np.nonzero((levels == lv) & off)
        step = max(1, budget // n_nodes[lv])
        for s in range(0, ii.size, step):
            yield lv, ii[s: s + step], jj[s: s + step]


def _pair_geometry(mesh, lv, ii, jj):
    qb, qw, qoff = stacked_rules()
    bary = qb[qoff[lv]: qoff[lv + 1]]
    w = qw[qoff[lv]: qoff[lv + 1]]
    tri = mesh.vertices[mesh.triangles[jj]]
    y = np.einsum("qa,pak->pqk", bary, tri)
    d = mesh.centroids[ii][:, None, :] - y
    r = np.linalg.norm(d, axis=2)
    cosr = np.einsum("pqk,pk->pq", d, mesh.normals[ii]) / r
    return r, cosr, w[None, :] * mesh.areas[jj][:, None]


def _static_numpy(mesh, levels):
    n = mesh.n_triangles
    s = np.zeros((n, n))
    kst = np.zeros((n, n))
    qoff = stacked_rules()[2]
    for lv, ii, jj in _pair_chunks(levels, np.diff(qoff)):
        r, cosr, w = _pair_geometry(mesh, lv, ii, jj)
        s[ii, jj] = -np.sum(w / r, axis=1) / _FOUR_PI
        kst[ii, jj] = np.sum(w * cosr / (r * r), axis=1) / _FOUR_PI
    return s, kst


def _helmholtz_numpy(mesh, levels, k, deriv):
    n = mesh.n_triangles
    mats = [np.zeros((n, n), dtype=complex) for _ in range(4 if deriv else 2)]
    qoff = stacked_rules()[2]
    for lv, ii, jj in _pair_chunks(levels, np.diff(qoff), budget=500_000):
        r, cosr, w = _pair_geometry(mesh, lv, ii, jj)
        g1, g1p, dg1, dg1p = gamma1(r, k)
        mats[0][ii, jj] = np.sum(w * g1, axis=1)
        mats[1][ii, jj] = np.sum(w * g1p * cosr, axis=1)
        if deriv:
            mats[2][ii, jj] = np.sum(w * dg1, axis=1)
            mats[3][ii, jj] = np.sum(w * dg1p * cosr, axis=1)
    return mats


# -- public assembly ---------------------------------------------------------


def near_field_levels(mesh, near_factor=1.5):
    """Subdivision level per pair: 3 if the triangles touch, 2 if near, else 0.

    "Near" means the centroid distance is below ``near_factor`` times the
    source triangle's diameter. Returned as an ``int8`` matrix.
    """
    n = mesh.n_triangles
    inc = np.zeros((n, len(mesh.vertices)), dtype=np.int32)
    inc[np.repeat(np.arange(n), 3), mesh.triangles.ravel()] = 1
    touching = (inc @ inc.T) > 0
    c = mesh.centroids
    dist = np.sqrt(np.maximum(np.sum(c * c, 1)[:, None] + np.sum(c * c, 1)[None, :] - 2 * c @ c.T, 0.0))
    levels = np.zeros((n, n), dtype=np.int8)
    levels[dist < near_factor * mesh.diameters[None, :]] = 2
    levels[touching] = 3
    return levels


# Past a decay of exp(-DECAY_CUTOFF) the unrefined rule changes entries by ~1e-10 relative.
DECAY_CUTOFF = 12.0


def _helmholtz_levels(mesh, levels, k):
    # Oscillatory or decaying kernels need at least one refinement, except
    # where exp(ikr) has decayed below roundoff across the whole source
    # triangle; there the remainder is the smooth (1 + ikr) / r part.
    refine = (abs(k) * mesh.diameters > 1.0)[None, :]
    if k.imag > 0:
        c = mesh.centroids
        dist = np.sqrt(np.maximum(
            np.sum(c * c, 1)[:, None] + np.sum(c * c, 1)[None, :] - 2 * c @ c.T, 0.0))
        refine = refine & (k.imag * (dist - mesh.diameters[None, :]) < DECAY_CUTOFF)
    return np.where(refine & (levels < 1), np.int8(1), levels).astype(np.int8)


def static_matrices(mesh, levels=None, use_numba=None):
    """Off-diagonal ``S`` and ``K*`` plus the exact diagonal of ``S``.

    The diagonal of ``K*`` is left at zero (flat panels); callers fix it.
    """
    if levels is None:
        levels = near_field_levels(mesh)
    use_numba = _accel.NUMBA_ENABLED if use_numba is None else use_numba
    if use_numba:
        n = mesh.n_triangles
        s = np.zeros((n, n))
        kst = np.zeros((n, n))
        qb, qw, qoff = stacked_rules()
        _static_loop(mesh.vertices, mesh.triangles, mesh.centroids, mesh.normals, mesh.areas,
                     levels, qb, qw, qoff, s, kst)
    else:
        s, kst = _static_numpy(mesh, levels)
    s[np.diag_indices_from(s)] = -laplace_self_integral(mesh) / _FOUR_PI
    return s, kst


def helmholtz_matrices(mesh, k, levels=None, derivative=False, use_numba=None):
    """``S_1^k`` and ``K_1^{*,k}`` (and their ``k`` derivatives).

    Returns
    -------
    tuple of ndarray
        ``(S1, K1)`` or ``(S1, K1, dS1/dk, dK1/dk)``.
    """
    if levels is None:
        levels = near_field_levels(mesh)
    k = complex(k)
    levels = _helmholtz_levels(mesh, levels, k)
    use_numba = _accel.NUMBA_ENABLED if use_numba is None else use_numba
    n = mesh.n_triangles
    if use_numba:
        mats = [np.zeros((n, n), dtype=complex) for _ in range(4)]
        qb, qw, qoff = stacked_rules()
        _helmholtz_loop(mesh.vertices, mesh.triangles, mesh.centroids, mesh.normals, mesh.areas,
                        levels, qb, qw, qoff, k, *mats, derivative)
        if not derivative:
            mats = mats[:2]
    else:
        mats = _helmholtz_numpy(mesh, levels, k, derivative)
    # Self terms: K_1 and its derivative vanish on a flat panel.
    radii, weights = polar_self_nodes(mesh)
    f, df = gamma1_radial_antiderivative(radii, k)
    idx = np.diag_indices(n)
    mats[0][idx] = np.sum(weights * f, axis=1)
    if derivative:
        mats[2][idx] = np.sum(weights * df, axis=1)
    return tuple(mats)
