"""Driven problem: solve the pencil for a given external potential.

The external potential ``v_ext`` is harmonic near the particle. With
``psi`` solving ``Lambda~(z) psi = -d v_ext / d nu`` the remaining densities
are

    zeta = psi / h
    rho  = S^k zeta,                d rho / d nu = (-1/2 + K^{*,k}) zeta
    (1/2 + K*) q = -h d rho / d nu - d v_ext / d nu
    p    = q - (h / z^2) S^{-1} rho + S^{-1} v_ext

and the fields are ``rho = S^k[zeta]`` and ``u = (h/z^2) rho + S[p]`` inside,
``v = S[q] + v_ext`` outside.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import zgecon

from ..errors import DomainError, ResonanceError
from .quadrature import DUNAVANT7

__all__ = [
    "UniformField",
    "PointDipole",
    "FieldSolution",
    "single_layer_at",
    "condition_estimate",
    "external_neumann",
    "solve_scattering",
    "RESONANCE_CONDITION",
]

RESONANCE_CONDITION = 1e12


@dataclass(frozen=True)
class UniformField:
    """``v_ext(x) = direction . x``."""

    direction: tuple = (0.0, 0.0, 1.0)

    def potential(self, x):
        return np.asarray(x, dtype=float) @ np.asarray(self.direction, dtype=float)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.direction, dtype=float), x.shape).copy()

    def normal_derivative(self, mesh):
        return mesh.normals @ np.asarray(self.direction, dtype=float)


@dataclass(frozen=True)
class PointDipole:
    """Potential of a point dipole, ``v_ext(x) = moment . grad_x Gamma^0(x - position)``.

    With ``Gamma^0(r) = -1 / (4 pi |r|)`` this is
    ``moment . (x - position) / (4 pi |x - position|^3)``.
    """

    position: tuple
    moment: tuple

    def _rel(self, x):
        return np.asarray(x, dtype=float) - np.asarray(self.position, dtype=float)

    def potential(self, x):
        r = self._rel(x)
        dist = np.linalg.norm(r, axis=-1)
        return (r @ np.asarray(self.moment, dtype=float)) / (4 * math.pi * dist ** 3)

    def gradient(self, x):
        r = self._rel(x)
        p = np.asarray(self.moment, dtype=float)
        dist = np.linalg.norm(r, axis=-1)[..., None]
        pr = (r @ p)[..., None]
        return (p / dist ** 3 - 3 * pr * r / dist ** 5) / (4 * math.pi)

    def normal_derivative(self, mesh):
        return np.einsum("ij,ij->i", self.gradient(mesh.centroids), mesh.normals)


def _quad_points(mesh):
    bary, w = DUNAVANT7
    y = np.einsum("qa,tak->tqk", bary, mesh.vertices[mesh.triangles])
    return y.reshape(-1, 3), (mesh.areas[:, None] * w[None, :]).ravel()


def single_layer_at(mesh, density, points, k=0.0, chunk=256):
    """Single-layer potential of a piecewise-constant density at off-surface points.

    Uses the 7-point rule on every triangle, so accuracy degrades for
    points closer to the surface than a few triangle diameters.

    Parameters
    ----------
    mesh : TriMesh
    density : array_like, shape (nt,)
    points : array_like, shape (m, 3)
    k : complex
        Wavenumber; 0 gives the Laplace kernel.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    y, w = _quad_points(mesh)
    dens = np.repeat(np.asarray(density), 7) * w
    k = complex(k)
    out = np.empty(len(points), dtype=complex)
    for s in range(0, len(points), chunk):
        r = np.linalg.norm(points[s: s + chunk, None, :] - y[None, :, :], axis=2)
        kern = -1.0 / (4 * math.pi * r)
        if k != 0:
            kern = kern * np.exp(1j * k * r)
        out[s: s + chunk] = kern @ dens
    return out


def condition_estimate(lu_piv, matrix):
    """1-norm condition number estimate from an LU factorization."""
    lu, _ = lu_piv
    anorm = np.abs(matrix).sum(axis=0).max()
    rcond, info = zgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0:
        return math.inf
    return 1.0 / rcond


@dataclass(frozen=True, eq=False)
class FieldSolution:
    """Densities of a driven solve plus field evaluators.

    Attributes
    ----------
    psi, zeta, p, q : ndarray
        Collocation densities, one value per triangle.
    drho_dnu : ndarray
        Interior normal derivative of ``rho`` on the boundary.
    neumann : ndarray
        The ``d v_ext / d nu`` data the solve used.
    condition : float
        Condition estimate of the pencil at ``z``.
    """

    evaluator: object
    z: complex
    vext: object
    psi: np.ndarray
    zeta: np.ndarray
    p: np.ndarray
    q: np.ndarray
    drho_dnu: np.ndarray
    neumann: np.ndarray
    condition: float

    @property
    def h(self):
        return self.evaluator.h

    @property
    def mesh(self):
        return self.evaluator.mesh

    @property
    def k(self):
        return self.z / self.h

    def rho(self, points):
        """Interior charge density perturbation at interior points."""
        return single_layer_at(self.mesh, self.zeta, points, self.k)

    def u(self, points):
        """Interior potential."""
        return (self.h / self.z ** 2) * self.rho(points) + single_layer_at(self.mesh, self.p, points)

    def v(self, points):
        """Exterior potential including the external part."""
        return single_layer_at(self.mesh, self.q, points) + self.vext.potential(points)

    def scattered(self, points):
        """Exterior potential minus the external part."""
        return single_layer_at(self.mesh, self.q, points)

    def dipole_moment(self, direction=(0.0, 0.0, 1.0)):
        """Polarizability along ``direction``.

        ``v - v_ext`` behaves like ``-mu (d . x) / |x|^3`` at large
        ``|x|``, which makes ``mu = (eps - 1) / (eps + 2)`` for a local
        sphere in a uniform field.
        """
        y = self.mesh.centroids @ np.asarray(direction, dtype=float)
        return complex(np.sum(self.mesh.areas * y * self.q) / (4 * math.pi))

    def boundary_residual(self):
        """Collocation violation of the transmission conditions.

        Returns ``(|u - v|, |du/dnu - dv/dnu|, |dv/dnu + h drho/dnu|)`` as
        maximum norms on the boundary.
        """
        ev = self.evaluator
        h, z = self.h, self.z
        rho_b = ev.helmholtz(z)[0] @ self.zeta
        u_b = (h / z ** 2) * rho_b + ev.S @ self.p
        v_b = ev.S @ self.q + self.vext.potential(self.mesh.centroids)
        du = (h / z ** 2) * self.drho_dnu + ev.Kstar @ self.p - 0.5 * self.p
        dv = ev.Kstar @ self.q + 0.5 * self.q + self.neumann
        return (
            float(np.max(np.abs(u_b - v_b))),
            float(np.max(np.abs(du - dv))),
            float(np.max(np.abs(dv + h * self.drho_dnu))),
        )


def external_neumann(evaluator, vext, mode="analytic"):
    """Normal derivative of ``v_ext`` at the collocation nodes.

    ``mode="analytic"`` differentiates the potential. ``mode="discrete"``
    uses the discrete interior Dirichlet-to-Neumann map
    ``(-1/2 + K*) S^{-1} v_ext``, which makes the collocated transmission
    conditions hold to rounding error; the far field changes only at the
    level of the discretization error.
    """
    mesh = evaluator.mesh
    if mode == "analytic":
        return np.asarray(vext.normal_derivative(mesh), dtype=complex)
    if mode == "discrete":
        sv = evaluator.solve_s(np.asarray(vext.potential(mesh.centroids), dtype=complex))
        return evaluator.Kstar @ sv - 0.5 * sv
    raise DomainError(f"unknown Neumann data mode {mode!r}")


def solve_scattering(evaluator, z, vext, max_condition=RESONANCE_CONDITION, neumann="analytic"):
    """Solve the driven nonlocal transmission problem at spectral parameter ``z``.

    Parameters
    ----------
    evaluator : PencilEvaluator
    z : complex
        Nonzero spectral parameter, ``z^2 = eps / (1 - eps)``.
    vext : UniformField or PointDipole
        Any object with ``potential``, ``gradient`` and ``normal_derivative``.
    max_condition : float
        Solves with a larger condition estimate raise `ResonanceError`.
    neumann : {"analytic", "discrete"}
        How ``d v_ext / d nu`` is obtained; see `external_neumann`.

    Returns
    -------
    FieldSolution
    """
    z = complex(z)
    if z == 0:
        raise DomainError("z must be nonzero")
    mesh = evaluator.mesh
    h = evaluator.h
    g = external_neumann(evaluator, vext, neumann)
    tilde = evaluator.tilde(z)
    lu = lu_factor(tilde)
    cond = condition_estimate(lu, tilde)
    if not cond < max_condition:
        raise ResonanceError(f"pencil nearly singular at z={z}", estimate=cond)
    psi = lu_solve(lu, -g)
    zeta = psi / h
    sk, kk = evaluator.helmholtz(z)
    rho_b = sk @ zeta
    drho = kk @ zeta - 0.5 * zeta
    q = np.linalg.solve(evaluator.Kstar + 0.5 * np.eye(evaluator.n), -h * drho - g)
    v_b = vext.potential(mesh.centroids)
    p = q - (h / z ** 2) * evaluator.solve_s(rho_b) + evaluator.solve_s(v_b)
    return FieldSolution(evaluator, z, vext, psi, zeta, p, q, drho, g, cond)
