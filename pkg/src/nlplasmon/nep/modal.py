"""Residue data of a pole and the truncated pole expansion of the driven field.

Near a first-order pole ``z_j`` the inverse pencil behaves like
``V W^T / (z - z_j)`` when the left vectors satisfy ``W^T T'(z_j) V = I``.
The driven density solves ``T(z) psi = -g`` with ``g = d v_ext / d nu``, so
every field of the driven problem has the residue ``sum_i c_i X_i`` with
``c_i = w_i^T g`` (the area-weighted pairing of the left density
``w_i / a`` with ``g``) and mode fields ``X_i`` built from ``-psi_i``:

    zeta_i = -psi_i / h,   rho_i = S^{k_j} zeta_i
    q_i = (1/2 + K*)^{-1} (-1/2 + K^{*,k_j}) psi_i,   v_i = S[q_i]
    p_i = q_i - (h / z_j^2) S^{-1} rho_i,   u_i = (h / z_j^2) rho_i + S[p_i]
"""
from dataclasses import dataclass

import numpy as np

from ..errors import NonSimplePoleError, ResonanceError
from ..bem.scattering import external_neumann, single_layer_at, solve_scattering

__all__ = ["ModeBundle", "ModalEvaluation", "modal_data", "modal_expansion_eval", "residue_error"]


@dataclass(frozen=True, eq=False)
class ModeBundle:
    """Excitation coefficients and mode densities of one (possibly degenerate) pole.

    Attributes
    ----------
    pole : Pole
    coefficients : ndarray, shape (m,)
        ``c_i`` for each right vector of the pole.
    psi, zeta, q, p : ndarray, shape (n, m)
        Mode densities, one column per right vector.
    """

    pole: object
    evaluator: object
    coefficients: np.ndarray
    psi: np.ndarray
    zeta: np.ndarray
    q: np.ndarray
    p: np.ndarray

    @property
    def z(self):
        return self.pole.z

    @property
    def c(self):
        """The single coefficient of a non-degenerate pole."""
        if self.coefficients.size != 1:
            raise ValueError("pole is degenerate; use coefficients")
        return complex(self.coefficients[0])

    def weighted_psi(self):
        """``sum_i c_i psi_i``, the residue of ``T(z)^{-1} g``."""
        return self.psi @ self.coefficients

    def rho(self, points, i=None):
        return self._field(points, i, self.zeta, self.pole.z / self.evaluator.h)

    def v(self, points, i=None):
        """Scattered exterior mode field (``v_ext`` excluded)."""
        return self._field(points, i, self.q, 0.0)

    def u(self, points, i=None):
        h, z = self.evaluator.h, self.pole.z
        return (h / z ** 2) * self.rho(points, i) + self._field(points, i, self.p, 0.0)

    def _field(self, points, i, dens, k):
        """Mode ``i``, or the ``c``-weighted sum over modes when ``i`` is None."""
        mesh = self.evaluator.mesh
        d = dens @ self.coefficients if i is None else dens[:, i]
        return single_layer_at(mesh, d, points, k)


def modal_data(pole, evaluator, vext, neumann="analytic", simple_tol=1e-10):
    """Residue coefficients and mode fields of ``pole`` for the excitation ``vext``.

    Parameters
    ----------
    pole : Pole
        Needs left vectors normalized by ``left^T T'(z) right = I``.
    evaluator : PencilEvaluator
    vext : UniformField or PointDipole
    neumann : {"analytic", "discrete"}
        Passed to `external_neumann`.
    simple_tol : float
        Smallest accepted singular value of the normalized derivative
        pairing, relative to ``|T'| |left| |right|`` before scaling.

    Raises
    ------
    NonSimplePoleError
        No left vectors, or the derivative pairing is numerically singular.
    """
    if pole.left is None or not pole.simple:
        raise NonSimplePoleError(f"pole at {pole.z} has no usable left vectors")
    z = complex(pole.z)
    h = evaluator.h
    dt = evaluator.derivative(z)
    v, w = pole.right, pole.left
    pairing = w.T @ dt @ v
    scale = np.linalg.norm(dt, 2) * np.linalg.norm(w, 2) * np.linalg.norm(v, 2)
    if not np.linalg.svd(pairing, compute_uv=False).min() > simple_tol * scale:
        raise NonSimplePoleError(f"derivative pairing is singular at z={z}")
    # Re-normalize in case the pole came from elsewhere.
    w = w @ np.linalg.inv(pairing).T
    g = external_neumann(evaluator, vext, neumann)
    coeffs = w.T @ g
    sk, kk = evaluator.helmholtz(z)
    zeta = -v / h
    rho = sk @ zeta
    q = np.linalg.solve(evaluator.Kstar + 0.5 * np.eye(evaluator.n), kk @ v - 0.5 * v)
    p = q - (h / z ** 2) * evaluator.solve_s(rho)
    return ModeBundle(pole, evaluator, coeffs, v, zeta, q, p)


def residue_error(bundle, z, vext, neumann="analytic"):
    """``|(z - z_j) T(z)^{-1} g - sum_i c_i psi_i| / |sum_i c_i psi_i|``."""
    ev = bundle.evaluator
    g = external_neumann(ev, vext, neumann)
    x = np.linalg.solve(ev.tilde(z), g)
    target = bundle.weighted_psi()
    return float(np.linalg.norm((z - bundle.z) * x - target) / np.linalg.norm(target))


@dataclass(frozen=True)
class ModalEvaluation:
    """Pole-sum and direct values of the exterior potential at probe points.

    ``remainder = direct - pole_sum`` estimates the holomorphic part. Both
    include ``v_ext``; ``direct`` is None when the direct solve was skipped.
    """

    pole_sum: np.ndarray
    direct: np.ndarray
    remainder: np.ndarray


def modal_expansion_eval(bundles, z, vext, probe_points, direct=True, neumann="analytic"):
    """Truncated pole expansion ``sum_j c_j v_j / (z - z_j) + v_ext`` at exterior points.

    Parameters
    ----------
    bundles : sequence of ModeBundle
    z : complex
    vext : external field
    probe_points : array_like, shape (m, 3)
        Exterior points.
    direct : bool
        Also solve the driven problem at ``z`` for comparison.

    Raises
    ------
    ResonanceError
        ``z`` coincides with one of the poles.
    """
    z = complex(z)
    pts = np.atleast_2d(np.asarray(probe_points, dtype=float))
    total = np.asarray(vext.potential(pts), dtype=complex).copy()
    for b in bundles:
        dz = z - b.z
        if abs(dz) <= 1e-14 * max(abs(b.z), 1.0):
            raise ResonanceError(f"z={z} coincides with the pole at {b.z}", estimate=abs(dz))
        total += b.v(pts) / dz
    if not direct:
        return ModalEvaluation(total, None, None)
    sol = solve_scattering(bundles[0].evaluator, z, vext, neumann=neumann)
    exact = sol.v(pts)
    return ModalEvaluation(total, exact, exact - total)
