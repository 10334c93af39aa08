"""The nonlocal operator pencils on a triangulated surface.

For a spectral parameter ``z`` and ``k = z / h``::

    Lambda(z)  = (z^2 + 1/2 + K*)(-1/2 + K^{*,k}) - W S^k
    Lambda~(z) = -1/2 + K* + L(z)
    L(z)       = h^{-2} [(z^2 + 1/2 + K*) K_1^{*,k} - W S_1^k]

with ``W = (-1/4 + K*^2) S^{-1}``. The two satisfy
``z^2 Lambda~(z) = Lambda(z)`` because ``W`` annihilates constants.
"""
from collections import OrderedDict
import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..errors import DomainError, SingularityError
from .kernels import helmholtz_matrices, near_field_levels
from .operators import DenseOperator, OperatorKind, assemble_static

__all__ = ["PencilEvaluator", "assemble_pencils"]


def _real_times(a, b):
    """``a @ b`` for real ``a`` and complex ``b`` with two real products."""
    b = np.asarray(b)
    if np.iscomplexobj(b):
        # Strided views of the real/imaginary parts would bypass BLAS.
        re = a @ np.ascontiguousarray(b.real)
        im = a @ np.ascontiguousarray(b.imag)
        return re + 1j * im
    return a @ b


class PencilEvaluator:
    """Cached static operators plus on-demand ``Lambda~(z)`` and its derivative.

    Parameters
    ----------
    mesh : TriMesh
    h : float
        Nonlocal length.
    kstar_shift : float
        Adds ``kstar_shift * I`` to the ``K*`` entering ``Lambda~`` only, so
        that ``z^2 Lambda~ = Lambda`` no longer holds. A negative-control
        hook; leave at zero for real work.
    cache_size : int
        Number of recent ``z`` values whose Helmholtz parts are kept.
    """

    def __init__(self, mesh, h, kstar_shift=0.0, cache_size=4):
        if not h > 0:
            raise DomainError("h must be positive")
        self.mesh = mesh
        self.h = float(h)
        self.n = mesh.n_triangles
        self.levels = near_field_levels(mesh)
        s_op, k_op = assemble_static(mesh, self.levels)
        self.S = s_op.matrix
        self.Kstar = k_op.matrix
        self._kstar_tilde = self.Kstar + kstar_shift * np.eye(self.n) if kstar_shift else self.Kstar
        self.s_lu = lu_factor(self.S)
        m = self.Kstar @ self.Kstar - 0.25 * np.eye(self.n)
        # W = M S^{-1}  <=>  S^T W^T = M^T
        self.W = lu_solve(self.s_lu, m.T, trans=1).T
        self.ones = np.ones(self.n)
        self._cache = OrderedDict()
        self._cache_size = cache_size

    @property
    def weights(self):
        """Quadrature weights of the discrete pairing (triangle areas)."""
        return self.mesh.areas

    def solve_s(self, b):
        return lu_solve(self.s_lu, b)

    def _parts(self, z, derivative=False):
        # The k derivatives roughly double the assembly cost, so they are
        # only computed when asked for; a hit without them is upgraded.
        key = complex(z)
        hit = self._cache.get(key)
        if hit is None or (derivative and len(hit) == 2):
            hit = helmholtz_matrices(self.mesh, key / self.h, self.levels, derivative=derivative)
            self._cache[key] = hit
            if len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        else:
            self._cache.move_to_end(key)
        return hit

    def helmholtz(self, z):
        """``(S^k, K^{*,k})`` at ``k = z / h``."""
        z = complex(z)
        k = z / self.h
        s1, k1 = self._parts(z)[:2]
        sk = self.S - (1j * k / (4 * math.pi)) * np.outer(self.ones, self.mesh.areas) + k * k * s1
        return sk, self.Kstar + k * k * k1

    def tilde(self, z):
        """``Lambda~(z)`` as a dense complex matrix."""
        z = complex(z)
        s1, k1 = self._parts(z)[:2]
        lz = (z * z + 0.5) * k1 + _real_times(self._kstar_tilde, k1) - _real_times(self.W, s1)
        out = lz / (self.h * self.h)
        out += self._kstar_tilde
        out[np.diag_indices(self.n)] -= 0.5
        return out

    def tilde_derivative(self, z):
        """``d Lambda~ / dz`` from the analytic ``k`` derivatives of the kernels."""
        z = complex(z)
        _, k1, ds1, dk1 = self._parts(z, derivative=True)
        inner = (z * z + 0.5) * dk1 + _real_times(self._kstar_tilde, dk1) - _real_times(self.W, ds1)
        return (2 * z * k1 + inner / self.h) / (self.h * self.h)

    def full(self, z):
        """``Lambda(z)`` assembled from the reconstructed ``S^k`` and ``K^{*,k}``."""
        z = complex(z)
        if z == 0:
            raise SingularityError("k = z / h must be nonzero")
        sk, kk = self.helmholtz(z)
        left = self.Kstar + (z * z + 0.5) * np.eye(self.n)
        right = kk - 0.5 * np.eye(self.n)
        return left @ right - _real_times(self.W, sk)

    # Uniform interface for the contour solver.
    matrix = tilde
    derivative = tilde_derivative


def assemble_pencils(evaluator, z):
    """``(Lambda(z), Lambda~(z))`` as tagged operators."""
    z = complex(z)
    k = z / evaluator.h
    return (
        DenseOperator(evaluator.full(z), OperatorKind.PENCIL, k=k, z=z, h=evaluator.h),
        DenseOperator(evaluator.tilde(z), OperatorKind.PENCIL_TILDE, k=k, z=z, h=evaluator.h),
    )
