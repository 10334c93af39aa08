"""Dense layer-potential operators in the centroid-collocation basis."""
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
import math
import struct

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..errors import DomainError
from .kernels import helmholtz_matrices, near_field_levels, static_matrices

__all__ = [
    "OperatorKind",
    "DenseOperator",
    "assemble_static",
    "assemble_helmholtz",
    "fix_kstar_diagonal",
    "dump_operator",
    "load_operator",
]

_MAGIC = b"NLPBEM01"


class OperatorKind(str, Enum):
    S = "S"
    KSTAR = "Kstar"
    SK = "Sk"
    KSTAR_K = "Kstar_k"
    S1K = "S1k"
    K1K = "K1k"
    PENCIL = "Pencil"
    PENCIL_TILDE = "PencilTilde"


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """A collocation matrix with its kind and the parameters it was built at."""

    matrix: np.ndarray
    kind: OperatorKind
    k: complex = None
    z: complex = None
    h: float = None

    def __matmul__(self, other):
        return self.matrix @ np.asarray(other)

    @property
    def shape(self):
        return self.matrix.shape


def fix_kstar_diagonal(s_lu, kstar):
    """Set the diagonal of ``K*`` so the equilibrium density is an exact eigenvector.

    With ``sigma = S^{-1} 1`` the diagonal is chosen so that
    ``K* sigma = sigma / 2`` holds row by row. Then
    ``(-1/4 + K*^2) S^{-1} 1 = 0`` to rounding error. On the sphere
    ``sigma`` is constant and this is the usual row-sum rule.
    """
    n = kstar.shape[0]
    sigma = lu_solve(s_lu, np.ones(n))
    np.fill_diagonal(kstar, 0.0)
    kstar[np.diag_indices(n)] = (0.5 * sigma - kstar @ sigma) / sigma
    return sigma


def assemble_static(mesh, levels=None):
    """Static single layer ``S`` and Neumann-Poincare operator ``K*``.

    Returns
    -------
    S, Kstar : DenseOperator
        ``S`` has its singular diagonal integrated exactly; ``K*`` has the
        diagonal from `fix_kstar_diagonal`.
    """
    s, kst = static_matrices(mesh, levels)
    fix_kstar_diagonal(lu_factor(s), kst)
    return DenseOperator(s, OperatorKind.S), DenseOperator(kst, OperatorKind.KSTAR)


def assemble_helmholtz(mesh, k, static=None, levels=None):
    """Helmholtz operators at wavenumber ``k`` via the smooth splitting.

    ``S^k = S - (ik / 4 pi) 1 a^T + k^2 S_1^k`` and
    ``K^{*,k} = K* + k^2 K_1^{*,k}``, where ``a`` holds the triangle areas.

    Parameters
    ----------
    mesh : TriMesh
    k : complex
    static : (DenseOperator, DenseOperator), optional
        Precomputed ``(S, K*)``.

    Returns
    -------
    Sk, Kstar_k, S1k, K1k : DenseOperator
    """
    k = complex(k)
    if levels is None:
        levels = near_field_levels(mesh)
    if static is None:
        static = assemble_static(mesh, levels)
    s, kst = static
    s1, k1 = helmholtz_matrices(mesh, k, levels)
    sk = s.matrix - (1j * k / (4 * math.pi)) * np.outer(np.ones(mesh.n_triangles), mesh.areas) + k * k * s1
    kk = kst.matrix + k * k * k1
    return (
        DenseOperator(sk, OperatorKind.SK, k=k),
        DenseOperator(kk, OperatorKind.KSTAR_K, k=k),
        DenseOperator(s1, OperatorKind.S1K, k=k),
        DenseOperator(k1, OperatorKind.K1K, k=k),
    )


def dump_operator(op, path):
    """Raw dump: ``NLPBEM01``, rows and cols as int64, then row-major complex128."""
    m = np.ascontiguousarray(op.matrix if isinstance(op, DenseOperator) else op, dtype="<c16")
    if m.ndim != 2:
        raise DomainError("operator must be a matrix")
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<qq", *m.shape))
        fh.write(m.tobytes())


def load_operator(path):
    """Inverse of `dump_operator`; returns the complex matrix."""
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise DomainError(f"{path}: not an operator dump")
    rows, cols = struct.unpack("<qq", raw[8:24])
    return np.frombuffer(raw, dtype="<c16", offset=24).reshape(rows, cols).copy()
