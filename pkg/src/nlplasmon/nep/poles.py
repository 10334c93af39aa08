"""Pole records, axis classification and TSV output."""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..kinds import ModeKind
from ..medium import eps_from_z
from ..tables import format_number

__all__ = ["Pole", "classify_pole", "poles_to_tsv", "write_poles", "POLE_COLUMNS"]

POLE_COLUMNS = ("re_z", "im_z", "re_eps", "im_eps", "kind", "degeneracy")


def classify_pole(z, tol_axis=1e-6):
    """Axis-based kind of a pole in the ``z`` plane.

    Lower half plane beyond ``tol_axis``: scattering resonance. Positive
    imaginary axis: surface mode. Positive real axis: bulk mode. Anything
    else is flagged as a discretization artifact.
    """
    if not tol_axis > 0:
        raise ValueError("tol_axis must be positive")
    z = complex(z)
    if z.imag < -tol_axis:
        return ModeKind.SCATTERING
    if abs(z.real) <= tol_axis and z.imag > 0:
        return ModeKind.SURFACE
    if abs(z.imag) <= tol_axis and z.real > 0:
        return ModeKind.BULK
    return ModeKind.ARTIFACT


@dataclass(frozen=True, eq=False)
class Pole:
    """An eigenvalue ``z`` of the pencil with its eigenvectors.

    Attributes
    ----------
    z : complex
    eps : complex
        ``z^2 / (z^2 + 1)``.
    kind : ModeKind
    right : ndarray, shape (n, m)
        Orthonormal basis of the right null space, ``T(z) right = 0``.
    left : ndarray, shape (n, m) or None
        Algebraic left null vectors, ``left^T T(z) = 0``, scaled so that
        ``left^T T'(z) right = I``. In the area-weighted pairing the left
        densities are ``left / weights``.
    simple : bool
        True when the pairing matrix ``left^T T'(z) right`` is invertible,
        i.e. the inverse pencil has a first-order pole here.
    """

    z: complex
    eps: complex
    kind: ModeKind
    right: np.ndarray
    left: np.ndarray = None
    simple: bool = True

    @classmethod
    def from_vectors(cls, z, right, left, kind):
        z = complex(z)
        try:
            eps = complex(eps_from_z(z))
        except ZeroDivisionError:
            eps = complex("nan")
        return cls(z, eps, kind, np.asarray(right), None if left is None else np.asarray(left),
                   left is not None and bool(np.all(np.isfinite(left))))

    @property
    def degeneracy(self):
        return self.right.shape[1]

    def residual(self, pencil):
        """``max_i |T(z) v_i| / (|T(z)| |v_i|)`` over the right vectors."""
        t = pencil.matrix(self.z)
        r = np.linalg.norm(t @ self.right, axis=0) / (np.linalg.norm(t, 2) * np.linalg.norm(self.right, axis=0))
        return float(r.max())


def poles_to_tsv(poles):
    """TSV text with one line per pole; empty pole lists give only the header."""
    lines = ["#" + "\t".join(POLE_COLUMNS)]
    for p in poles:
        lines.append("\t".join([
            format_number(p.z.real), format_number(p.z.imag),
            format_number(p.eps.real), format_number(p.eps.imag),
            str(p.kind), str(p.degeneracy),
        ]))
    return "\n".join(lines) + "\n"


def write_poles(poles, path):
    Path(path).write_bytes(poles_to_tsv(poles).encode("ascii"))
