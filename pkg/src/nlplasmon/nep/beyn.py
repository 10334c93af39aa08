"""Contour-integral eigensolver for analytic matrix pencils.

For a pencil ``T(z)`` analytic on and inside a closed contour, the moments

    A_0 = (1 / 2 pi i) \\oint T(z)^{-1} V dz,    A_1 = (1 / 2 pi i) \\oint z T(z)^{-1} V dz

with a random probe block ``V`` contain every eigenvalue inside the contour.
With the thin SVD ``A_0 = U_r S_r W_r^H`` truncated at the numerical rank,
the eigenvalues of ``U_r^H A_1 W_r S_r^{-1}`` are the enclosed eigenvalues
and ``U_r`` times its eigenvectors are the right eigenvectors. The same
moments of the transposed pencil give left eigenvectors. Each pole is then
polished by Newton's method.
"""
from dataclasses import dataclass
import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, eig, lu_factor, lu_solve, qr

from ..errors import ContourError, ConvergenceError, DomainError, InconclusiveRankError
from .poles import Pole, classify_pole

__all__ = ["BeynParams", "FunctionPencil", "beyn_solve", "polish_pole"]


@dataclass(frozen=True)
class BeynParams:
    """Tuning knobs of `beyn_solve`.

    Attributes
    ----------
    n_quad : int
        Initial quadrature nodes on the contour (at least 32).
    max_quad : int
        Node count at which doubling stops.
    rank_tol : float
        Singular values below ``rank_tol * s_max`` count as zero.
    probe_cols : int
        Columns of the random probe block; must exceed the number of
        enclosed eigenvalues (with multiplicity).
    quad_tol : float
        Largest accepted relative change of ``A_0`` between a rule and the
        one with half as many nodes; the node count doubles until met.
    dedup_tol : float
        Eigenvalues closer than this (relative to the contour size) form one
        degenerate pole.
    tol_axis : float
        Axis tolerance of the classification.
    polish : bool
        Run Newton on every pole.
    left : bool
        Also compute left eigenvectors.
    seed : int
        Seed of the probe block.
    """

    n_quad: int = 32
    max_quad: int = 256
    rank_tol: float = 1e-8
    probe_cols: int = 8
    quad_tol: float = 1e-6
    dedup_tol: float = 1e-3
    tol_axis: float = 1e-6
    polish: bool = True
    left: bool = True
    seed: int = 1234
    max_newton: int = 8


class FunctionPencil:
    """Adapter turning callables into the pencil interface.

    Parameters
    ----------
    matrix : callable
        ``z -> ndarray (n, n)``.
    derivative : callable, optional
        ``z -> dT/dz``; central differences with step ``1e-6 |z|`` if absent.
    weights : ndarray, optional
        Quadrature weights of the pairing (defaults to ones).
    """

    def __init__(self, matrix, derivative=None, weights=None):
        self._matrix = matrix
        self._derivative = derivative
        probe = np.atleast_2d(np.asarray(matrix(1j)))
        self.n = probe.shape[0]
        self.weights = np.ones(self.n) if weights is None else np.asarray(weights, dtype=float)

    def matrix(self, z):
        return np.atleast_2d(np.asarray(self._matrix(z), dtype=complex))

    def derivative(self, z):
        if self._derivative is not None:
            return np.atleast_2d(np.asarray(self._derivative(z), dtype=complex))
        step = 1e-6 * max(abs(z), 1.0)
        return (self.matrix(z + step) - self.matrix(z - step)) / (2 * step)


def _size(pencil):
    n = getattr(pencil, "n", None)
    return n if n is not None else pencil.matrix(1j).shape[0]


class _Moments:
    """Per-node solves of the contour rule, refined by doubling.

    For nested rules the solves at ``n`` nodes are kept and reused at
    ``2n``; otherwise every level is computed afresh.
    """

    def __init__(self, pencil, contour, probe, left_probe):
        self.pencil, self.contour = pencil, contour
        self.probe, self.left_probe = probe, left_probe
        self._cache = {}

    def _solve(self, z):
        key = complex(z)
        hit = self._cache.get(key)
        if hit is None:
            lu = lu_factor(self.pencil.matrix(key))
            x = lu_solve(lu, self.probe)
            y = None if self.left_probe is None else lu_solve(lu, self.left_probe, trans=1)
            hit = self._cache[key] = (x, y)
        return hit

    def level(self, n):
        if not self.contour.nested:
            self._cache.clear()
        z, w = self.contour.nodes(n)
        shape = self.probe.shape
        out = {key: np.zeros(shape, dtype=complex) for key in ("a0", "a1", "b0", "b1")}
        mass = 0.0
        for zi, wi in zip(z, w):
            x, y = self._solve(zi)
            out["a0"] += wi * x
            out["a1"] += wi * zi * x
            mass += abs(wi) * np.linalg.norm(x)
            if y is not None:
                out["b0"] += wi * y
                out["b1"] += wi * zi * y
        return out, mass


def _converged_moments(pencil, contour, params, probe, left_probe):
    """Moments at the first level whose ``A_0`` agrees with half the nodes."""
    mom = _Moments(pencil, contour, probe, left_probe)
    coarse, _ = mom.level(params.n_quad // 2)
    n = params.n_quad
    while True:
        acc, mass = mom.level(n)
        top = np.linalg.norm(acc["a0"], 2)
        change = np.linalg.norm(acc["a0"] - coarse["a0"], 2) / max(top, params.quad_tol * mass)
        if change <= params.quad_tol:
            return acc, mass, n
        if 2 * n > params.max_quad:
            raise ContourError(
                f"moment changed by {change:.2e} at {n} nodes; the contour passes "
                "too close to a pole or needs more nodes")
        coarse, n = acc, 2 * n


def _rank(s, rank_tol, mass, quad_tol, full=False):
    """Numerical rank from singular values, with an absolute empty test."""
    if s.size == 0 or s[0] <= quad_tol * mass:
        return 0
    rel = s / s[0]
    r = int(np.sum(rel > rank_tol))
    ambiguous = (rel > rank_tol) & (rel < 10 * rank_tol)
    if np.any(ambiguous):
        raise InconclusiveRankError(
            f"singular values {rel[ambiguous]} lie within 10x of rank_tol; "
            "enlarge the probe block or tighten the contour")
    if r == s.size and not full:
        raise InconclusiveRankError(
            f"rank {r} fills the probe block; more eigenvalues may be enclosed, enlarge probe_cols")
    return r


def _extract(a0, a1, rank_tol, mass, quad_tol, full=False):
    u, s, vh = np.linalg.svd(a0, full_matrices=False)
    r = _rank(s, rank_tol, mass, quad_tol, full)
    if r == 0:
        return np.zeros(0, dtype=complex), np.zeros((a0.shape[0], 0), dtype=complex)
    ur, sr, wr = u[:, :r], s[:r], vh[:r].conj().T
    b = ur.conj().T @ a1 @ wr / sr
    lam, vecs = eig(b)
    return lam, ur @ vecs


def _cluster(lam, tol):
    """Group eigenvalues into clusters closer than ``tol`` (single linkage)."""
    order = np.argsort(lam.imag + 1e-3 * lam.real)
    groups = []
    for i in order:
        for g in groups:
            if min(abs(lam[i] - lam[j]) for j in g) < tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _orthonormal(v):
    q, _ = qr(v, mode="economic")
    return q


def _match_left(lam_right, lam_left, group, vecs_left, tol):
    """Left vectors whose eigenvalues are closest to the cluster mean."""
    if lam_left.size == 0:
        return None
    target = lam_right[group].mean()
    order = np.argsort(np.abs(lam_left - target))[: len(group)]
    if np.any(np.abs(lam_left[order] - target) > max(tol, 10 * np.ptp(np.abs(lam_right[group])))):
        return None
    return vecs_left[:, order]


def polish_pole(pencil, z0, right, left=None, max_iter=8, tol=1e-12):
    """Newton refinement of a (possibly degenerate) eigenvalue.

    A simple eigenvalue uses Newton's method on the bordered system
    ``[T v = 0, v_0^H v = 1]``, implemented as the equivalent step
    ``x = T^{-1} T' v``, ``z <- z - 1 / (v^H x)``, ``v <- x / |x|`` for a
    unit vector ``v``.
    A cluster of ``m`` eigenvalues uses the projected step
    ``z <- z + mean(eig(-(W^T T' V)^{-1} W^T T V))`` followed by one block
    inverse iteration on both sides.

    Returns
    -------
    z, right, left, steps : complex, ndarray, ndarray or None, ndarray
        ``steps`` holds the individual projected shifts of the last
        iteration (their spread measures the splitting of the cluster).
    """
    z = complex(z0)
    v = _orthonormal(np.asarray(right, dtype=complex).reshape(len(right), -1))
    m = v.shape[1]
    w = None if left is None else _orthonormal(np.asarray(left, dtype=complex).reshape(len(left), -1))
    steps = np.zeros(m, dtype=complex)
    dz = 0.0
    for _ in range(max_iter):
        t = pencil.matrix(z)
        dt = pencil.derivative(z)
        with warnings.catch_warnings(), np.errstate(all="ignore"):
            warnings.simplefilter("ignore", LinAlgWarning)
            lu = lu_factor(t)
            x = lu_solve(lu, dt @ v)
            y = None if w is None else lu_solve(lu, dt.T @ w, trans=1)
        if not np.all(np.isfinite(x)):
            # Landed exactly on the eigenvalue.
            dz = 0.0
            break
        if m == 1:
            denom = v[:, 0].conj() @ x[:, 0]
            if denom == 0:
                raise ConvergenceError("Newton step undefined", last=z)
            dz = -1.0 / denom
            steps = np.array([dz])
        else:
            wl = w if w is not None else v.conj()
            steps = eig(-np.linalg.solve(wl.T @ dt @ v, wl.T @ t @ v), right=False)
            dz = steps.mean()
        v = _orthonormal(x)
        if y is not None and np.all(np.isfinite(y)):
            w = _orthonormal(y)
        z = z + dz
        if abs(dz) <= tol * max(abs(z), 1.0):
            break
    else:
        if abs(dz) > 1e-8 * max(abs(z), 1.0):
            raise ConvergenceError(f"Newton did not converge near {z0}", last=z)
    # One refresh at the final z so the vectors match it; an exactly
    # singular matrix means they already do.
    t = pencil.matrix(z)
    dt = pencil.derivative(z)
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore", LinAlgWarning)
        lu = lu_factor(t)
        v_new = lu_solve(lu, dt @ v)
        w_new = None if w is None else lu_solve(lu, dt.T @ w, trans=1)
    if np.all(np.isfinite(v_new)):
        v = _orthonormal(v_new)
    if w_new is not None and np.all(np.isfinite(w_new)):
        w = _orthonormal(w_new)
    return z, v, w, steps


def beyn_solve(pencil, contour, params=None):
    """All eigenvalues of ``pencil`` inside ``contour``.

    Parameters
    ----------
    pencil : object
        Provides ``matrix(z)`` and ``derivative(z)``; see `FunctionPencil`.
    contour : Ellipse or Rectangle
    params : BeynParams, optional

    Returns
    -------
    list of Pole
        Sorted by imaginary then real part. Each pole carries orthonormal
        right vectors and, if requested, left vectors with
        ``W^T T'(z) V = I``.

    Raises
    ------
    InconclusiveRankError
        The singular values of ``A_0`` do not separate cleanly or the rank
        fills the probe block.
    ContourError
        ``A_0`` still changed by more than ``params.quad_tol`` when the node
        count reached ``params.max_quad``.
    """
    params = params or BeynParams()
    if params.n_quad < 32:
        raise DomainError("n_quad must be at least 32")
    n = _size(pencil)
    p = min(params.probe_cols, n)
    rng = np.random.default_rng(params.seed)
    probe = rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))
    left_probe = None
    if params.left:
        left_probe = rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))
    acc, mass, _ = _converged_moments(pencil, contour, params, probe, left_probe)
    # A probe block as wide as the matrix may legitimately be filled.
    full = p == n
    lam, vecs = _extract(acc["a0"], acc["a1"], params.rank_tol, mass, params.quad_tol, full)
    lam_l, vecs_l = np.zeros(0, dtype=complex), None
    if params.left and lam.size:
        lam_l, vecs_l = _extract(acc["b0"], acc["b1"], params.rank_tol, mass, params.quad_tol, full)
    keep = contour.contains(lam)
    lam, vecs = lam[keep], vecs[:, keep]
    tol = params.dedup_tol * contour.size
    poles = []
    for group in _cluster(lam, tol):
        z0 = complex(lam[group].mean())
        right = vecs[:, group]
        left = _match_left(lam, lam_l, group, vecs_l, tol) if params.left else None
        if params.polish:
            z0, right, left, _ = polish_pole(pencil, z0, right, left, max_iter=params.max_newton)
        else:
            right = _orthonormal(right)
            left = None if left is None else _orthonormal(left)
        if left is not None:
            left = _biorthonormalize(pencil, z0, right, left)
        poles.append(Pole.from_vectors(z0, right, left, classify_pole(z0, params.tol_axis)))
    poles.sort(key=lambda pl: (pl.z.imag, pl.z.real))
    return poles


def _biorthonormalize(pencil, z, right, left):
    """Rescale ``left`` so that ``left^T T'(z) right = I``."""
    proj = left.T @ pencil.derivative(z) @ right
    return left @ np.linalg.inv(proj).T
