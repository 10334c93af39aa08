"""Triangle quadrature: regular, subdivided and singular self-integrals.

Regular pairs use the 7-point degree-5 rule, optionally on a uniformly
refined reference triangle. Self pairs (observation point at the
triangle's own centroid) are integrated exactly in the radial direction in
polar coordinates centred at the observation point, with Gauss-Legendre in
the angle.
"""
from functools import lru_cache

import numpy as np

__all__ = [
    "DUNAVANT7",
    "MAX_LEVEL",
    "subdivided_rule",
    "stacked_rules",
    "laplace_self_integral",
    "polar_self_nodes",
]

_A1, _B1 = 0.059715871789769820, 0.470142064105115090
_A2, _B2 = 0.797426985353087322, 0.101286507323456339
_W0, _W1, _W2 = 0.225, 0.132394152788506181, 0.125939180544827153

# Barycentric nodes (rows sum to 1) and weights (sum to 1).
DUNAVANT7 = (
    np.array(
        [
            [1 / 3, 1 / 3, 1 / 3],
            [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
            [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
        ]
    ),
    np.array([_W0, _W1, _W1, _W1, _W2, _W2, _W2]),
)

MAX_LEVEL = 3


def _split(tri):
    a, b, c = tri
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    return [np.array(t) for t in ([a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca])]


@lru_cache(maxsize=None)
def subdivided_rule(level):
    """7-point rule on the ``4**level`` congruent subtriangles.

    Returns barycentric nodes ``(7 * 4**level, 3)`` and weights summing to 1.
    """
    tris = [np.eye(3)]
    for _ in range(level):
        tris = [s for t in tris for s in _split(t)]
    bary, w = DUNAVANT7
    nodes = np.concatenate([bary @ t for t in tris])
    weights = np.tile(w, len(tris)) / len(tris)
    return nodes, weights


@lru_cache(maxsize=None)
def stacked_rules():
    """All levels ``0..MAX_LEVEL`` concatenated, with offsets per level."""
    rules = [subdivided_rule(lv) for lv in range(MAX_LEVEL + 1)]
    nodes = np.ascontiguousarray(np.concatenate([r[0] for r in rules]))
    weights = np.ascontiguousarray(np.concatenate([r[1] for r in rules]))
    offsets = np.cumsum([0] + [len(r[1]) for r in rules]).astype(np.int64)
    return nodes, weights, offsets


def _edge_geometry(mesh, x):
    """Per-edge perpendicular distance and signed endpoint abscissae.

    For observation points ``x`` (one per triangle, in the triangle's
    plane) returns ``d, s_minus, s_plus`` of shape ``(nt, 3)``.
    """
    v = mesh.vertices[mesh.triangles]
    a = v
    b = np.roll(v, -1, axis=1)
    length = np.linalg.norm(b - a, axis=2, keepdims=True)
    u = (b - a) / length
    m = np.cross(u, mesh.normals[:, None, :])
    rel_a = a - x[:, None, :]
    rel_b = b - x[:, None, :]
    d = np.einsum("tek,tek->te", rel_a, m)
    return d, np.einsum("tek,tek->te", rel_a, u), np.einsum("tek,tek->te", rel_b, u), rel_a, rel_b


def laplace_self_integral(mesh):
    """``int_T dA(y) / |c_T - y|`` for every triangle, evaluated exactly."""
    d, sm, sp, rel_a, rel_b = _edge_geometry(mesh, mesh.centroids)
    rm = np.linalg.norm(rel_a, axis=2)
    rp = np.linalg.norm(rel_b, axis=2)
    return np.sum(d * np.log((sp + rp) / (sm + rm)), axis=1)


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def polar_self_nodes(mesh, n_angle=16):
    """Nodes for radially symmetric integrands over each triangle.

    The triangle is split into three sub-triangles at its centroid. In
    each, with the polar angle ``phi`` measured from the edge's
    perpendicular, the boundary is ``R(phi) = d / cos(phi)``. If
    ``F(R) = int_0^R f(r) r dr`` is known exactly, then
    ``int_T f(|c - y|) dA = sum(weights * F(radii), axis=1)``.

    Returns
    -------
    radii, weights : ndarray, shape (nt, 3 * n_angle)
    """
    d, sm, sp, _, _ = _edge_geometry(mesh, mesh.centroids)
    t, w = _gauss_legendre(n_angle)
    lo = np.arctan2(sm, d)
    hi = np.arctan2(sp, d)
    half = 0.5 * (hi - lo)
    phi = 0.5 * (hi + lo)[..., None] + half[..., None] * t
    radii = d[..., None] / np.cos(phi)
    weights = half[..., None] * w
    nt = mesh.n_triangles
    return radii.reshape(nt, -1), weights.reshape(nt, -1)
