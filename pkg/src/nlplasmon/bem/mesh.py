"""Closed triangulated surfaces: construction, validation and OFF I/O."""
from dataclasses import dataclass, field
from pathlib import Path
import warnings

import numpy as np

from ..errors import DomainError, MeshError, MeshOrientationWarning

__all__ = ["TriMesh", "build_icosphere", "load_mesh", "save_mesh", "BoundaryDensity"]


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Flat-triangle surface with per-triangle geometry.

    Parameters
    ----------
    vertices : ndarray, shape (nv, 3)
    triangles : ndarray, shape (nt, 3)
        Vertex indices, counter-clockwise seen from outside.
    validate : bool
        Check closedness, orientation consistency, outward normals and
        non-degeneracy.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3 or t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("vertices must be (nv, 3) and triangles (nt, 3)")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise MeshError("triangle references a missing vertex")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        cross = np.cross(p1 - p0, p2 - p0)
        twice = np.linalg.norm(cross, axis=1)
        object.__setattr__(self, "areas", 0.5 * twice)
        with np.errstate(invalid="ignore", divide="ignore"):
            object.__setattr__(self, "normals", cross / twice[:, None])
        object.__setattr__(self, "centroids", (p0 + p1 + p2) / 3.0)
        edges = np.stack([p1 - p0, p2 - p1, p0 - p2], axis=1)
        object.__setattr__(self, "diameters", np.linalg.norm(edges, axis=2).max(axis=1))
        if self.validate:
            self._check()

    @property
    def n_triangles(self):
        return len(self.triangles)

    def signed_volume(self):
        p0 = self.vertices[self.triangles[:, 0]]
        p1 = self.vertices[self.triangles[:, 1]]
        p2 = self.vertices[self.triangles[:, 2]]
        return float(np.einsum("ij,ij->i", p0, np.cross(p1, p2)).sum() / 6.0)

    def _check(self):
        if self.n_triangles == 0:
            raise MeshError("mesh has no triangles")
        if np.any(self.areas <= 1e-12 * self.areas.mean()):
            raise MeshError("mesh has degenerate triangles")
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        undirected = np.sort(directed, axis=1)
        _, counts = np.unique(undirected, axis=0, return_counts=True)
        if np.any(counts == 1):
            raise MeshError(f"surface is not closed: {int(np.sum(counts == 1))} boundary edges")
        if np.any(counts > 2):
            raise MeshError("non-manifold edge shared by more than two triangles")
        _, dcounts = np.unique(directed, axis=0, return_counts=True)
        if np.any(dcounts > 1):
            raise MeshError("inconsistent triangle orientation")
        if self.signed_volume() <= 0:
            raise MeshError("normals point inward (negative signed volume)")

    def flipped(self):
        return TriMesh(self.vertices, self.triangles[:, ::-1], validate=self.validate)


@dataclass(frozen=True, eq=False)
class BoundaryDensity:
    """Piecewise-constant complex density, one value per triangle."""

    coefficients: np.ndarray
    mesh: TriMesh

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (self.mesh.n_triangles,):
            raise DomainError("density length must equal the triangle count")
        object.__setattr__(self, "coefficients", c)

    def integral(self):
        return complex(self.mesh.areas @ self.coefficients)


_PHI = (1.0 + 5.0 ** 0.5) / 2.0
_ICO_VERTS = np.array(
    [
        [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
        [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
        [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
    ],
    dtype=float,
)
_ICO_TRIS = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.int64,
)


def build_icosphere(subdivisions):
    """Unit-sphere triangulation with ``20 * 4**n`` triangles.

    Each level splits every triangle into four at the edge midpoints and
    projects the new vertices onto the sphere.
    """
    if not 0 <= subdivisions <= 6:
        raise DomainError("subdivisions must be in [0, 6]")
    verts = list(_ICO_VERTS / np.linalg.norm(_ICO_VERTS, axis=1, keepdims=True))
    tris = _ICO_TRIS
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        tris = np.array(new, dtype=np.int64)
    return TriMesh(np.array(verts), tris)


def save_mesh(mesh, path):
    """Write an OFF file with full float precision."""
    lines = ["OFF", f"{len(mesh.vertices)} {mesh.n_triangles} 0"]
    lines += [" ".join(format(c, ".17g") for c in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in t) for t in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def load_mesh(path):
    """Read and validate a triangle OFF file.

    A consistently oriented but inward-facing mesh is flipped with a
    `MeshOrientationWarning`.
    """
    tokens = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    try:
        if tokens[0][0] != "OFF":
            raise MeshError(f"{path}: missing OFF header")
        head = tokens[0][1:] or tokens[1]
        body = tokens[1:] if tokens[0][1:] else tokens[2:]
        nv, nf = int(head[0]), int(head[1])
        verts = np.array([[float(c) for c in row[:3]] for row in body[:nv]], dtype=float)
        faces = []
        for row in body[nv: nv + nf]:
            if int(row[0]) != 3:
                raise MeshError(f"{path}: only triangular faces are supported")
            faces.append([int(c) for c in row[1:4]])
        tris = np.array(faces, dtype=np.int64).reshape(-1, 3)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: cannot parse OFF file ({exc})") from exc
    if len(verts) != nv or len(tris) != nf:
        raise MeshError(f"{path}: truncated OFF file")
    mesh = TriMesh(verts, tris, validate=False)
    if mesh.n_triangles and mesh.signed_volume() < 0:
        warnings.warn(f"{path}: inward-facing mesh flipped", MeshOrientationWarning, stacklevel=2)
        mesh = TriMesh(verts, tris[:, ::-1], validate=False)
    mesh._check()
    return mesh
