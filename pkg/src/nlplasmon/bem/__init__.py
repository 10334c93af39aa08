"""Boundary elements on closed triangulated surfaces."""
from .mesh import BoundaryDensity, TriMesh, build_icosphere, load_mesh, save_mesh
from .operators import (
    DenseOperator,
    OperatorKind,
    assemble_helmholtz,
    assemble_static,
    dump_operator,
    load_operator,
)
from .pencil import PencilEvaluator, assemble_pencils
from .scattering import FieldSolution, PointDipole, UniformField, external_neumann, solve_scattering

__all__ = [
    "BoundaryDensity",
    "TriMesh",
    "build_icosphere",
    "load_mesh",
    "save_mesh",
    "DenseOperator",
    "OperatorKind",
    "assemble_helmholtz",
    "assemble_static",
    "dump_operator",
    "load_operator",
    "PencilEvaluator",
    "assemble_pencils",
    "FieldSolution",
    "PointDipole",
    "UniformField",
    "external_neumann",
    "solve_scattering",
]
