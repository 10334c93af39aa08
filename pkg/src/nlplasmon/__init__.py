"""Nonlocal (hydrodynamic) plasmon resonances of metallic particles.

Subpackages and modules:

``specfun``
    Spherical Bessel and Hankel functions for complex arguments.
``medium``
    Drude permittivity and the map between ``eps`` and the spectral
    parameter ``z``.
``sphere_oracle``
    Closed-form spectra, scattering coefficients and observables of a sphere.
``bem``
    Boundary-element layer operators and the nonlinear pencils on triangle
    meshes, plus driven scattering solves.
``nep``
    Contour eigensolver, pole classification and modal expansion.
``cli``
    The ``nlplasmon`` command.

Heavy submodules (``bem``, ``nep``, ``cli``) are imported on demand.
"""
from . import medium, specfun, sphere_oracle
from .errors import (
    ConfigError,
    ContourError,
    ConvergenceError,
    DomainError,
    HypothesisError,
    InconclusiveRankError,
    MeshError,
    MeshOrientationWarning,
    NLPlasmonError,
    NonSimplePoleError,
    ResonanceError,
    SingularityError,
    TruncationWarning,
)
from .kinds import ModeKind
from .medium import DrudeParams, drude_eps, eps_from_z, z_from_eps
from .tables import SweepTable

__version__ = "0.1.0"

__all__ = [
    "medium",
    "specfun",
    "sphere_oracle",
    "ModeKind",
    "DrudeParams",
    "drude_eps",
    "eps_from_z",
    "z_from_eps",
    "SweepTable",
    "ConfigError",
    "ContourError",
    "ConvergenceError",
    "DomainError",
    "HypothesisError",
    "InconclusiveRankError",
    "MeshError",
    "MeshOrientationWarning",
    "NLPlasmonError",
    "NonSimplePoleError",
    "ResonanceError",
    "SingularityError",
    "TruncationWarning",
]
