"""Self-checks run by ``nlplasmon validate``.

Each check returns a `CheckResult` with the measured value, a readable
threshold and a pass flag. The analytic checks take a few seconds; the mesh
checks assemble boundary-element operators on an icosphere.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import sphere_oracle as so
from .medium import DrudeParams, z_from_eps
from .specfun import sph_bessel_j, sph_hankel1

__all__ = ["CheckResult", "run_checks", "analytic_checks", "mesh_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: str
    passed: bool


def _below(name, value, limit):
    return CheckResult(name, float(value), f"< {limit:g}", bool(value < limit))


def _within(name, value, lo, hi):
    return CheckResult(name, float(value), f"[{lo:g}, {hi:g}]", bool(lo <= value <= hi))


def _wronskian():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        r = rng.uniform(0.1, 50.0)
        x = r * np.exp(1j * rng.uniform(0, np.pi / 2))
        ell = int(rng.integers(0, 21))
        j = sph_bessel_j(ell, x)
        hk = sph_hankel1(ell, x)
        w = j.j * hk.hp - j.jp * hk.h
        worst = max(worst, abs(w - 1j / x ** 2) / abs(1 / x ** 2))
    return worst


def _rates():
    hs = [0.1 / 2 ** i for i in range(4)]
    s_lo, k_lo, k_hi = math.inf, math.inf, -math.inf
    for ell in (0, 1, 2):
        res = so.asymptotic_residual(ell, 1j, hs)
        for a, b in zip(res[:-1], res[1:]):
            # For l = 0 the single-layer error is exponentially small in 1/h
            # and sits at roundoff, where the ratio carries no information.
            if b[1] > 1e-15:
                s_lo = min(s_lo, a[1] / b[1])
            k_lo, k_hi = min(k_lo, a[2] / b[2]), max(k_hi, a[2] / b[2])
    return s_lo, k_lo, k_hi


def _perturbation_band():
    worst = 0.0
    for ell in (1, 2, 3):
        vals = []
        for h in (0.01, 0.005, 0.0025):
            eps = so.surface_root(ell, h).eps_root.real
            vals.append(abs(eps - so.perturbation_shift(ell, h)) / h ** 2)
        worst = max(worst, max(vals) / min(vals))
    return worst


def _counts():
    return [so.eigenvalue_table(h, 1200).count_ell for h in (5e-4, 1e-2, 2e-2, 5e-2)]


def _peak(table):
    return table.abscissa[int(np.argmax(table.column("absorption")))]


def _sphere_beyn():
    from .nep import BeynParams, FunctionPencil, axis_contour, beyn_solve

    h = 0.05
    pencil = FunctionPencil(lambda z: np.diag([so.lambda_ell(ell, z, h) for ell in range(1, 5)]))
    poles = beyn_solve(pencil, axis_contour("imag", 0.1, 2.0, 0.05), BeynParams(probe_cols=4))
    ref = [so.surface_root(ell, h).z_root for ell in range(1, 5)]
    if len(poles) != len(ref):
        return math.inf
    return max(min(abs(p.z - r) for p in poles) for r in ref)


def analytic_checks():
    out = [_below("wronskian_rel_error", _wronskian(), 1e-10)]
    s_lo, k_lo, k_hi = _rates()
    # The single-layer remainder decays faster than the quadratic rate the
    # asymptotics guarantee, so only the lower bound is checked here.
    out.append(CheckResult("small_h_single_layer_rate", s_lo, ">= 3.5", bool(s_lo >= 3.5)))
    out.append(_within("small_h_double_layer_rate_min", k_lo, 1.8, 2.2))
    out.append(_within("small_h_double_layer_rate_max", k_hi, 1.8, 2.2))
    out.append(_below("perturbation_band_ratio", _perturbation_band(), 3.0))
    counts = _counts()
    decreasing = all(a > b for a, b in zip(counts[:-1], counts[1:]))
    out.append(CheckResult("surface_mode_counts_decreasing", float(counts[-1]),
                           "strictly decreasing in h", decreasing))
    grid = np.linspace(0.3, 1.5, 2401)
    local_peak = _peak(so.absorption_spectrum(0.0, DrudeParams(0.01), grid))
    out.append(_below("local_dipole_peak_offset", abs(local_peak - 1 / math.sqrt(3)), 2e-3))
    shift = _peak(so.absorption_spectrum(0.02, DrudeParams(0.1), grid)) - \
        _peak(so.absorption_spectrum(0.0, DrudeParams(0.1), grid))
    out.append(CheckResult("nonlocal_blue_shift", float(shift), "> 0", bool(shift > 0)))
    out.append(_below("sphere_contour_roots", _sphere_beyn(), 1e-10))
    return out


def mesh_checks(subdivisions=3, perturb_kstar=0.0):
    from .bem import PencilEvaluator, UniformField, assemble_pencils, build_icosphere, solve_scattering
    from .nep import BeynParams, axis_contour, beyn_solve

    out = []
    mesh = build_icosphere(subdivisions)
    ev = PencilEvaluator(mesh, 0.05, kstar_shift=perturb_kstar)
    lam = np.sort(np.linalg.eigvals(ev.Kstar).real)[::-1]
    err = max(min(abs(lam - 1 / (2 * (2 * ell + 1)))) for ell in range(4))
    out.append(_below("kstar_symbols", err, 2e-2))
    out.append(_below("kstar_spectral_bound", max(lam.max() - 0.5, -0.5 - lam.min(), 0.0), 2e-2))
    out.append(_below("annihilation", np.linalg.norm(ev.W @ ev.ones) / np.linalg.norm(ev.ones), 2e-2))
    small = build_icosphere(min(subdivisions, 2))
    ev_small = PencilEvaluator(small, 0.05, kstar_shift=perturb_kstar)
    worst = 0.0
    for z in (0.5 + 0.5j, 1.2j, 0.3 + 1.1j):
        full, tilde = assemble_pencils(ev_small, z)
        worst = max(worst, np.linalg.norm(z * z * tilde.matrix - full.matrix) / np.linalg.norm(full.matrix))
    out.append(_below("pencil_identity", worst, 1e-10))
    poles = beyn_solve(ev_small, axis_contour("imag", 0.745, 0.835, 0.03, "ellipse"),
                       BeynParams(tol_axis=1e-3, max_newton=3))
    target = so.surface_root(1, 0.05).z_root
    dist = min((abs(p.z - target) for p in poles), default=math.inf)
    out.append(_below("contour_dipole_pole", dist, 5e-2))
    ev_local = PencilEvaluator(mesh, 1e-3, kstar_shift=perturb_kstar)
    mu = solve_scattering(ev_local, z_from_eps(4.0), UniformField()).dipole_moment()
    out.append(_below("clausius_mossotti", abs(mu - 0.5), 3e-2))
    return out


def run_checks(skip_bem=False, perturb_kstar=0.0, subdivisions=3):
    """All analytic checks, plus the mesh checks unless ``skip_bem``."""
    rows = analytic_checks()
    if not skip_bem:
        rows.extend(mesh_checks(subdivisions, perturb_kstar))
    return rows
