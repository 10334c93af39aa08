"""Command-line front end producing the TSV data behind the standard plots.

Exit codes: 0 success, 1 configuration error, 2 failed validation check,
3 numerical failure.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from . import sphere_oracle as so
from .errors import ConfigError, NLPlasmonError
from .medium import DrudeParams, drude_eps, z_from_eps
from .tables import SweepTable, format_number

__all__ = ["main", "build_parser", "load_config"]

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3

_SPECTRUM_HELP = """\
Negative part of the sphere spectrum, nonlocal next to local (the
eigenvalue-index plot). For each h writes eps_nonlocal_<h>.tsv and once
eps_local.tsv, both as (index, eps) with eigenvalues repeated 2l+1 times.
With --geometry pointing to an OFF mesh (or icosphere:<n>) the boundary
element pencil is searched with a contour solver along each --contour and
poles_<h>.tsv is written instead. Each segment is enclosed by an ellipse
whose half-width defaults to a quarter of the segment length. The zero at
z = i (eps infinite, carried by the constant density) is not listed."""

_ABSORPTION_HELP = """\
Far-field absorption omega * Im(mu) of a sphere in a uniform field (the
absorption-spectrum plot, defaults h = 0.02, gamma = 0.1). Writes
ffext_nonlocal.tsv and ffext_local.tsv over omega in [0.3, 1.5]."""

_NEARFIELD_HELP = """\
Reflected near field |d(v - v_ext)/dr| at a radial point dipole placed a
distance d outside the unit sphere (the near-field plot panels, d = 0.1,
0.3, 0.5). Writes nfext_nonlocal_<d>.tsv and nfext_local_<d>.tsv over
omega in [0.4, 1.0]."""

_VALIDATE_HELP = """\
Run the built-in consistency checks and write validate_report.tsv with
columns (check, value, threshold, status). Exits with status 2 if any
check fails. --skip-bem restricts the run to the analytic checks."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _float_list(text):
    try:
        out = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc
    if not out:
        raise ConfigError("empty list")
    return out


def _omega(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"omega range {text!r}: expected lo:hi:n")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"omega range {text!r}: bad number") from exc
    if not (0 < lo < hi <= 2) or n < 2:
        raise ConfigError(f"omega range {text!r}: need 0 < lo < hi <= 2 and n >= 2")
    return np.linspace(lo, hi, n)


def _flag(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


# key -> (converter, default); None default means "no value".
_OPTIONS = {
    "h": (_float_list, None),
    "gamma": (float, 0.1),
    "lmax": (int, 60),
    "geometry": (str, "sphere"),
    "contour": (str, None),
    "omega": (_omega, None),
    "d": (_float_list, [0.1, 0.3, 0.5]),
    "out": (str, "."),
    "skip-bem": (_flag, False),
    "perturb-kstar": (float, 0.0),
    "half-width": (float, None),
    "subdivisions": (int, 3),
}


def load_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment.

    Keys are the long flag names without dashes prefix. Returns a dict of
    converted values; errors carry the file name and line number.
    """
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in _OPTIONS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        conv = _OPTIONS[key][0]
        try:
            out[key] = conv(value) if key != "contour" else out.get(key, []) + [value]
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{no}: {key}: {exc}") from exc
    return out


def build_parser():
    p = _Parser(prog="nlplasmon", description="Nonlocal plasmon spectra, absorption and near fields.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value file; command-line flags take precedence")
        sp.add_argument("--out", help="output directory (default: current)")
        sp.add_argument("--gamma", type=float, help="damping gamma / omega_p (default 0.1)")
        sp.add_argument("--lmax", type=int, help="largest spherical degree")
        sp.add_argument("--omega", help="frequency grid lo:hi:n in units of omega_p")
        return sp

    sp = common(sub.add_parser("spectrum", help="sphere or mesh spectrum tables", description=_SPECTRUM_HELP,
                               formatter_class=argparse.RawDescriptionHelpFormatter))
    sp.add_argument("--h", help="comma-separated nonlocal lengths (default 5e-4,1e-2,2e-2,5e-2)")
    sp.add_argument("--geometry", help="'sphere', 'icosphere:<n>' or a path to an OFF mesh")
    sp.add_argument("--contour", action="append", help="axis:lo:hi segment searched for poles (repeatable)")
    sp.add_argument("--half-width", type=float, help="contour extent off the axis (default: segment length / 4)")

    sp = common(sub.add_parser("absorption", help="far-field absorption spectra", description=_ABSORPTION_HELP,
                               formatter_class=argparse.RawDescriptionHelpFormatter))
    sp.add_argument("--h", help="nonlocal length (default 0.02)")
    sp.add_argument("--geometry", help="'sphere', 'icosphere:<n>' or a path to an OFF mesh")

    sp = common(sub.add_parser("nearfield", help="near-field response to a dipole", description=_NEARFIELD_HELP,
                               formatter_class=argparse.RawDescriptionHelpFormatter))
    sp.add_argument("--h", help="nonlocal length (default 0.02)")
    sp.add_argument("--d", help="comma-separated dipole distances from the surface (default 0.1,0.3,0.5)")

    sp = common(sub.add_parser("validate", help="run consistency checks", description=_VALIDATE_HELP,
                               formatter_class=argparse.RawDescriptionHelpFormatter))
    sp.add_argument("--skip-bem", action="store_const", const=True, help="analytic checks only")
    sp.add_argument("--perturb-kstar", type=float, help="add x * I to the K* inside Lambda~ only (negative control)")
    sp.add_argument("--subdivisions", type=int, help="icosphere level for the mesh checks (default 3)")
    return p


def _resolve(args):
    """Merge command line, config file and defaults (in that precedence)."""
    cfg = load_config(args.config) if args.config else {}
    opts = {}
    for key, (conv, default) in _OPTIONS.items():
        attr = key.replace("-", "_")
        given = getattr(args, attr, None)
        if given is not None:
            if key == "contour":
                opts[key] = list(given)
            elif conv in (_float_list, _omega):
                opts[key] = conv(given)
            else:
                opts[key] = given
        elif key in cfg:
            opts[key] = cfg[key]
        else:
            opts[key] = default
    if opts["lmax"] < 1:
        raise ConfigError("lmax must be >= 1")
    if opts["gamma"] < 0:
        raise ConfigError("gamma must be >= 0")
    if opts["h"] is not None and any(not h > 0 for h in opts["h"]):
        raise ConfigError("h must be positive")
    if any(not d > 0 for d in opts["d"]):
        raise ConfigError("d must be positive")
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    opts["out"] = out
    return opts


def _tag(x):
    return format(x, "g")


def _mesh_from_geometry(geometry):
    from .bem import build_icosphere, load_mesh

    if geometry.startswith("icosphere:"):
        try:
            n = int(geometry.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"geometry {geometry!r}: bad subdivision count") from exc
        if not 0 <= n <= 6:
            raise ConfigError("icosphere subdivisions must be in [0, 6]")
        return build_icosphere(n)
    if not Path(geometry).is_file():
        raise ConfigError(f"geometry {geometry!r}: no such mesh file")
    return load_mesh(geometry)


def _single_h(opts, default):
    hs = opts["h"] or [default]
    if len(hs) != 1:
        raise ConfigError("this command takes a single h")
    return hs[0]


def cmd_spectrum(opts):
    hs = opts["h"] or [5e-4, 1e-2, 2e-2, 5e-2]
    out = opts["out"]
    written = []
    if opts["geometry"] == "sphere":
        table = None
        for h in hs:
            table = so.eigenvalue_table(h, opts["lmax"])
            path = out / f"eps_nonlocal_{_tag(h)}.tsv"
            SweepTable(("index", "eps"), table.index, table.eps).write(path)
            written.append(path)
        path = out / "eps_local.tsv"
        SweepTable(("index", "eps"), table.local_index, table.local_eps).write(path)
        written.append(path)
        return written
    from .bem import PencilEvaluator
    from .nep import BeynParams, beyn_solve, parse_contour, write_poles

    mesh = _mesh_from_geometry(opts["geometry"])
    contours = opts["contour"] or ["imag:0.1:2.0"]
    shapes = []
    for text in contours:
        width = opts["half-width"]
        if width is None:
            # Thin ellipses converge slowly under the trapezoid rule.
            thin = parse_contour(text, 1e-12, shape="ellipse")
            width = 0.25 * thin.size
        shapes.append(parse_contour(text, width, shape="ellipse"))
    for h in hs:
        ev = PencilEvaluator(mesh, h)
        poles = []
        for contour in shapes:
            found = beyn_solve(ev, contour, BeynParams(tol_axis=1e-3))
            poles.extend(p for p in found if abs(p.z * p.z + 1) > 1e-8)
        path = out / f"poles_{_tag(h)}.tsv"
        write_poles(poles, path)
        written.append(path)
    return written


def _bem_absorption(mesh, h, params, grid):
    from .bem import PencilEvaluator, UniformField, solve_scattering

    ev = PencilEvaluator(mesh, h)
    field = UniformField()
    vals = []
    for w in grid:
        z = z_from_eps(drude_eps(w, params))
        vals.append(w * solve_scattering(ev, z, field).dipole_moment().imag)
    return SweepTable(("omega_hat", "absorption"), grid, np.array(vals))


def cmd_absorption(opts):
    h = _single_h(opts, 0.02)
    params = DrudeParams(opts["gamma"])
    grid = opts["omega"] if opts["omega"] is not None else np.linspace(0.3, 1.5, 600)
    out = opts["out"]
    if opts["geometry"] == "sphere":
        nonlocal_t = so.absorption_spectrum(h, params, grid)
    else:
        nonlocal_t = _bem_absorption(_mesh_from_geometry(opts["geometry"]), h, params, grid)
    local_t = so.absorption_spectrum(0.0, params, grid)
    paths = [out / "ffext_nonlocal.tsv", out / "ffext_local.tsv"]
    nonlocal_t.write(paths[0])
    local_t.write(paths[1])
    return paths


def cmd_nearfield(opts):
    h = _single_h(opts, 0.02)
    params = DrudeParams(opts["gamma"])
    grid = opts["omega"] if opts["omega"] is not None else np.linspace(0.4, 1.0, 600)
    out = opts["out"]
    paths = []
    for d in opts["d"]:
        for name, hh in (("nonlocal", h), ("local", 0.0)):
            path = out / f"nfext_{name}_{_tag(d)}.tsv"
            so.near_field_response(d, hh, params, grid).write(path)
            paths.append(path)
    return paths


def cmd_validate(opts):
    from .validation import run_checks

    rows = run_checks(skip_bem=opts["skip-bem"], perturb_kstar=opts["perturb-kstar"],
                      subdivisions=opts["subdivisions"])
    lines = ["#check\tvalue\tthreshold\tstatus"]
    for r in rows:
        lines.append(f"{r.name}\t{format_number(r.value)}\t{r.threshold}\t{'pass' if r.passed else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    path = opts["out"] / "validate_report.tsv"
    path.write_bytes(text.encode("ascii"))
    sys.stdout.write(text)
    return [path], all(r.passed for r in rows)


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "absorption": cmd_absorption,
    "nearfield": cmd_nearfield,
    "validate": cmd_validate,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        opts = _resolve(args)
        result = _COMMANDS[args.command](opts)
    except ConfigError as exc:
        print(f"nlplasmon: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NLPlasmonError, ZeroDivisionError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"nlplasmon: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.command == "validate":
        _, ok = result
        return EXIT_OK if ok else EXIT_VALIDATION
    for path in result:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
