"""Closed contours in the complex plane with quadrature for ``(1/2 pi i) \\oint f dz``.

Each contour yields nodes ``z_i`` and weights ``w_i`` such that
``sum(w_i f(z_i))`` approximates ``(1 / 2 pi i) \\oint f(z) dz`` taken
counter-clockwise. Ellipses use the trapezoid rule, which converges
geometrically for analytic integrands; rectangles use composite
Gauss-Legendre panels. Trapezoid nodes for ``n`` points are a subset of those for ``2n``
points, which lets a convergence check reuse earlier evaluations.
"""
from dataclasses import dataclass
import math

import numpy as np

from ..errors import ConfigError, DomainError

__all__ = ["Ellipse", "Circle", "Rectangle", "parse_contour", "axis_contour"]


@dataclass(frozen=True)
class Ellipse:
    """Ellipse ``center + a cos(t) + i b sin(t)``.

    Parameters
    ----------
    center : complex
    a, b : float
        Semi-axes along the real and imaginary directions.
    """

    center: complex
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError("semi-axes must be positive")

    nested = True
    # Keeps nodes off the symmetry axes, where poles tend to sit.
    _PHASE = 0.1234

    def nodes(self, n):
        """Trapezoid nodes and weights with ``n`` points."""
        if n < 2:
            raise DomainError("need at least two nodes")
        t = self._PHASE + 2 * math.pi * np.arange(n) / n
        z = self.center + self.a * np.cos(t) + 1j * self.b * np.sin(t)
        dz = -self.a * np.sin(t) + 1j * self.b * np.cos(t)
        # (1 / 2 pi i) * dz/dt * (2 pi / n)
        return z, dz / (1j * n)

    def contains(self, z):
        z = np.asarray(z) - self.center
        return (z.real / self.a) ** 2 + (z.imag / self.b) ** 2 < 1.0

    @property
    def size(self):
        return 2 * max(self.a, self.b)


def Circle(center, radius):
    """A circle as a special ellipse."""
    return Ellipse(complex(center), float(radius), float(radius))


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle with corners ``lo`` (bottom left) and ``hi`` (top right).

    Every side is cut into panels no longer than the short side, and each
    panel carries a Gauss-Legendre rule. A pole at distance ``d`` from a
    side then sits at least ``d`` from a panel of comparable length, so the
    rule converges geometrically even for very thin rectangles.
    """

    lo: complex
    hi: complex

    def __post_init__(self):
        lo, hi = complex(self.lo), complex(self.hi)
        if not (hi.real > lo.real and hi.imag > lo.imag):
            raise DomainError("rectangle needs hi to the upper right of lo")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    nested = False

    def _panels(self):
        lo, hi = self.lo, self.hi
        corners = [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag), lo]
        short = min(hi.real - lo.real, hi.imag - lo.imag)
        out = []
        for a, b in zip(corners[:-1], corners[1:]):
            m = max(1, math.ceil(abs(b - a) / short - 1e-9))
            t = np.linspace(0.0, 1.0, m + 1)
            out.extend((a + (b - a) * t[i], a + (b - a) * t[i + 1]) for i in range(m))
        return out

    def nodes(self, n):
        """About ``n`` nodes, at least 4 per panel."""
        panels = self._panels()
        q = max(4, round(n / len(panels)))
        t, w = np.polynomial.legendre.leggauss(q)
        zs = [0.5 * (a + b) + 0.5 * (b - a) * t for a, b in panels]
        ws = [0.5 * (b - a) * w / (2j * math.pi) for a, b in panels]
        return np.concatenate(zs), np.concatenate(ws)

    def contains(self, z):
        z = np.asarray(z)
        return ((z.real > self.lo.real) & (z.real < self.hi.real)
                & (z.imag > self.lo.imag) & (z.imag < self.hi.imag))

    @property
    def size(self):
        d = self.hi - self.lo
        return max(d.real, d.imag)

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)


def axis_contour(axis, lo, hi, half_width, shape="rectangle"):
    """Thin contour around a segment of the positive real or imaginary axis.

    Parameters
    ----------
    axis : {"imag", "real"}
    lo, hi : float
        Segment ends measured along the axis.
    half_width : float
        Extent perpendicular to the axis.
    shape : {"rectangle", "ellipse"}
        The ellipse circumscribes the same segment with semi-axis
        ``(hi - lo) / 2`` along the axis.
    """
    if not hi > lo:
        raise DomainError("segment needs hi > lo")
    if axis not in ("imag", "real"):
        raise DomainError(f"unknown axis {axis!r}")
    if shape == "rectangle":
        if axis == "imag":
            return Rectangle(complex(-half_width, lo), complex(half_width, hi))
        return Rectangle(complex(lo, -half_width), complex(hi, half_width))
    if shape == "ellipse":
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        if axis == "imag":
            return Ellipse(1j * mid, half_width, half)
        return Ellipse(complex(mid), half, half_width)
    raise DomainError(f"unknown contour shape {shape!r}")


def parse_contour(text, half_width, shape="rectangle"):
    """Parse ``axis:lo:hi`` into a thin contour."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"contour {text!r}: expected axis:lo:hi")
    axis = parts[0].strip()
    try:
        lo, hi = float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ConfigError(f"contour {text!r}: bounds must be numbers") from exc
    try:
        return axis_contour(axis, lo, hi, half_width, shape)
    except DomainError as exc:
        raise ConfigError(f"contour {text!r}: {exc}") from exc
