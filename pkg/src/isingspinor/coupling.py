"""The square-lattice dimer coupling function and the full-plane discrete spinor.

``c0(x, y)`` is the coupling ``C(0, x + iy)`` of the square lattice, given
by the double integral

    (1 / 4 pi^2) ∬ exp(i (x θ - y φ)) / (2i sin θ + 2 sin φ) dθ dφ

over ``[0, 2π]^2``.  Both evaluation routes integrate one variable out by
residues and leave a smooth one-dimensional integral for Gauss-Legendre:

* primary: the θ-integral is done by residues, leaving a real integral
  over φ in ``[0, π/2]`` after folding the symmetries;
* fallback: the φ-integral is done by residues, leaving an integral over
  θ split at the two points where the contour poles swap.

The full-plane spinor combines four couplings around the source.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
import threading
from dataclasses import dataclass

import numpy as np

from .lattice import EdgeLine, Point, edge_line

ETA = cmath.exp(1j * math.pi / 8)
COS8 = math.cos(math.pi / 8)
SIN8 = math.sin(math.pi / 8)
SOURCE_VALUE = (2.0 + math.sqrt(2.0)) / 4.0
R0 = 40.0
REFINE_TOL = 1e-9

_INV_PI = 1.0 / math.pi
# C(0, x + iy) for |x + iy| <= sqrt 5, in closed form
EXACT_TABLE: dict[Point, complex] = {
    (1, 0): 0.25,
    (-1, 0): -0.25,
    (0, 1): -0.25j,
    (0, -1): 0.25j,
    (1, 2): _INV_PI - 0.25,
    (1, -2): _INV_PI - 0.25,
    (-1, 2): 0.25 - _INV_PI,
    (-1, -2): 0.25 - _INV_PI,
    (2, 1): -1j * (_INV_PI - 0.25),
    (-2, 1): -1j * (_INV_PI - 0.25),
    (2, -1): 1j * (_INV_PI - 0.25),
    (-2, -1): 1j * (_INV_PI - 0.25),
}


class QuadratureError(RuntimeError):
    """Successive quadrature refinements disagree."""


class ParityError(ValueError):
    pass


def _nodes(n: int, lo: float, hi: float):
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (t + 1.0), half * w


def _default_order(x: int, y: int) -> int:
    return 40 + 2 * (abs(x) + abs(y))


def _c0_phi(x: int, y: int, n: int) -> complex:
    phi, w = _nodes(n, 0.0, 0.5 * math.pi)
    s = np.sin(phi)
    t = np.sqrt(1.0 + s * s)
    h = (t - s) ** abs(x) / (2.0 * t)
    sign = 1.0 if x >= 0 else (-1.0) ** abs(x)
    if y % 2 == 0:
        return complex(2.0 / math.pi * sign * np.dot(w, h * np.cos(y * phi)))
    return -1j * (2.0 / math.pi * sign * np.dot(w, h * np.sin(y * phi)))


def _c0_theta(x: int, y: int, n: int) -> complex:
    total = 0j
    for lo, hi in ((0.0, math.pi), (math.pi, 2.0 * math.pi)):
        theta, w = _nodes(n, lo, hi)
        s = np.sin(theta)
        t = np.sqrt(1.0 + s * s)
        # roots of w^2 - 2 s w - 1; pick the one inside the unit circle
        roots = np.stack([s + t, s - t])
        inside = np.argmin(np.abs(roots), axis=0)
        w_in = roots[inside, np.arange(n)]
        w_out = roots[1 - inside, np.arange(n)]
        if y >= 0:
            inner = -2j * math.pi * w_out ** (-float(y)) / (w_out - w_in)
        else:
            inner = 2j * math.pi * w_in ** (-float(y)) / (w_in - w_out)
        total += np.dot(w, np.exp(1j * x * theta) * inner)
    return complex(total / (4.0 * math.pi**2))


_ROUTES = {"quadrature": _c0_phi, "fallback": _c0_theta}


def _refined(route, x: int, y: int, order: int | None) -> complex:
    n = order or _default_order(x, y)
    v1 = route(x, y, n)
    v2 = route(x, y, 2 * n)
    if abs(v1 - v2) > REFINE_TOL:
        raise QuadratureError(f"c0({x}, {y}): refinements differ by {abs(v1 - v2):.3e}")
    return _purify(x, y, v2)


def _purify(x: int, y: int, v: complex) -> complex:
    # odd x: real, odd y: imaginary; the dropped part is quadrature noise
    return complex(v.real, 0.0) if x % 2 else complex(0.0, v.imag)


def c0_quadrature(x: int, y: int, order: int | None = None) -> complex:
    """C(0, x + iy) by residues in θ then Gauss-Legendre in φ."""
    if (x + y) % 2 == 0:
        return 0j
    return _refined(_c0_phi, x, y, order)


def c0_fallback(x: int, y: int, order: int | None = None) -> complex:
    """C(0, x + iy) by residues in φ then Gauss-Legendre in θ."""
    if (x + y) % 2 == 0:
        return 0j
    return _refined(_c0_theta, x, y, order)


def c0_leakage(x: int, y: int, order: int | None = None, route: str = "quadrature") -> float:
    """Size of the component that should vanish by parity (before purification)."""
    if (x + y) % 2 == 0:
        return 0.0
    v = _ROUTES[route](x, y, order or _default_order(x, y))
    return abs(v.imag) if x % 2 else abs(v.real)


def c0_asymptotic(x: int, y: int) -> complex:
    """Leading large-|z| behaviour: Re(1/(πz)) for odd x, i Im(1/(πz)) for odd y."""
    if (x + y) % 2 == 0:
        raise ParityError(f"C vanishes at ({x}, {y}); no asymptotic form")
    inv = 1.0 / (math.pi * complex(x, y))
    return complex(inv.real, 0.0) if x % 2 else complex(0.0, inv.imag)


class CouplingEvaluator:
    """Cached coupling values; quadrature below ``r0``, asymptotics beyond.

    Reads are lock-free; inserts take a lock so concurrent callers agree on
    a single stored value.
    """

    def __init__(self, order: int | None = None, r0: float = R0, route: str = "quadrature"):
        if route not in _ROUTES:
            raise ValueError(f"unknown route {route!r}")
        self.order = order
        self.r0 = float(r0)
        self.route = route
        self._cache: dict[Point, tuple[complex, str]] = {}
        self._lock = threading.Lock()

    def method(self, x: int, y: int) -> str:
        if (x + y) % 2 == 0 or (x, y) in EXACT_TABLE:
            return "exact"
        return "asymptotic" if math.hypot(x, y) >= self.r0 else "quadrature"

    def lookup(self, x: int, y: int) -> tuple[complex, str]:
        key = (int(x), int(y))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        m = self.method(*key)
        if m == "exact":
            v = EXACT_TABLE.get(key, 0j)
        elif m == "asymptotic":
            v = c0_asymptotic(*key)
        else:
            v = _refined(_ROUTES[self.route], key[0], key[1], self.order)
        with self._lock:
            return self._cache.setdefault(key, (v, m))

    def __call__(self, x: int, y: int) -> complex:
        return self.lookup(x, y)[0]

    def cache_size(self) -> int:
        return len(self._cache)

    def table_csv(self, points) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "y", "re", "im", "method"])
        for x, y in points:
            v, m = self.lookup(x, y)
            wr.writerow([x, y, repr(v.real), repr(v.imag), m])
        return buf.getvalue()


_DEFAULT = CouplingEvaluator()


def c0(x: int, y: int, evaluator: CouplingEvaluator | None = None) -> complex:
    """C(0, x + iy); zero when ``x + y`` is even."""
    if evaluator is None:
        if (x + y) % 2 == 0:
            return 0j
        return c0_quadrature(x, y)
    return evaluator(x, y)


# -- full-plane spinor -------------------------------------------------------


def _check_displacement(d: Point):
    if d[0] % 2 == 0 and d[1] % 2 == 0:
        return
    if d[0] % 2 and d[1] % 2:
        return
    raise ValueError(f"displacement {d} does not join a horizontal midpoint to a medial vertex")


def g1(d: Point, ev=None) -> complex:
    """First s-holomorphic building block at doubled displacement ``d``."""
    cc = ev or _DEFAULT
    return ETA * (cc(d[0] - 1, d[1]) + cc(d[0], d[1] + 1))


def g2(d: Point, ev=None) -> complex:
    cc = ev or _DEFAULT
    return 1j * ETA * (cc(d[0] + 1, d[1]) + cc(d[0], d[1] - 1))


def full_plane_spinor_displacement(d: Point, ev: CouplingEvaluator | None = None) -> complex:
    """Full-plane spinor at doubled displacement ``d = 2 (z - a) / mesh``.

    Equal to ``cos(π/8) g1 - sin(π/8) g2``; scale-free, so the value at mesh
    ``δ`` is this number itself and ``value / δ`` tends to ``1/(2π(z - a))``.
    """
    d = (int(d[0]), int(d[1]))
    if d == (0, 0):
        return complex(SOURCE_VALUE)
    _check_displacement(d)
    return COS8 * g1(d, ev) - SIN8 * g2(d, ev)


def full_plane_spinor(a: complex, z: complex, mesh: float, ev: CouplingEvaluator | None = None) -> complex:
    """Full-plane spinor for complex positions ``a``, ``z`` on the mesh grid."""
    dz = 2.0 * (complex(z) - complex(a)) / mesh
    d = (round(dz.real), round(dz.imag))
    if abs(dz - complex(*d)) > 1e-6:
        raise ValueError("z - a is not a lattice displacement of this mesh")
    return full_plane_spinor_displacement(d, ev)


def closed_form_near_source(which: complex) -> complex:
    """Closed-form spinor value at the diagonal neighbour ``a + which * mesh / 2``."""
    c, s, pi = COS8, SIN8, math.pi
    if which == 1 + 1j:
        v = ETA * (c * (2 / pi - (1 + 1j) / 2) - 1j * s * (-2j / pi + (1 + 1j) / 2))
    elif which == -1 - 1j:
        v = ETA * (c * (2j / pi - (1 + 1j) / 2) + 1j * s * (2 / pi - (1 + 1j) / 2))
    else:
        raise ValueError("closed forms are tabulated for 1+i and -1-i")
    return 0.5 * v


def source_lines(a: Point = (1, 0)) -> dict[Point, EdgeLine]:
    """Lines of the four medial edges at the source, keyed by diagonal offset."""
    return {o: edge_line(a, (a[0] + o[0], a[1] + o[1])) for o in ((1, 1), (1, -1), (-1, 1), (-1, -1))}


def singularity_residuals(values: dict[Point, complex], f_source: complex = SOURCE_VALUE) -> dict[Point, complex]:
    """Defects of the four projection relations at the source.

    ``values`` maps the diagonal offsets ``(±1, ±1)`` to spinor values.
    East neighbours must match ``f(a)``, west neighbours ``f(a) - 1``.
    """
    out = {}
    for o, line in source_lines().items():
        ref = f_source if o[0] > 0 else f_source - 1.0
        out[o] = complex(line.project(values[o]) - line.project(ref))
    return out


def check_full_plane_singularity(mesh: float = 1.0, ev: CouplingEvaluator | None = None) -> float:
    """Largest defect of the source projection relations, using quadrature values."""
    vals = {o: full_plane_spinor_displacement(o, ev or CouplingEvaluator(r0=math.inf)) for o in source_lines()}
    return max(abs(r) for r in singularity_residuals(vals).values())


def check_full_plane_singularity_exact() -> list:
    """The same relations with the tabulated closed forms, simplified symbolically."""
    import sympy as sp

    pi = sp.pi
    eta = sp.exp(sp.I * pi / 8)
    c, s = sp.cos(pi / 8), sp.sin(pi / 8)
    k = 1 / pi - sp.Rational(1, 4)
    table = {
        (1, 0): sp.Rational(1, 4), (-1, 0): -sp.Rational(1, 4),
        (0, 1): -sp.I / 4, (0, -1): sp.I / 4,
        (1, 2): k, (1, -2): k, (-1, 2): -k, (-1, -2): -k,
        (2, 1): -sp.I * k, (-2, 1): -sp.I * k, (2, -1): sp.I * k, (-2, -1): sp.I * k,
    }

    def f(d):
        x, y = d
        return c * eta * (table[(x - 1, y)] + table[(x, y + 1)]) + s * sp.conjugate(eta) ** 3 * (
            table[(x + 1, y)] + table[(x, y - 1)]
        )

    src = (2 + sp.sqrt(2)) / 4
    out = []
    for o in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        # line (d - v)^(-1/2) R for the medial edge from a to a + o
        e2 = sp.sqrt(2) / 2 * (-o[0] - sp.I * o[1])
        proj = lambda z: (z + e2 * sp.conjugate(z)) / 2  # noqa: E731
        ref = src if o[0] > 0 else src - 1
        r = proj(f(o)) - proj(ref)
        out.append(sp.simplify(sp.expand_complex(sp.expand(r))))
    return out


def s_holomorphicity_residual(func, m1: Point, m2: Point, a: Point = (1, 0)) -> float:
    """``|P_l[func(m1 - a)] - P_l[func(m2 - a)]|`` on the medial edge ``m1 m2``.

    ``func`` takes doubled displacements from the source ``a``.
    """
    line = edge_line(m1, m2)
    d1 = (m1[0] - a[0], m1[1] - a[1])
    d2 = (m2[0] - a[0], m2[1] - a[1])
    return abs(line.project(func(d1)) - line.project(func(d2)))


def dbar_coupling(x: int, y: int, ev=None) -> complex:
    """Discrete dbar of the coupling at a site with ``x + y`` even; 1 at the origin, else 0."""
    cc = ev or _DEFAULT
    return cc(x + 1, y) - cc(x - 1, y) + 1j * (cc(x, y + 1) - cc(x, y - 1))


@dataclass(frozen=True)
class FullPlaneSpinor:
    """Full-plane spinor with source ``a`` on the mesh-``mesh`` grid."""

    mesh: float
    a: complex = 0.5

    def __call__(self, z: complex, ev: CouplingEvaluator | None = None) -> complex:
        return full_plane_spinor(self.a, z, self.mesh, ev)

    def at(self, d: Point, ev: CouplingEvaluator | None = None) -> complex:
        return full_plane_spinor_displacement(d, ev)
