"""Exact enumeration of contour configurations on tiny domains.

Exponential-time oracle: partition functions of the low-temperature
expansion, the high-temperature two-point function, and the discrete
fermionic spinor summed over configurations with two half-edges.
Everything here is brute force on purpose and independent of the linear
solver in :mod:`isingspinor.spinor`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import cmath
from math import log, sqrt

import numpy as np

from .exact import QSqrt2, SQRT2_EXACT, eval_alpha_poly
from .lattice import DiscreteDomain, Point, is_horizontal_midpoint

ALPHA = sqrt(2.0) - 1.0
BETA_C = 0.5 * log(sqrt(2.0) + 1.0)
ENUMERATION_CAP = 20

# exp(-i k pi / 4) for a winding of k quarter turns
_PHASES = tuple(cmath.exp(-1j * k * cmath.pi / 4) for k in range(8))


class EnumerationCapError(ValueError):
    pass


class WindingError(RuntimeError):
    """Two admissible walks on one configuration disagree modulo 4 pi."""


Edge = tuple[Point, Point]


@dataclass(frozen=True)
class ContourConfig:
    edges: frozenset

    @property
    def size(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class SpinorConfig:
    """Edges plus two half-edges: ``[a, a_vertex]`` and ``[z_vertex, z]``.

    ``a``/``z`` are doubled medial coordinates; ``a_vertex``/``z_vertex``
    are grid indices of the primal endpoints the half-edges attach to.
    """

    edges: frozenset
    a: Point
    z: Point
    a_vertex: Point
    z_vertex: Point

    @property
    def size(self) -> int:
        """Edge count with both half-edges contributing one half."""
        return len(self.edges) + 1

    @property
    def doubled_size(self) -> int:
        return 2 * len(self.edges) + 2


class SubsetTable:
    """Odd-degree vertex sets and sizes of every subset of a domain's edges."""

    def __init__(self, domain: DiscreteDomain, cap: int = ENUMERATION_CAP):
        m = len(domain.edges)
        if m > cap:
            raise EnumerationCapError(f"{m} edges exceeds the enumeration cap {cap}")
        if len(domain.vertices) > 63:
            raise EnumerationCapError("too many vertices for bitmask enumeration")
        self.domain = domain
        self.edges: tuple[Edge, ...] = domain.edges
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        self.vertex_bit = {v: np.uint64(1) << np.uint64(i) for i, v in enumerate(domain.vertices)}
        odd = np.zeros(1, dtype=np.uint64)
        size = np.zeros(1, dtype=np.int64)
        for u, w in self.edges:
            eb = self.vertex_bit[u] | self.vertex_bit[w]
            odd = np.concatenate([odd, odd ^ eb])
            size = np.concatenate([size, size + 1])
        self.odd = odd
        self.size = size
        self.masks = np.arange(1 << m, dtype=np.int64)

    def edges_of(self, mask: int) -> frozenset:
        return frozenset(e for i, e in enumerate(self.edges) if (mask >> i) & 1)

    def select(self, odd_set: np.uint64, exclude: int = 0) -> np.ndarray:
        sel = self.odd == odd_set
        if exclude:
            sel &= (self.masks & exclude) == 0
        return self.masks[sel]

    @cached_property
    def even(self) -> np.ndarray:
        return self.select(np.uint64(0))

    def bit(self, e: Edge) -> int:
        return 1 << self.edge_index[e]


def _table(domain, cap) -> SubsetTable:
    return domain if isinstance(domain, SubsetTable) else SubsetTable(domain, cap)


def enumerate_even_subsets(domain: DiscreteDomain, cap: int = ENUMERATION_CAP) -> list[ContourConfig]:
    t = _table(domain, cap)
    return [ContourConfig(t.edges_of(int(s))) for s in t.even]


def _horizontal_edge(domain: DiscreteDomain, e) -> Edge:
    """Accept an edge as a vertex pair or as the doubled midpoint of a horizontal edge."""
    if isinstance(e[0], tuple):
        return tuple(sorted(e))
    return domain.edge_of(e)


def partition_polynomials(domain, e, cap: int = ENUMERATION_CAP):
    """Integer coefficients (in powers of alpha) of Z, Z+ and Z- for edge ``e``."""
    t = _table(domain, cap)
    e = _horizontal_edge(t.domain, e)
    b = t.bit(e)
    even = t.even
    sizes = t.size[even]
    has = (even & b) != 0
    n = len(t.edges) + 1
    z = np.bincount(sizes, minlength=n)
    zminus = np.bincount(sizes[has], minlength=n)
    return z, z - zminus, zminus


def _eval(coeffs, alpha=ALPHA, shift=0) -> float:
    return float(sum(int(c) * alpha ** (k + shift) for k, c in enumerate(coeffs) if c))


def partition_functions(domain, e, cap: int = ENUMERATION_CAP) -> tuple[float, float, float]:
    """(Z, Z+, Z-): sums of alpha^|w| over even subsets, all / without e / with e."""
    z, zp, zm = partition_polynomials(domain, e, cap)
    return _eval(z), _eval(zp), _eval(zm)


def partition_functions_exact(domain, e, cap: int = ENUMERATION_CAP) -> tuple[QSqrt2, QSqrt2, QSqrt2]:
    z, zp, zm = partition_polynomials(domain, e, cap)
    return eval_alpha_poly(z), eval_alpha_poly(zp), eval_alpha_poly(zm)


def oracle_energy_plus_exact(domain, e, cap: int = ENUMERATION_CAP) -> QSqrt2:
    z, zp, _ = partition_functions_exact(domain, e, cap)
    return 2 * zp / z - (2 + SQRT2_EXACT) / 2


def oracle_energy_plus(domain, e, cap: int = ENUMERATION_CAP) -> float:
    """Plus-boundary energy density at edge ``e``: ``2 Z+/Z - (2 + sqrt 2)/2``."""
    z, zp, _ = partition_functions(domain, e, cap)
    return 2.0 * zp / z - (2.0 + sqrt(2.0)) / 2.0


def oracle_energy_free(domain, e, cap: int = ENUMERATION_CAP) -> float:
    return -oracle_energy_plus(domain, e, cap)


# -- high temperature --------------------------------------------------------


def high_temp_polynomial(domain, z1: Point, z2: Point, cap: int = ENUMERATION_CAP):
    """Counts by size of edge sets odd exactly at grid vertices ``z1`` and ``z2``."""
    t = _table(domain, cap)
    target = t.vertex_bit[z1] ^ t.vertex_bit[z2]
    sel = t.select(target)
    return np.bincount(t.size[sel], minlength=len(t.edges) + 1)


def high_temp_correlation(domain, z1: Point, z2: Point, cap: int = ENUMERATION_CAP) -> float:
    """Free-boundary spin correlation of ``z1``, ``z2`` by the high-temperature expansion."""
    t = _table(domain, cap)
    num = high_temp_polynomial(t, z1, z2)
    den = np.bincount(t.size[t.even], minlength=len(t.edges) + 1)
    return _eval(num) / _eval(den)


def high_temp_correlation_exact(domain, z1: Point, z2: Point, cap: int = ENUMERATION_CAP) -> QSqrt2:
    t = _table(domain, cap)
    num = high_temp_polynomial(t, z1, z2)
    den = np.bincount(t.size[t.even], minlength=len(t.edges) + 1)
    return eval_alpha_poly(num) / eval_alpha_poly(den)


def free_energy_high_temp_exact(domain, e, cap: int = ENUMERATION_CAP) -> QSqrt2:
    u, w = _horizontal_edge(domain if not isinstance(domain, SubsetTable) else domain.domain, e)
    return high_temp_correlation_exact(domain, u, w, cap) - SQRT2_EXACT / 2


# -- low temperature bijection ------------------------------------------------


def low_temp_bijection_check(domain: DiscreteDomain, cap: int = ENUMERATION_CAP, tol: float = 1e-12) -> bool:
    """Plus-boundary dual spin states map bijectively onto even subsets with weight alpha^|w|."""
    t = SubsetTable(domain, cap)
    dual = domain.dual_vertices
    n = len(dual)
    if n > cap:
        raise EnumerationCapError(f"{n} dual spins exceeds the enumeration cap {cap}")
    index = {d: i for i, d in enumerate(dual)}
    states = np.arange(1 << n, dtype=np.int64)
    # spin bit 1 means -1; squares outside the domain are frozen at +1
    def bit(d):
        i = index.get(d)
        return np.zeros_like(states) if i is None else (states >> i) & 1

    omega = np.zeros_like(states)
    energy = np.zeros(len(states), dtype=float)  # sum of sigma sigma over dual edges
    for k, e in enumerate(t.edges):
        d1, d2 = domain.dual_of(e)
        differ = bit(d1) ^ bit(d2)
        omega |= differ << k
        energy += 1.0 - 2.0 * differ
    if np.any(t.odd[omega] != 0):
        return False
    if len(np.unique(omega)) != len(states) or len(states) != len(t.even):
        return False
    if set(np.unique(omega).tolist()) != set(t.even.tolist()):
        return False
    logw = BETA_C * energy - t.size[omega] * log(ALPHA)
    return bool(np.ptp(logw) <= tol * max(1.0, abs(logw).max()))


# -- spinor configurations and windings --------------------------------------


def _half_vertex_a(a: Point) -> Point:
    return ((a[0] + 1) // 2, a[1] // 2)


def _z_vertices(domain: DiscreteDomain, z: Point) -> list[Point]:
    u, w = domain.edge_of(z)
    return [v for v in (u, w) if v in domain.vertex_set]


def _check_source(domain: DiscreteDomain, a: Point):
    if not domain.is_interior_horizontal(a):
        raise ValueError(f"{a} is not the midpoint of a horizontal edge of the domain")


def enumerate_spinor_configs(domain, a: Point, z: Point, cap: int = ENUMERATION_CAP) -> list[SpinorConfig]:
    """All configurations of C(a, z), every parity-consistent half-edge at ``z`` included."""
    t = _table(domain, cap)
    dom = t.domain
    _check_source(dom, a)
    if z == a:
        raise ValueError("z must differ from a")
    if z not in dom.medial_index:
        raise ValueError(f"{z} is not a medial vertex of the domain")
    e1 = dom.edge_of(a)
    excl = t.bit(e1)
    e2 = dom.edge_of(z)
    if e2 in t.edge_index:
        excl |= t.bit(e2)
    av = _half_vertex_a(a)
    out = []
    for zv in _z_vertices(dom, z):
        target = t.vertex_bit[av] ^ t.vertex_bit[zv]
        for s in t.select(target, excl):
            out.append(SpinorConfig(t.edges_of(int(s)), a, z, av, zv))
    return out


def _incidence(config: SpinorConfig):
    """Per grid vertex: list of (direction, element) pairs of the configuration."""
    inc: dict[Point, list] = {}

    def add(v, d, el):
        inc.setdefault(v, []).append((d, el))

    for e in config.edges:
        u, w = e
        d = (w[0] - u[0], w[1] - u[1])
        add(u, d, e)
        add(w, (-d[0], -d[1]), e)
    av, zv = config.a_vertex, config.z_vertex
    add(av, (config.a[0] - 2 * av[0], config.a[1] - 2 * av[1]), "a")
    add(zv, (config.z[0] - 2 * zv[0], config.z[1] - 2 * zv[1]), "z")
    return inc


def _turn(heading: Point, d: Point) -> int:
    if d == heading:
        return 0
    if d == (-heading[1], heading[0]):
        return 1
    if d == (heading[1], -heading[0]):
        return -1
    raise WindingError("walk reverses along itself")


def admissible_windings(config: SpinorConfig, limit: int | None = None) -> list[int]:
    """Windings (in quarter turns, not reduced) of all admissible walks from a to z."""
    inc = _incidence(config)
    out: list[int] = []

    def walk(v, heading, used, k):
        if limit is not None and len(out) >= limit:
            return
        opts = [(d, el) for d, el in inc[v] if el not in used]
        if len(inc[v]) == 4:
            opts = [(d, el) for d, el in opts if d != heading]
        for d, el in opts:
            k2 = k + _turn(heading, d)
            if el == "z":
                out.append(k2)
                continue
            if el == "a":
                raise WindingError("walk returned to a")
            u, w = el
            nxt = w if u == v else u
            walk(nxt, d, used | {el}, k2)

    av = config.a_vertex
    walk(av, (2 * av[0] - config.a[0], 2 * av[1] - config.a[1]), frozenset({"a"}), 0)
    return out


def winding(config: SpinorConfig) -> int:
    """Winding of one admissible walk, in quarter turns modulo 8."""
    ks = admissible_windings(config, limit=1)
    if not ks:
        raise WindingError("no admissible walk")
    return ks[0] % 8


def winding_well_defined(config: SpinorConfig) -> tuple[bool, int]:
    """Whether all admissible walks agree modulo 4 pi, and the class (quarter turns mod 8)."""
    classes = {k % 8 for k in admissible_windings(config)}
    if not classes:
        raise WindingError("no admissible walk")
    return len(classes) == 1, min(classes)


def oracle_spinor(domain, a: Point, z: Point, cap: int = ENUMERATION_CAP) -> complex:
    """``(1/Z) sum alpha^|gamma| exp(-i W / 2)`` over C(a, z); ``Z+/Z`` at ``z == a``."""
    t = _table(domain, cap)
    zs, zp, _ = partition_functions(t, t.domain.edge_of(a))
    if z == a:
        return complex(zp / zs)
    acc = 0j
    for cfg in enumerate_spinor_configs(t, a, z):
        ok, k = winding_well_defined(cfg) if len(cfg.edges) <= 6 else (True, winding(cfg))
        if not ok:
            raise WindingError(f"windings disagree on {cfg}")
        acc += ALPHA**cfg.size * _PHASES[k]
    return acc / zs


def oracle_spinor_field(domain: DiscreteDomain, a: Point, cap: int = ENUMERATION_CAP) -> dict[Point, complex]:
    """Oracle spinor at every medial vertex of the domain, source value included."""
    t = SubsetTable(domain, cap)
    return {m: oracle_spinor(t, a, m) for m in domain.medial_vertices}


def oracle_record(domain: DiscreteDomain, a: Point, z: Point, cap: int = ENUMERATION_CAP) -> dict:
    """JSON-ready oracle result."""
    import hashlib

    t = SubsetTable(domain, cap)
    zs, zp, zm = partition_functions(t, domain.edge_of(a))
    f = oracle_spinor(t, a, z)
    digest = hashlib.sha256(domain.to_json(sort_keys=True).encode()).hexdigest()[:16]
    return {
        "domain_hash": digest,
        "a": [domain.point(a).real, domain.point(a).imag],
        "z": [domain.point(z).real, domain.point(z).imag],
        "Z": zs,
        "Z_plus": zp,
        "Z_minus": zm,
        "spinor": [f.real, f.imag],
    }


__all__ = [
    "ALPHA",
    "BETA_C",
    "ContourConfig",
    "SpinorConfig",
    "SubsetTable",
    "EnumerationCapError",
    "WindingError",
    "enumerate_even_subsets",
    "partition_functions",
    "partition_functions_exact",
    "partition_polynomials",
    "oracle_energy_plus",
    "oracle_energy_plus_exact",
    "oracle_energy_free",
    "high_temp_correlation",
    "high_temp_correlation_exact",
    "free_energy_high_temp_exact",
    "low_temp_bijection_check",
    "enumerate_spinor_configs",
    "admissible_windings",
    "winding",
    "winding_well_defined",
    "oracle_spinor",
    "oracle_spinor_field",
    "oracle_record",
    "is_horizontal_midpoint",
]
