"""Discrete square-grid domains, their dual and medial graphs.

All lattice points are addressed with *doubled* integer coordinates
``(p, q)`` standing for the complex number ``mesh * (p + i q) / 2``:

* primal vertices have both coordinates even,
* dual vertices (face centers) have both coordinates odd,
* medial vertices (edge midpoints) have exactly one odd coordinate;
  ``(odd, even)`` is the midpoint of a horizontal edge and ``(even, odd)``
  the midpoint of a vertical one.

Working on the doubled grid keeps every combinatorial step exact; floating
point only enters through :meth:`DiscreteDomain.point`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

Point = tuple[int, int]

STEPS: tuple[Point, ...] = ((1, 0), (0, 1), (-1, 0), (0, -1))
DIAGONALS: tuple[Point, ...] = ((1, 1), (-1, 1), (-1, -1), (1, -1))

DOMAIN_FORMAT = "isingspinor.domain"
DOMAIN_VERSION = 1


class EmptyDomainError(ValueError):
    pass


class NotSimplyConnectedError(ValueError):
    pass


# -- regions -----------------------------------------------------------------


@dataclass(frozen=True)
class Disk:
    center: complex = 0j
    radius: float = 1.0

    def contains(self, z: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def bounds(self) -> tuple[float, float, float, float]:
        c, r = self.center, self.radius
        return c.real - r, c.imag - r, c.real + r, c.imag + r

    def to_dict(self) -> dict:
        return {"kind": "disk", "center": [self.center.real, self.center.imag], "radius": self.radius}


@dataclass(frozen=True)
class Rectangle:
    x0: float
    y0: float
    x1: float
    y1: float

    def contains(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z)
        return (z.real > self.x0) & (z.real < self.x1) & (z.imag > self.y0) & (z.imag < self.y1)

    def bounds(self) -> tuple[float, float, float, float]:
        return self.x0, self.y0, self.x1, self.y1

    def to_dict(self) -> dict:
        return {"kind": "rectangle", "corners": [self.x0, self.y0, self.x1, self.y1]}


@dataclass(frozen=True)
class Polygon:
    """Simple polygon; ``vertices`` in either orientation, not repeated at the end."""

    vertices: tuple[tuple[float, float], ...]

    def contains(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        inside = np.zeros(z.shape, dtype=bool)
        pts = self.vertices
        n = len(pts)
        for k in range(n):
            (xa, ya), (xb, yb) = pts[k], pts[(k + 1) % n]
            crosses = (ya > y) != (yb > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = xa + (y - ya) * (xb - xa) / (yb - ya)
            inside ^= crosses & (x < xcross)
        return inside

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def to_dict(self) -> dict:
        return {"kind": "polygon", "vertices": [list(p) for p in self.vertices]}


Region = Disk | Rectangle | Polygon


def region_from_dict(d: dict | None) -> Region | None:
    if d is None:
        return None
    kind = d["kind"]
    if kind == "disk":
        cx, cy = d["center"]
        return Disk(complex(cx, cy), float(d["radius"]))
    if kind == "rectangle":
        return Rectangle(*map(float, d["corners"]))
    if kind == "polygon":
        return Polygon(tuple((float(x), float(y)) for x, y in d["vertices"]))
    raise ValueError(f"unknown region kind {kind!r}")


# -- lines and projections ---------------------------------------------------


@dataclass(frozen=True)
class EdgeLine:
    """A line through the origin, stored by the square of a unit direction.

    Lines are only defined modulo a sign of their direction, so the squared
    direction ``eta2`` is the faithful parameter.
    """

    eta2: complex

    @property
    def direction(self) -> complex:
        return complex(np.sqrt(self.eta2))

    def project(self, z):
        return 0.5 * (z + self.eta2 * np.conj(z))

    def contains(self, z, tol: float = 1e-12) -> bool:
        return abs((np.conj(self.direction) * z).imag) <= tol * max(1.0, abs(z))


def project(line: EdgeLine, z):
    """Orthogonal projection onto ``line``: ``(z + eta^2 conj(z)) / 2``."""
    return line.project(z)


_SQRT_HALF = np.sqrt(0.5)


def line_between(v: Point, d: Point) -> EdgeLine:
    """Line ``(d - v)^{-1/2} R`` for a primal vertex ``v`` and an adjacent dual vertex ``d``."""
    dx, dy = d[0] - v[0], d[1] - v[1]
    if abs(dx) != 1 or abs(dy) != 1:
        raise ValueError(f"{v} and {d} are not a primal/dual pair of one medial edge")
    # conj(d - v) / |d - v|
    return EdgeLine(complex(dx * _SQRT_HALF, -dy * _SQRT_HALF))


def medial_edge_corners(m1: Point, m2: Point) -> tuple[Point, Point]:
    """Primal vertex and dual vertex flanking the medial edge ``m1 m2``."""
    if m1[0] % 2 == 0:
        m1, m2 = m2, m1
    if m1[0] % 2 != 1 or m1[1] % 2 != 0 or m2[0] % 2 != 0 or m2[1] % 2 != 1:
        raise ValueError(f"{m1}, {m2} is not a horizontal/vertical midpoint pair")
    if abs(m1[0] - m2[0]) != 1 or abs(m1[1] - m2[1]) != 1:
        raise ValueError(f"{m1} and {m2} are not adjacent medial vertices")
    return (m2[0], m1[1]), (m1[0], m2[1])


def edge_line(m1: Point, m2: Point) -> EdgeLine:
    """Line attached to the medial edge between medial vertices ``m1`` and ``m2``.

    Works for any medial edge of the full grid, so no domain is needed.
    """
    v, d = medial_edge_corners(m1, m2)
    return line_between(v, d)


def is_horizontal_midpoint(m: Point) -> bool:
    return m[0] % 2 != 0 and m[1] % 2 == 0


def is_medial(m: Point) -> bool:
    return (m[0] + m[1]) % 2 != 0


# -- domains -----------------------------------------------------------------


@dataclass(frozen=True)
class MedialEdge:
    m1: Point  # horizontal-edge midpoint
    m2: Point  # vertical-edge midpoint
    vertex: Point
    dual: Point

    @property
    def line(self) -> EdgeLine:
        return line_between(self.vertex, self.dual)


class DiscreteDomain:
    """Finite induced subgraph of the mesh-``mesh`` square grid.

    ``vertices`` are integer grid indices ``(j, k)`` for the point
    ``mesh * (j + i k)``.  Everything else is derived and cached; instances
    are treated as immutable.
    """

    def __init__(self, vertices, mesh: float = 1.0, region: Region | None = None):
        if mesh <= 0:
            raise ValueError("mesh must be positive")
        vs = sorted({(int(j), int(k)) for j, k in vertices})
        if not vs:
            raise EmptyDomainError("domain has no vertices")
        self.mesh = float(mesh)
        self.region = region
        self.vertices: tuple[Point, ...] = tuple(vs)
        self.vertex_set = frozenset(vs)

    def __repr__(self) -> str:
        return f"DiscreteDomain({len(self.vertices)} vertices, mesh={self.mesh:g})"

    # geometry
    def point(self, p: Point) -> complex:
        """Complex position of a doubled-coordinate lattice point."""
        return 0.5 * self.mesh * complex(p[0], p[1])

    def points(self, ps) -> np.ndarray:
        a = np.asarray(ps, dtype=float).reshape(-1, 2)
        return 0.5 * self.mesh * (a[:, 0] + 1j * a[:, 1])

    def doubled(self, z: complex) -> tuple[float, float]:
        return 2.0 * z.real / self.mesh, 2.0 * z.imag / self.mesh

    def vertex_point(self, v: Point) -> complex:
        return self.mesh * complex(v[0], v[1])

    # primal graph
    @cached_property
    def edges(self) -> tuple[tuple[Point, Point], ...]:
        return self.horizontal_edges + self.vertical_edges

    @cached_property
    def horizontal_edges(self) -> tuple[tuple[Point, Point], ...]:
        s = self.vertex_set
        return tuple((v, (v[0] + 1, v[1])) for v in self.vertices if (v[0] + 1, v[1]) in s)

    @cached_property
    def vertical_edges(self) -> tuple[tuple[Point, Point], ...]:
        s = self.vertex_set
        return tuple((v, (v[0], v[1] + 1)) for v in self.vertices if (v[0], v[1] + 1) in s)

    @cached_property
    def boundary_edges(self) -> tuple[tuple[Point, Point], ...]:
        """(inside vertex, outside grid point) pairs, one per boundary edge."""
        s = self.vertex_set
        out = []
        for v in self.vertices:
            for dj, dk in STEPS:
                w = (v[0] + dj, v[1] + dk)
                if w not in s:
                    out.append((v, w))
        return tuple(out)

    @cached_property
    def boundary_vertices(self) -> tuple[tuple[Point, tuple[Point, Point]], ...]:
        """Boundary vertices with multiplicity: (outside point, its boundary edge)."""
        return tuple((e[1], e) for e in self.boundary_edges)

    # dual graph
    @cached_property
    def faces(self) -> tuple[Point, ...]:
        """Lower-left corners ``(j, k)`` of the unit squares of the domain."""
        s = self.vertex_set
        return tuple(
            v
            for v in self.vertices
            if (v[0] + 1, v[1]) in s and (v[0], v[1] + 1) in s and (v[0] + 1, v[1] + 1) in s
        )

    @cached_property
    def dual_vertices(self) -> tuple[Point, ...]:
        """Face centers, doubled coordinates."""
        return tuple((2 * j + 1, 2 * k + 1) for j, k in self.faces)

    @cached_property
    def dual_vertex_set(self) -> frozenset:
        return frozenset(self.dual_vertices)

    @cached_property
    def boundary_dual_vertices(self) -> tuple[Point, ...]:
        """Centers of grid squares touching the domain that are not domain faces."""
        inner = self.dual_vertex_set
        out = set()
        for j, k in self.vertices:
            for dx, dy in DIAGONALS:
                d = (2 * j + dx, 2 * k + dy)
                if d not in inner:
                    out.add(d)
        return tuple(sorted(out))

    def dual_of(self, edge: tuple[Point, Point]) -> tuple[Point, Point]:
        """The two squares (doubled centers) separated by a primal edge."""
        (j0, k0), (j1, k1) = edge
        m = (j0 + j1, k0 + k1)
        if j0 == j1:  # vertical edge: squares left and right
            return (m[0] - 1, m[1]), (m[0] + 1, m[1])
        return (m[0], m[1] - 1), (m[0], m[1] + 1)

    @cached_property
    def dual_edges(self) -> tuple[tuple[Point, Point], ...]:
        return tuple(self.dual_of(e) for e in self.edges)

    # medial graph
    @cached_property
    def medial_vertices(self) -> tuple[Point, ...]:
        ms = [(j0 + j1, k0 + k1) for (j0, k0), (j1, k1) in self.edges]
        ms += [(j0 + j1, k0 + k1) for (j0, k0), (j1, k1) in self.boundary_edges]
        return tuple(sorted(ms))

    @cached_property
    def medial_index(self) -> dict[Point, int]:
        return {m: i for i, m in enumerate(self.medial_vertices)}

    @cached_property
    def boundary_medial_vertices(self) -> tuple[Point, ...]:
        return tuple(sorted((j0 + j1, k0 + k1) for (j0, k0), (j1, k1) in self.boundary_edges))

    @cached_property
    def boundary_medial_set(self) -> frozenset:
        return frozenset(self.boundary_medial_vertices)

    @cached_property
    def _normals(self) -> dict[Point, complex]:
        return {
            (j0 + j1, k0 + k1): complex(j1 - j0, k1 - k0) for (j0, k0), (j1, k1) in self.boundary_edges
        }

    def outward_normal(self, m: Point, unit: bool = False) -> complex:
        """Oriented boundary edge ``y - x`` at the boundary medial vertex ``m``."""
        u = self._normals[m]
        return u if unit else self.mesh * u

    def edge_of(self, m: Point) -> tuple[Point, Point]:
        """Primal edge (grid indices) whose midpoint is the medial vertex ``m``."""
        p, q = m
        if p % 2:
            return ((p - 1) // 2, q // 2), ((p + 1) // 2, q // 2)
        return (p // 2, (q - 1) // 2), (p // 2, (q + 1) // 2)

    @cached_property
    def medial_edges(self) -> tuple[MedialEdge, ...]:
        out = []
        for j, k in self.vertices:
            v = (2 * j, 2 * k)
            for dx, dy in DIAGONALS:
                out.append(MedialEdge((v[0] + dx, v[1]), (v[0], v[1] + dy), v, (v[0] + dx, v[1] + dy)))
        return tuple(out)

    def medial_neighbors(self, m: Point) -> list[Point]:
        idx = self.medial_index
        return [(m[0] + dx, m[1] + dy) for dx, dy in DIAGONALS if (m[0] + dx, m[1] + dy) in idx and self._shares_inner_vertex(m, (m[0] + dx, m[1] + dy))]

    def _shares_inner_vertex(self, m1: Point, m2: Point) -> bool:
        v, _ = medial_edge_corners(m1, m2)
        return (v[0] // 2, v[1] // 2) in self.vertex_set

    @cached_property
    def horizontal_midpoints(self) -> tuple[Point, ...]:
        return tuple((2 * j + 1, 2 * k) for (j, k), _ in self.horizontal_edges)

    def is_interior_horizontal(self, a: Point) -> bool:
        if not is_horizontal_midpoint(a):
            return False
        j, k = (a[0] - 1) // 2, a[1] // 2
        return (j, k) in self.vertex_set and (j + 1, k) in self.vertex_set

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def connected(self) -> bool:
        return len(_components(self.vertex_set)) == 1

    # serialization
    def to_dict(self) -> dict:
        return {
            "format": DOMAIN_FORMAT,
            "version": DOMAIN_VERSION,
            "mesh": self.mesh,
            "vertices": [list(v) for v in self.vertices],
            "region": None if self.region is None else self.region.to_dict(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "DiscreteDomain":
        if d.get("format") != DOMAIN_FORMAT:
            raise ValueError("not a serialized domain")
        if int(d.get("version", 0)) > DOMAIN_VERSION:
            raise ValueError(f"unsupported domain version {d['version']}")
        return cls([tuple(v) for v in d["vertices"]], d["mesh"], region_from_dict(d.get("region")))

    @classmethod
    def from_json(cls, s: str) -> "DiscreteDomain":
        return cls.from_dict(json.loads(s))


def _components(vs) -> list[list[Point]]:
    seen: set = set()
    comps = []
    for start in sorted(vs):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            j, k = stack.pop()
            for dj, dk in STEPS:
                w = (j + dj, k + dk)
                if w in vs and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def discretize(region: Region, mesh: float) -> DiscreteDomain:
    """Largest connected induced subgraph of the mesh grid inside ``region``.

    Ties between equally large components go to the lexicographically
    smallest vertex list.
    """
    if mesh <= 0:
        raise ValueError("mesh must be positive")
    x0, y0, x1, y1 = region.bounds()
    js = np.arange(int(np.floor(x0 / mesh)) - 1, int(np.ceil(x1 / mesh)) + 2)
    ks = np.arange(int(np.floor(y0 / mesh)) - 1, int(np.ceil(y1 / mesh)) + 2)
    J, K = np.meshgrid(js, ks, indexing="ij")
    inside = region.contains(mesh * (J + 1j * K))
    pts = {(int(j), int(k)) for j, k in zip(J[inside], K[inside])}
    if not pts:
        raise EmptyDomainError(f"no grid vertex of mesh {mesh} lies inside {region}")
    comps = _components(pts)
    best = max(len(c) for c in comps)
    chosen = min(c for c in comps if len(c) == best)
    dom = DiscreteDomain(chosen, mesh, region)
    if dom.euler_characteristic() != 1:
        raise NotSimplyConnectedError("discretized domain has holes")
    return dom


def nearest_horizontal_midpoint(domain: DiscreteDomain, a: complex) -> Point:
    """Midpoint of the horizontal edge closest to ``a``.

    Ties go to the smallest real part, then the smallest imaginary part.
    """
    mids = domain.horizontal_midpoints
    if not mids:
        raise ValueError("domain has no horizontal edge")
    arr = np.asarray(mids, dtype=float)
    ax, ay = domain.doubled(complex(a))
    d2 = (arr[:, 0] - ax) ** 2 + (arr[:, 1] - ay) ** 2
    best = d2.min()
    cand = [m for m, d in zip(mids, d2) if d <= best * (1 + 1e-12) + 1e-18]
    return min(cand)


def square_domain(n: int, m: int | None = None, mesh: float = 1.0) -> DiscreteDomain:
    """``n`` by ``m`` block of vertices with lower-left corner at the origin."""
    m = n if m is None else m
    return DiscreteDomain([(j, k) for j in range(n) for k in range(m)], mesh)
