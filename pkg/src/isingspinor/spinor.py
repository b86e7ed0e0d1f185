"""Discrete Riemann boundary value problem for the fermionic spinor.

Unknowns live on medial vertices: two reals per interior medial vertex and
one real ``t`` per boundary medial vertex, where the value is
``t * nu**(-1/2)`` for the outward unit normal ``nu`` (principal branch).
Every medial edge contributes one real equation ``P_l[f(x)] = P_l[f(y)]``;
the two west edges at the source carry the inhomogeneity ``P_l[f(a) - 1]``.
Each primal vertex has four medial edges around it, so the system is square.
"""
from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coupling import SOURCE_VALUE, CouplingEvaluator, full_plane_spinor_displacement
from .lattice import DIAGONALS, DiscreteDomain, Point, edge_line, line_between

SOLVE_TOL = 1e-9
_SQRT2 = math.sqrt(2.0)


class SolverDegenerateError(RuntimeError):
    pass


class IntegralInconsistencyError(RuntimeError):
    pass


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    # per medial vertex: (first column, basis of its one or two columns)
    columns: np.ndarray
    bases: list
    domain: DiscreteDomain
    a: Point

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def _check_source(domain: DiscreteDomain, a: Point):
    if not domain.is_interior_horizontal(a):
        raise ValueError(f"source {a} is not the midpoint of a horizontal edge inside the domain")


def _unit_normal_root(domain: DiscreteDomain, m: Point) -> complex:
    nu = domain.outward_normal(m, unit=True)
    return complex(nu) ** -0.5


def assemble_bvp(domain: DiscreteDomain, a: Point) -> LinearSystem:
    """Real sparse system whose unique solution is the spinor with source ``a``."""
    a = (int(a[0]), int(a[1]))
    _check_source(domain, a)
    meds = domain.medial_vertices
    bset = domain.boundary_medial_set
    first = np.empty(len(meds), dtype=np.int64)
    bases = []
    n = 0
    for i, m in enumerate(meds):
        first[i] = n
        if m in bset:
            bases.append((_unit_normal_root(domain, m),))
            n += 1
        else:
            bases.append((1.0 + 0j, 1j))
            n += 2
    idx = domain.medial_index
    rows, cols, vals = [], [], []
    rhs = []
    for r, me in enumerate(domain.medial_edges):
        eta_bar = np.conj(me.line.direction)
        for m, sign in ((me.m1, 1.0), (me.m2, -1.0)):
            k = idx[m]
            for j, b in enumerate(bases[k]):
                rows.append(r)
                cols.append(first[k] + j)
                vals.append(sign * (eta_bar * b).real)
        # west edges at the source: P[f(a) - 1] = P[f(y)]
        west = me.m1 == a and me.vertex[0] < a[0]
        rhs.append(eta_bar.real if west else 0.0)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), n))
    return LinearSystem(mat, np.asarray(rhs), first, bases, domain, a)


@dataclass(frozen=True)
class SpinorField:
    """Complex values on the medial vertices of ``domain`` (in ``medial_vertices`` order)."""

    domain: DiscreteDomain
    a: Point
    values: np.ndarray
    residual: float = 0.0
    kind: str = "bounded"
    info: dict = field(default_factory=dict)

    def __getitem__(self, m: Point) -> complex:
        return complex(self.values[self.domain.medial_index[tuple(m)]])

    def get(self, m: Point, default=None):
        i = self.domain.medial_index.get(tuple(m))
        return default if i is None else complex(self.values[i])

    def as_dict(self) -> dict[Point, complex]:
        return {m: complex(v) for m, v in zip(self.domain.medial_vertices, self.values)}

    @property
    def source_value(self) -> complex:
        return self[self.a]

    def vertex_class(self, m: Point) -> str:
        if m == self.a:
            return "source"
        return "boundary" if m in self.domain.boundary_medial_set else "interior"

    def projection_residuals(self, include_source: bool = False) -> np.ndarray:
        """``|P_l[f(x)] - P_l[f(y)]|`` per medial edge; source edges skipped unless asked."""
        out = []
        for me in self.domain.medial_edges:
            if not include_source and self.a in (me.m1, me.m2):
                continue
            line = me.line
            out.append(abs(line.project(self[me.m1]) - line.project(self[me.m2])))
        return np.asarray(out)

    def boundary_residual(self) -> float:
        """Largest ``|Im(f nu^(1/2))|`` over boundary medial vertices."""
        worst = 0.0
        for m in self.domain.boundary_medial_vertices:
            nu = self.domain.outward_normal(m, unit=True)
            worst = max(worst, abs((self[m] * complex(nu) ** 0.5).imag))
        return worst

    def singularity_residuals(self) -> dict[Point, complex]:
        """Defects of the four projection relations at the source."""
        out = {}
        fa = self.source_value
        for dx, dy in DIAGONALS:
            y = (self.a[0] + dx, self.a[1] + dy)
            line = edge_line(self.a, y)
            ref = fa if dx > 0 else fa - 1.0
            out[(dx, dy)] = complex(line.project(ref) - line.project(self[y]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["re_z", "im_z", "re_f", "im_f", "class"])
        for m, v in zip(self.domain.medial_vertices, self.values):
            z = self.domain.point(m)
            wr.writerow([repr(z.real), repr(z.imag), repr(float(v.real)), repr(float(v.imag)), self.vertex_class(m)])
        return buf.getvalue()


def solve_system(system: LinearSystem, tol: float = SOLVE_TOL) -> np.ndarray:
    mat = system.matrix
    if mat.shape[0] != mat.shape[1]:
        x = spla.lsqr(mat, system.rhs, atol=1e-14, btol=1e-14)[0]
    else:
        try:
            x = spla.splu(mat.tocsc()).solve(system.rhs)
        except RuntimeError as exc:
            raise SolverDegenerateError(f"singular spinor system: {exc}") from exc
    res = float(np.abs(mat @ x - system.rhs).max(initial=0.0))
    if not np.isfinite(res) or res > tol:
        raise SolverDegenerateError(f"solver residual {res:.3e} exceeds {tol:.1e}")
    return x


def _field_values(system: LinearSystem, x: np.ndarray) -> np.ndarray:
    out = np.empty(len(system.bases), dtype=complex)
    for i, (c, b) in enumerate(zip(system.columns, system.bases)):
        out[i] = sum(x[c + j] * bj for j, bj in enumerate(b))
    return out


def solve_spinor(domain: DiscreteDomain, a: Point, tol: float = SOLVE_TOL) -> SpinorField:
    """Spinor on ``domain`` with source at the horizontal midpoint ``a`` (doubled coordinates)."""
    system = assemble_bvp(domain, a)
    x = solve_system(system, tol)
    res = float(np.abs(system.matrix @ x - system.rhs).max(initial=0.0))
    return SpinorField(domain, system.a, _field_values(system, x), res, "bounded", {"shape": system.shape})


def full_plane_field(domain: DiscreteDomain, a: Point, ev: CouplingEvaluator | None = None) -> SpinorField:
    """Full-plane spinor restricted to the medial vertices of ``domain``."""
    ev = ev or CouplingEvaluator()
    vals = np.array(
        [full_plane_spinor_displacement((m[0] - a[0], m[1] - a[1]), ev) for m in domain.medial_vertices]
    )
    return SpinorField(domain, tuple(a), vals, 0.0, "full-plane")


def difference_spinor(field_or_domain, a: Point | None = None, ev: CouplingEvaluator | None = None) -> SpinorField:
    """Bounded-domain spinor minus the full-plane spinor, pointwise."""
    if isinstance(field_or_domain, SpinorField):
        f = field_or_domain
    else:
        f = solve_spinor(field_or_domain, a)
    full = full_plane_field(f.domain, f.a, ev)
    return SpinorField(f.domain, f.a, f.values - full.values, f.residual, "difference")


def energy_density(domain_or_field, a: Point | None = None) -> tuple[float, float]:
    """(plus, free) energy density at the edge with midpoint ``a``."""
    f = domain_or_field if isinstance(domain_or_field, SpinorField) else solve_spinor(domain_or_field, a)
    plus = 2.0 * (f.source_value.real - SOURCE_VALUE)
    return plus, -plus


# -- discrete operators -------------------------------------------------------


def _lookup(values, p):
    if isinstance(values, SpinorField):
        v = values.get(p)
    else:
        v = values.get(p)
    if v is None:
        raise KeyError(f"missing neighbour {p}")
    return v


def dbar(values, v: Point) -> complex:
    """``f(v + δ/2) - f(v - δ/2) + i (f(v + iδ/2) - f(v - iδ/2))`` at a primal or dual vertex ``v``."""
    e = _lookup(values, (v[0] + 1, v[1]))
    w = _lookup(values, (v[0] - 1, v[1]))
    n = _lookup(values, (v[0], v[1] + 1))
    s = _lookup(values, (v[0], v[1] - 1))
    return complex(e - w + 1j * (n - s))


def laplacian(values: dict, v: Point, neighbours=None) -> float:
    """Five-point Laplacian ``sum (h(w) - h(v))`` over the four lattice neighbours.

    ``neighbours`` overrides the neighbour values, e.g. to resolve boundary
    vertices that appear with multiplicity.
    """
    hv = values[v]
    if neighbours is None:
        neighbours = [_lookup(values, (v[0] + dx, v[1] + dy)) for dx, dy in ((2, 0), (-2, 0), (0, 2), (0, -2))]
    return float(sum(h - hv for h in neighbours))


def contour_around(centers) -> list[Point]:
    """Counterclockwise medial loop bounding the union of the diamonds of ``centers``.

    ``centers`` are primal and dual vertices in doubled coordinates; the
    union must be simply connected.
    """
    directed: dict[Point, Point] = {}
    cs = set(map(tuple, centers))
    ring = ((1, 0), (0, 1), (-1, 0), (0, -1))
    edges = set()
    for c in cs:
        for k in range(4):
            p = (c[0] + ring[k][0], c[1] + ring[k][1])
            q = (c[0] + ring[(k + 1) % 4][0], c[1] + ring[(k + 1) % 4][1])
            if (q, p) in edges:
                edges.remove((q, p))
            else:
                edges.add((p, q))
    for p, q in edges:
        if p in directed:
            raise ValueError("region bounded by the centers is not simply connected")
        directed[p] = q
    start = min(directed)
    loop = [start]
    while True:
        nxt = directed[loop[-1]]
        if nxt == start:
            break
        loop.append(nxt)
    if len(loop) != len(directed):
        raise ValueError("region bounded by the centers is not simply connected")
    return loop


def contour_sum(values, loop, mesh: float = 1.0) -> complex:
    """Trapezoid sum of ``f dz`` around a closed medial loop (doubled coordinates).

    Equals ``(i δ / 2)`` times the sum of ``dbar f`` over the enclosed centers.
    """
    pts = [tuple(p) for p in loop]
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(pts) < 4:
        raise ValueError("a closed medial contour has at least four vertices")
    total = 0j
    for i, p in enumerate(pts):
        q = pts[(i + 1) % len(pts)]
        if abs(q[0] - p[0]) != 1 or abs(q[1] - p[1]) != 1:
            raise ValueError(f"contour is not closed along medial edges at {p} -> {q}")
        dz = 0.5 * mesh * complex(q[0] - p[0], q[1] - p[1])
        total += 0.5 * (_lookup(values, p) + _lookup(values, q)) * dz
    return complex(total)


# -- discrete integral of f^2 --------------------------------------------------


@dataclass
class DiscreteIntegral:
    """Discrete antiderivative of ``-Re(f^2 dz)`` on primal and dual vertices.

    ``primal`` and ``dual`` are keyed by doubled coordinates; boundary
    primal vertices are kept per boundary edge in ``boundary`` because the
    same grid point may close several boundary edges.
    """

    field: SpinorField
    base: Point
    primal: dict
    dual: dict
    boundary: dict
    max_inconsistency: float

    def boundary_dual_spread(self) -> float:
        vals = [self.dual[d] for d in self.field.domain.boundary_dual_vertices]
        return float(np.ptp(vals)) if vals else 0.0

    def normal_derivatives(self) -> list[tuple[Point, float, float]]:
        """(boundary medial vertex, (I(w) - I(v))/δ, -|f|^2) per boundary edge."""
        dom = self.field.domain
        out = []
        for v, w in dom.boundary_edges:
            m = (v[0] + w[0], v[1] + w[1])
            diff = (self.boundary[(v, w)] - self.primal[(2 * v[0], 2 * v[1])]) / dom.mesh
            f = self.field[m]
            nu = complex(w[0] - v[0], w[1] - v[1])
            root = f * nu**0.5
            out.append((m, diff, root.imag**2 - root.real**2))
        return out


def _increment(field: SpinorField, me) -> float:
    """``I(v) - I(d)`` across a medial edge, using the endpoint that is not the source."""
    m = me.m2 if me.m1 == field.a else me.m1
    p = me.line.project(field[m])
    return float(_SQRT2 * field.domain.mesh * abs(p) ** 2)


def discrete_integral(field: SpinorField, base: Point | None = None, tol: float = 1e-9) -> DiscreteIntegral:
    """Integrate the primal/dual increment rule by breadth-first search, then check every edge."""
    dom = field.domain
    adj: dict[Point, list] = {}
    incs = []
    for me in dom.medial_edges:
        inc = _increment(field, me)
        incs.append((me.vertex, me.dual, inc))
        adj.setdefault(me.vertex, []).append((me.dual, -inc))
        adj.setdefault(me.dual, []).append((me.vertex, inc))
    base = base or (2 * dom.vertices[0][0], 2 * dom.vertices[0][1])
    vals = {base: 0.0}
    queue = deque([base])
    while queue:
        p = queue.popleft()
        for q, step in adj[p]:
            if q not in vals:
                vals[q] = vals[p] + step
                queue.append(q)
    worst = max((abs(vals[v] - vals[d] - inc) for v, d, inc in incs), default=0.0)
    if worst > tol * max(1.0, max(abs(x) for x in vals.values())):
        raise IntegralInconsistencyError(f"discrete integral is multivalued (defect {worst:.3e})")
    primal = {p: x for p, x in vals.items() if p[0] % 2 == 0}
    dual = {p: x for p, x in vals.items() if p[0] % 2 == 1}
    # boundary primal vertices: through a square flanking the boundary edge
    boundary = {}
    for v, w in dom.boundary_edges:
        m = (v[0] + w[0], v[1] + w[1])
        d = dom.dual_of((v, w))[0]
        line = line_between((2 * w[0], 2 * w[1]), d)
        boundary[(v, w)] = float(dual[d] + _SQRT2 * dom.mesh * abs(line.project(field[m])) ** 2)
    return DiscreteIntegral(field, base, primal, dual, boundary, float(worst))


@dataclass
class SubSuperReport:
    primal_violations: list
    dual_violations: list
    excluded: tuple
    min_primal_laplacian: float
    max_dual_laplacian: float
    boundary_spread: float
    normal_derivative_error: float

    @property
    def ok(self) -> bool:
        return not self.primal_violations and not self.dual_violations


def check_sub_super(integral: DiscreteIntegral, tol: float = 1e-9, exclude_source: bool = True) -> SubSuperReport:
    """Subharmonicity on primal vertices, superharmonicity on dual ones, boundary structure."""
    f = integral.field
    dom = f.domain
    a = f.a
    excluded = ((a[0] + 1, a[1]), (a[0] - 1, a[1]), (a[0], a[1] + 1), (a[0], a[1] - 1)) if exclude_source else ()
    bnd = {}
    for v, w in dom.boundary_edges:
        bnd.setdefault((2 * v[0], 2 * v[1]), {})[(2 * w[0], 2 * w[1])] = integral.boundary[(v, w)]
    scale = dom.mesh * max(1.0, float(np.abs(f.values).max()) ** 2)
    pv, lo = [], math.inf
    for j, k in dom.vertices:
        v = (2 * j, 2 * k)
        nb = []
        for dx, dy in ((2, 0), (-2, 0), (0, 2), (0, -2)):
            w = (v[0] + dx, v[1] + dy)
            nb.append(integral.primal[w] if w in integral.primal else bnd[v][w])
        lap = laplacian(integral.primal, v, nb)
        if v in excluded:
            continue
        lo = min(lo, lap)
        if lap < -tol * scale:
            pv.append((v, lap))
    dv, hi = [], -math.inf
    for d in dom.dual_vertices:
        lap = laplacian(integral.dual, d)
        if d in excluded:
            continue
        hi = max(hi, lap)
        if lap > tol * scale:
            dv.append((d, lap))
    nd = integral.normal_derivatives()
    nerr = max((abs(x - y) for _, x, y in nd), default=0.0)
    return SubSuperReport(pv, dv, excluded, lo, hi, integral.boundary_dual_spread(), nerr)
