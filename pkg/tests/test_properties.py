"""Property-based checks of the structural invariants on random polyomino domains."""
import math

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from isingspinor.contours import (
    enumerate_spinor_configs,
    oracle_energy_free,
    oracle_energy_plus,
    oracle_energy_plus_exact,
    oracle_spinor_field,
    partition_functions,
    partition_functions_exact,
    winding_well_defined,
)
from isingspinor.lattice import DIAGONALS, DiscreteDomain, edge_line, line_between, project
from isingspinor.spinor import (
    check_sub_super,
    contour_around,
    contour_sum,
    difference_spinor,
    discrete_integral,
    solve_spinor,
)

PROFILE = settings(max_examples=25, deadline=None)


@st.composite
def domains(draw, width=4, height=4, max_edges=None, min_vertices=2):
    """Connected, simply connected vertex sets grown one neighbour at a time inside a box."""
    size = draw(st.integers(min_vertices, width * height))
    cells = [(0, 0)]
    seen = {(0, 0)}
    while len(cells) < size:
        frontier = sorted(
            {(j + dj, k + dk) for j, k in cells for dj, dk in ((1, 0), (-1, 0), (0, 1), (0, -1))}
            - seen
        )
        frontier = [(j, k) for j, k in frontier if 0 <= j < width and 0 <= k < height]
        if not frontier:
            break
        c = draw(st.sampled_from(frontier))
        trial = DiscreteDomain(seen | {c})
        if max_edges is not None and len(trial.edges) > max_edges:
            break
        cells.append(c)
        seen.add(c)
    d = DiscreteDomain(seen, mesh=draw(st.sampled_from([1.0, 0.5, 0.125])))
    assume(len(d.vertices) >= min_vertices and d.horizontal_edges)
    assume(d.euler_characteristic() == 1)
    return d


# -- lattice ------------------------------------------------------------------


@PROFILE
@given(domains(6, 6))
def test_boundary_multiplicity(d):
    assert len(d.boundary_vertices) == len(d.boundary_edges)
    assert len({e for _, e in d.boundary_vertices}) == len(d.boundary_edges)
    deg = {v: 0 for v in d.vertices}
    for u, w in d.edges:
        deg[u] += 1
        deg[w] += 1
    assert sum(4 - x for x in deg.values()) == len(d.boundary_edges)


@PROFILE
@given(domains(6, 6))
def test_dual_edges_cross_at_midpoints(d):
    mids = set()
    for e, (p, q) in zip(d.edges, d.dual_edges):
        (j0, k0), (j1, k1) = e
        m = (j0 + j1, k0 + k1)
        assert (p[0] + q[0]) // 2 == m[0] and (p[1] + q[1]) // 2 == m[1]
        assert (p[0] + q[0]) % 2 == 0 and (p[1] + q[1]) % 2 == 0
        mids.add(m)
    interior = set(d.medial_vertices) - d.boundary_medial_set
    assert mids == interior


@PROFILE
@given(domains(6, 6))
def test_medial_degree(d):
    deg = {m: 0 for m in d.medial_vertices}
    for me in d.medial_edges:
        deg[me.m1] += 1
        deg[me.m2] += 1
        z1, z2 = d.point(me.m1), d.point(me.m2)
        assert abs(abs(z1 - z2) - d.mesh / math.sqrt(2)) < 1e-12
    for m, k in deg.items():
        assert k == (4 if m not in d.boundary_medial_set else 2)


@PROFILE
@given(st.integers(-20, 20), st.integers(-20, 20), st.sampled_from(DIAGONALS), st.booleans())
def test_edge_line_translation_invariant(j, k, diag, vertical):
    base = (1, 0) if not vertical else (0, 1)
    m1 = base
    m2 = (base[0] + diag[0], base[1] + diag[1])
    l1 = edge_line(m1, m2)
    l2 = edge_line((m1[0] + 2 * j, m1[1] + 2 * k), (m2[0] + 2 * j, m2[1] + 2 * k))
    assert l1.eta2 == l2.eta2
    assert any(abs(l1.eta2 - np.exp(2j * t)) < 1e-12 for t in (math.pi / 8, -math.pi / 8, 3 * math.pi / 8, -3 * math.pi / 8))


finite = st.floats(-1e3, 1e3, allow_nan=False)


@PROFILE
@given(st.sampled_from(DIAGONALS), finite, finite, finite, finite, finite)
def test_projection_real_linear_idempotent(diag, x1, y1, x2, y2, lam):
    line = line_between((0, 0), diag)
    z, w = complex(x1, y1), complex(x2, y2)
    scale = 1 + abs(z) + abs(w) + abs(lam) * abs(z)
    assert abs(project(line, lam * z + w) - (lam * project(line, z) + project(line, w))) < 1e-12 * scale
    p = project(line, z)
    assert abs(project(line, p) - p) < 1e-12 * scale
    assert abs(project(line, 2.5 * line.direction) - 2.5 * line.direction) < 1e-12


# -- contours -----------------------------------------------------------------


@PROFILE
@given(domains(4, 3, max_edges=12), st.data())
def test_partition_split_exact(d, data):
    e = data.draw(st.sampled_from(d.edges))
    z, zp, zm = partition_functions_exact(d, e)
    assert zp + zm == z
    fz, fzp, fzm = partition_functions(d, e)
    assert abs(fzp + fzm - fz) < 1e-14 * fz


@PROFILE
@given(domains(4, 3, max_edges=12), st.data())
def test_windings_agree(d, data):
    a = data.draw(st.sampled_from(d.horizontal_midpoints))
    z = data.draw(st.sampled_from([m for m in d.medial_vertices if m != a]))
    for cfg in enumerate_spinor_configs(d, a, z):
        ok, _ = winding_well_defined(cfg)
        assert ok


@PROFILE
@given(domains(4, 3, max_edges=12), st.data())
def test_oracle_free_is_minus_plus(d, data):
    e = data.draw(st.sampled_from(d.horizontal_edges))
    assert oracle_energy_free(d, e) == -oracle_energy_plus(d, e)
    assert abs(oracle_energy_plus(d, e) - float(oracle_energy_plus_exact(d, e))) < 1e-15


@PROFILE
@given(domains(4, 3, max_edges=11), st.data())
def test_monotone_under_adding_a_vertex(d, data):
    e = data.draw(st.sampled_from(d.horizontal_edges))
    nbrs = sorted({(j + dj, k + dk) for j, k in d.vertices for dj, dk in ((1, 0), (-1, 0), (0, 1), (0, -1))} - d.vertex_set)
    extra = data.draw(st.sampled_from(nbrs))
    big = DiscreteDomain(d.vertex_set | {extra}, d.mesh)
    assume(len(big.edges) <= 12)
    assert oracle_energy_plus_exact(big, e) <= oracle_energy_plus_exact(d, e)


# -- spinor -------------------------------------------------------------------


@PROFILE
@given(domains(4, 4, max_edges=16), st.data())
def test_solver_equals_oracle(d, data):
    a = data.draw(st.sampled_from(d.horizontal_midpoints))
    f = solve_spinor(d, a)
    ref = oracle_spinor_field(d, a)
    assert max(abs(f[m] - ref[m]) for m in d.medial_vertices) < 1e-9
    # equal to 1 exactly when no even subset contains the edge
    _, _, zm = partition_functions(d, a)
    assert 0 < f.source_value.real <= 1
    assert (f.source_value.real < 1 - 1e-12) == (zm > 0)
    assert abs(f.source_value.imag) < 1e-12


@PROFILE
@given(domains(9, 9, min_vertices=6), st.data())
def test_solved_field_structure(d, data):
    a = data.draw(st.sampled_from(d.horizontal_midpoints))
    f = solve_spinor(d, a)
    assert f.projection_residuals().max(initial=0) < 1e-9
    assert 0 < f.source_value.real <= 1 + 1e-12
    integ = discrete_integral(f)
    assert integ.max_inconsistency < 1e-9
    assert integ.boundary_dual_spread() < 1e-9
    rep = check_sub_super(integ)
    assert rep.ok, (rep.primal_violations, rep.dual_violations)
    assert rep.normal_derivative_error < 1e-9


@settings(max_examples=10, deadline=None)
@given(domains(7, 7, min_vertices=9), st.data())
def test_difference_spinor_morera(d, data):
    a = data.draw(st.sampled_from(d.horizontal_midpoints))
    diff = difference_spinor(d, a)
    # unions of diamonds of primal vertices and faces whose boundary stays inside
    prim = [(2 * j, 2 * k) for j, k in d.vertices]
    centers = prim + list(d.dual_vertices)
    picked = data.draw(st.lists(st.sampled_from(centers), min_size=1, max_size=6, unique=True))
    try:
        loop = contour_around(picked)
    except ValueError:
        loop = None
    if loop is not None and all(p in d.medial_index for p in loop):
        assert abs(contour_sum(diff, loop, d.mesh)) < 1e-9
    # around a: both squares flanking the edge must be faces for the diamonds to close
    north, south = (a[0], a[1] + 1), (a[0], a[1] - 1)
    if north in d.dual_vertex_set and south in d.dual_vertex_set:
        around = contour_around([(a[0] - 1, a[1]), (a[0] + 1, a[1]), north, south])
        assert abs(contour_sum(diff, around, d.mesh)) < 1e-9
