import math

import numpy as np
import pytest

from isingspinor.contours import ALPHA, oracle_energy_plus, oracle_spinor_field, partition_functions
from isingspinor.coupling import SOURCE_VALUE
from isingspinor.lattice import Disk, DiscreteDomain, Rectangle, discretize, nearest_horizontal_midpoint, square_domain
from isingspinor.spinor import (
    IntegralInconsistencyError,
    SolverDegenerateError,
    SpinorField,
    assemble_bvp,
    check_sub_super,
    contour_around,
    contour_sum,
    dbar,
    difference_spinor,
    discrete_integral,
    energy_density,
    full_plane_field,
    laplacian,
    solve_spinor,
    solve_system,
)
from isingspinor.verify import small_domains

UNIT = square_domain(2)
A = (1, 0)


def test_unit_cell_source_value():
    f = solve_spinor(UNIT, A)
    assert abs(f.source_value - 1 / (1 + ALPHA**4)) < 1e-12
    plus, free = energy_density(f)
    assert abs(plus - 2 * (1 / (1 + ALPHA**4) - SOURCE_VALUE)) < 1e-12
    assert free == -plus
    assert abs(plus - oracle_energy_plus(UNIT, ((0, 0), (1, 0)))) < 1e-12


def test_system_is_square():
    for dom in (UNIT, square_domain(3, 2), discretize(Disk(0j, 1), 1 / 8)):
        sysm = assemble_bvp(dom, dom.horizontal_midpoints[len(dom.horizontal_midpoints) // 2])
        assert sysm.shape == (4 * len(dom.vertices), 4 * len(dom.vertices))


def test_source_must_be_interior_horizontal():
    with pytest.raises(ValueError):
        assemble_bvp(UNIT, (0, 1))
    with pytest.raises(ValueError):
        assemble_bvp(UNIT, (-1, 0))


@pytest.mark.parametrize("dom", small_domains(16), ids=lambda d: f"{len(d.vertices)}v{len(d.edges)}e")
def test_solver_matches_oracle(dom):
    for a in dom.horizontal_midpoints:
        f = solve_spinor(dom, a)
        ref = oracle_spinor_field(dom, a)
        assert max(abs(f[m] - ref[m]) for m in dom.medial_vertices) < 1e-10
        z, zp, _ = partition_functions(dom, a)
        assert abs(f.source_value - zp / z) < 1e-10


def test_two_by_three_block():
    d = square_domain(3, 2)
    for a in d.horizontal_midpoints:
        f = solve_spinor(d, a)
        ref = oracle_spinor_field(d, a)
        assert max(abs(f[m] - ref[m]) for m in d.medial_vertices) < 1e-10


def test_boundary_and_holomorphy_of_solution():
    d = discretize(Disk(0j, 1), 1 / 12)
    a = nearest_horizontal_midpoint(d, 0.2 + 0.1j)
    f = solve_spinor(d, a)
    assert f.boundary_residual() < 1e-10
    assert f.projection_residuals().max() < 1e-10
    assert max(abs(r) for r in f.singularity_residuals().values()) < 1e-10
    assert f.residual < 1e-9
    assert 0 < f.source_value.real < 1


def test_degenerate_system_detected():
    sysm = assemble_bvp(UNIT, A)
    sysm.rhs = sysm.rhs + 1.0
    m = sysm.matrix.tolil()
    m[0, :] = 0
    sysm.matrix = m.tocsr()
    with pytest.raises(SolverDegenerateError):
        solve_system(sysm)


def test_difference_spinor_regular_at_source():
    d = square_domain(6)
    a = nearest_horizontal_midpoint(d, 2.5 + 2.5j)
    diff = difference_spinor(d, a)
    assert diff.projection_residuals(include_source=True).max() < 1e-8
    for dom in small_domains(12)[:5]:
        for a in dom.horizontal_midpoints:
            z, zp, _ = partition_functions(dom, a)
            assert abs(difference_spinor(dom, a).source_value - (zp / z - SOURCE_VALUE)) < 1e-10


def test_difference_shrinks_on_growing_squares():
    vals = []
    for n in (6, 10, 16, 24):
        d = square_domain(n)
        a = nearest_horizontal_midpoint(d, (n - 1) / 2 + (n - 1) / 2 * 1j)
        vals.append(abs(energy_density(d, a)[0]))
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_full_plane_field_not_bounded_solution():
    d = square_domain(4)
    full = full_plane_field(d, (3, 2))
    assert full.boundary_residual() > 1e-3
    assert full.projection_residuals().max() < 1e-8


def test_dbar_examples():
    const = {(x, y): 2 - 1j for x in range(-3, 4) for y in range(-3, 4)}
    assert dbar(const, (0, 0)) == 0
    assert laplacian({(x, y): 5.0 for x in range(-4, 5, 2) for y in range(-4, 5, 2)}, (0, 0)) == 0
    ident = {(x, y): complex(x, y) for x in range(-3, 4) for y in range(-3, 4)}
    for v in [(0, 0), (1, 1), (2, 0)]:
        assert dbar(ident, v) == 0
    with pytest.raises(KeyError):
        dbar(const, (3, 3))


def test_solved_field_dbar_vanishes():
    d = square_domain(5)
    a = nearest_horizontal_midpoint(d, 2 + 2j)
    f = solve_spinor(d, a)
    near = {(a[0] + 1, a[1]), (a[0] - 1, a[1]), (a[0], a[1] + 1), (a[0], a[1] - 1)}
    centers = [(2 * j, 2 * k) for j, k in d.vertices] + list(d.dual_vertices)
    for c in centers:
        if c in near:
            continue
        try:
            assert abs(dbar(f, c)) < 1e-10
        except KeyError:
            pass


def test_contour_sum_matches_dbar_sum():
    rng = np.random.default_rng(1)
    centers = [(0, 0), (1, 1), (2, 0), (1, -1), (2, 2), (3, 1)]
    vals = {(x, y): complex(*rng.normal(size=2)) for x in range(-4, 8) for y in range(-4, 8) if (x + y) % 2}
    loop = contour_around(centers)
    mesh = 0.25
    lhs = contour_sum(vals, loop, mesh)
    rhs = 0.5j * mesh * sum(dbar(vals, c) for c in centers)
    assert abs(lhs - rhs) < 1e-12
    assert contour_sum({p: 3.0 + 0j for p in vals}, loop) == 0


def test_contour_sum_errors():
    with pytest.raises(ValueError):
        contour_sum({}, [(1, 0), (0, 1)])
    with pytest.raises(ValueError):
        contour_sum({p: 0j for p in [(1, 0), (0, 1), (-1, 0), (0, -1), (3, 0)]}, [(1, 0), (0, 1), (-1, 0), (3, 0)])
    with pytest.raises(ValueError):
        contour_around([(0, 0), (2, 0), (4, 0), (0, 2), (4, 2), (0, 4), (2, 4), (4, 4)])


def test_contour_sum_for_spinors():
    d = square_domain(6)
    a = (5, 4)  # edge (2,2)-(3,2)
    f = solve_spinor(d, a)
    away = contour_around([(8, 8), (9, 9), (8, 6), (9, 7)])
    assert abs(contour_sum(f, away, d.mesh)) < 1e-9
    around = contour_around([(4, 4), (6, 4), (5, 5), (5, 3)])
    assert abs(contour_sum(f, around, d.mesh)) > 1e-3
    assert abs(contour_sum(difference_spinor(f), around, d.mesh)) < 1e-9


def test_discrete_integral_structure():
    d = discretize(Rectangle(0, 0, 1, 1), 1 / 11)
    a = nearest_horizontal_midpoint(d, 0.5 + 0.5j)
    f = solve_spinor(d, a)
    integ = discrete_integral(f)
    assert integ.max_inconsistency < 1e-9
    assert integ.boundary_dual_spread() < 1e-9
    rep = check_sub_super(integ)
    assert rep.ok
    assert rep.normal_derivative_error < 1e-9
    # one increment by hand
    me = next(e for e in d.medial_edges if f.a not in (e.m1, e.m2))
    inc = integ.primal[me.vertex] - integ.dual[me.dual]
    assert abs(inc - math.sqrt(2) * d.mesh * abs(me.line.project(f[me.m1])) ** 2) < 1e-12


def test_discrete_integral_two_by_three_and_trivial_fields():
    d = square_domain(3, 2)
    f = solve_spinor(d, (1, 0))
    rep = check_sub_super(discrete_integral(f))
    assert rep.ok and rep.normal_derivative_error < 1e-9
    zero = SpinorField(d, (1, 0), np.zeros(len(d.medial_vertices), complex))
    iz = discrete_integral(zero)
    assert all(v == 0 for v in iz.primal.values()) and all(v == 0 for v in iz.dual.values())


def test_constant_field_is_harmonic():
    d = square_domain(5)
    c = SpinorField(d, (3, 2), np.full(len(d.medial_vertices), 0.7 - 0.2j))
    integ = discrete_integral(c)
    for j, k in d.vertices:
        v = (2 * j, 2 * k)
        nb = [(v[0] + dx, v[1] + dy) for dx, dy in ((2, 0), (-2, 0), (0, 2), (0, -2))]
        if all(w in integ.primal for w in nb):
            assert abs(laplacian(integ.primal, v)) < 1e-12


def test_integral_rejects_non_holomorphic():
    d = square_domain(3)
    rng = np.random.default_rng(0)
    bad = SpinorField(d, (1, 0), rng.normal(size=len(d.medial_vertices)) + 1j * rng.normal(size=len(d.medial_vertices)))
    with pytest.raises(IntegralInconsistencyError):
        discrete_integral(bad)


def test_field_csv():
    f = solve_spinor(UNIT, A)
    rows = f.to_csv().strip().split("\n")
    assert rows[0] == "re_z,im_z,re_f,im_f,class"
    assert len(rows) == 1 + 12
    classes = [r.split(",")[-1] for r in rows[1:]]
    assert classes.count("source") == 1 and classes.count("boundary") == 8


def test_mesh_invariance_of_discrete_values():
    d1 = square_domain(4, mesh=1.0)
    d2 = square_domain(4, mesh=0.125)
    f1, f2 = solve_spinor(d1, (3, 2)), solve_spinor(d2, (3, 2))
    assert np.allclose(f1.values, f2.values, atol=1e-13)


def test_single_vertex_domains_rejected():
    d = DiscreteDomain([(0, 0)])
    with pytest.raises(ValueError):
        solve_spinor(d, (1, 0))
