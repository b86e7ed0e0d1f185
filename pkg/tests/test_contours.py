import math

import pytest

from bruteforce import ALPHA as A_REF, energy_free, energy_plus, even_subsets
from isingspinor import contours
from isingspinor.contours import (
    ALPHA,
    BETA_C,
    EnumerationCapError,
    SpinorConfig,
    WindingError,
    admissible_windings,
    enumerate_even_subsets,
    enumerate_spinor_configs,
    high_temp_correlation,
    high_temp_correlation_exact,
    low_temp_bijection_check,
    oracle_energy_plus,
    oracle_energy_plus_exact,
    oracle_spinor,
    oracle_spinor_field,
    partition_functions,
    partition_functions_exact,
    winding_well_defined,
)
from isingspinor.exact import ALPHA_EXACT, SQRT2_EXACT, QSqrt2
from isingspinor.lattice import DiscreteDomain, square_domain
from isingspinor.verify import nested_domains, small_domains

UNIT = square_domain(2)
EDGE = ((0, 0), (1, 0))


def test_weights():
    assert abs(ALPHA - math.tanh(BETA_C)) < 1e-15
    assert abs(ALPHA - math.exp(-2 * BETA_C)) < 1e-15


def test_even_subsets_unit_cell():
    cfgs = enumerate_even_subsets(UNIT)
    assert sorted(c.size for c in cfgs) == [0, 4]


def test_even_subsets_single_edge():
    d = DiscreteDomain([(0, 0), (1, 0)])
    assert [c.size for c in enumerate_even_subsets(d)] == [0]
    assert partition_functions(d, EDGE) == (1.0, 1.0, 0.0)


def test_even_subsets_two_by_three():
    d = square_domain(3, 2)
    got = {c.edges for c in enumerate_even_subsets(d)}
    ref = set(even_subsets(d.vertices))
    assert got == ref
    assert sorted(len(s) for s in got) == [0, 4, 4, 6]
    middle = ((1, 0), (1, 1))
    assert sum(middle in s for s in got) == 2
    z, zp, zm = partition_functions_exact(d, middle)
    assert zm == 2 * ALPHA_EXACT**4
    assert z == 1 + 2 * ALPHA_EXACT**4 + ALPHA_EXACT**6


@pytest.mark.parametrize("dom", small_domains(12), ids=lambda d: f"{len(d.vertices)}v{len(d.edges)}e")
def test_even_subsets_match_itertools(dom):
    assert {c.edges for c in enumerate_even_subsets(dom)} == set(even_subsets(dom.vertices))


def test_partition_functions_unit_cell():
    z, zp, zm = partition_functions_exact(UNIT, EDGE)
    assert (z, zp, zm) == (1 + ALPHA_EXACT**4, QSqrt2(1), ALPHA_EXACT**4)
    fz, fzp, fzm = partition_functions(UNIT, EDGE)
    assert abs(fz - (1 + ALPHA**4)) < 1e-15 and fzp == 1.0 and abs(fzm - ALPHA**4) < 1e-16


def test_cap():
    with pytest.raises(EnumerationCapError):
        enumerate_even_subsets(square_domain(4))
    assert len(enumerate_even_subsets(square_domain(4), cap=24)) > 0


def test_energy_plus_unit_cell():
    e = oracle_energy_plus(UNIT, EDGE)
    assert abs(e - (2 / (1 + ALPHA**4) - (2 + math.sqrt(2)) / 2)) < 1e-15
    assert abs(e - (math.tanh(4 * BETA_C) - math.sqrt(0.5))) < 1e-14
    assert contours.oracle_energy_free(UNIT, EDGE) == -e


@pytest.mark.parametrize("dom", small_domains(12), ids=lambda d: f"{len(d.vertices)}v{len(d.edges)}e")
def test_energy_matches_spin_sums(dom):
    for e in dom.horizontal_edges:
        plus = oracle_energy_plus(dom, e)
        assert abs(plus - energy_plus(dom.vertices, e)) < 1e-12
        assert abs(-plus - energy_free(dom.vertices, e)) < 1e-12


def test_high_temperature_examples():
    d = DiscreteDomain([(0, 0), (1, 0)])
    assert abs(high_temp_correlation(d, (0, 0), (1, 0)) - ALPHA) < 1e-15
    ht = high_temp_correlation_exact(UNIT, (0, 0), (1, 0))
    assert ht == (ALPHA_EXACT + ALPHA_EXACT**3) / (1 + ALPHA_EXACT**4)
    assert ht - SQRT2_EXACT / 2 == -oracle_energy_plus_exact(UNIT, EDGE)


@pytest.mark.parametrize("dom", small_domains(12), ids=lambda d: f"{len(d.vertices)}v{len(d.edges)}e")
def test_high_low_identity_exact(dom):
    for e in dom.edges:
        z, zp, zm = partition_functions_exact(dom, e)
        lhs = (ALPHA_EXACT * zp + zm / ALPHA_EXACT) / z - SQRT2_EXACT / 2
        assert lhs == -oracle_energy_plus_exact(dom, e)
        assert high_temp_correlation_exact(dom, *e) - SQRT2_EXACT / 2 == lhs


def test_low_temperature_bijection():
    assert low_temp_bijection_check(UNIT)
    assert low_temp_bijection_check(square_domain(3, 2))
    assert low_temp_bijection_check(DiscreteDomain([(0, 0), (1, 0)]))
    assert low_temp_bijection_check(square_domain(3))


def test_spinor_configs_unit_cell():
    a, z = (1, 0), (2, 1)
    cfgs = enumerate_spinor_configs(UNIT, a, z)
    # both edges at the east vertex are excluded, so only the two half-edges remain
    assert len(cfgs) == 1
    (c,) = cfgs
    assert c.edges == frozenset() and c.z_vertex == (1, 0) and c.size == 1
    # a left turn: exp(-i pi/4) alpha / Z
    f = oracle_spinor(UNIT, a, z)
    assert abs(f - ALPHA * complex(math.cos(math.pi / 4), -math.sin(math.pi / 4)) / (1 + ALPHA**4)) < 1e-15


def test_spinor_configs_single_horizontal_edge():
    d = DiscreteDomain([(0, 0), (1, 0)])
    around_east = {(3, 0), (2, 1), (2, -1)}
    for z in d.medial_vertices:
        if z == (1, 0):
            continue
        cfgs = enumerate_spinor_configs(d, (1, 0), z)
        if z in around_east:
            # the two half-edges meet at the east vertex
            assert [c.edges for c in cfgs] == [frozenset()]
        else:
            assert cfgs == []
            assert oracle_spinor(d, (1, 0), z) == 0


def test_spinor_configs_disconnected_piece():
    # two horizontal edges with nothing joining them
    d = DiscreteDomain([(0, 0), (1, 0), (3, 0), (4, 0)])
    assert enumerate_spinor_configs(d, (1, 0), (7, 0)) == []


def test_source_preconditions():
    with pytest.raises(ValueError):
        enumerate_spinor_configs(UNIT, (1, 0), (1, 0))
    with pytest.raises(ValueError):
        enumerate_spinor_configs(UNIT, (0, 1), (1, 0))


def _config(edges, a, z, zv):
    return SpinorConfig(frozenset(edges), a, z, ((a[0] + 1) // 2, a[1] // 2), zv)


def test_winding_straight_path():
    # a at (1,0) -> vertex (1,0) -> half-edge towards (3,0)
    cfg = _config([], (1, 0), (3, 0), (1, 0))
    assert admissible_windings(cfg) == [0]
    assert winding_well_defined(cfg) == (True, 0)


def test_winding_single_left_turn():
    cfg = _config([], (1, 0), (2, 1), (1, 0))
    assert admissible_windings(cfg) == [1]
    assert winding_well_defined(cfg) == (True, 1)


def test_winding_with_four_valent_crossing():
    # figure-eight: the walk meets a 4-valent vertex and may turn either way
    edges = [((1, 0), (2, 0)), ((2, 0), (2, 1)), ((1, 1), (2, 1)), ((1, 0), (1, 1)),
             ((1, 0), (1, -1)), ((0, -1), (1, -1)), ((0, -1), (0, 0))]
    cfg = _config(edges, (1, 0), (-1, 0), (0, 0))
    ws = admissible_windings(cfg)
    assert len(ws) == 2
    ok, k = winding_well_defined(cfg)
    assert ok
    assert len({w % 8 for w in ws}) == 1


def test_winding_error_on_bad_configuration():
    # an impossible walk: the half-edge at z is unreachable
    cfg = _config([], (1, 0), (7, 0), (3, 0))
    with pytest.raises(WindingError):
        winding_well_defined(cfg)


def test_oracle_spinor_at_source():
    assert abs(oracle_spinor(UNIT, (1, 0), (1, 0)) - 1 / (1 + ALPHA**4)) < 1e-15


@pytest.mark.parametrize("dom", small_domains(13), ids=lambda d: f"{len(d.vertices)}v{len(d.edges)}e")
def test_oracle_boundary_condition(dom):
    for a in dom.horizontal_midpoints[:3]:
        f = oracle_spinor_field(dom, a)
        for m in dom.boundary_medial_vertices:
            nu = dom.outward_normal(m, unit=True)
            assert abs((f[m] * complex(nu) ** 0.5).imag) < 1e-12


@pytest.mark.parametrize("dom", small_domains(13), ids=lambda d: f"{len(d.vertices)}v{len(d.edges)}e")
def test_oracle_s_holomorphic_and_singular(dom):
    from isingspinor.lattice import edge_line

    for a in dom.horizontal_midpoints[:3]:
        f = oracle_spinor_field(dom, a)
        for me in dom.medial_edges:
            line = me.line
            x, y = me.m1, me.m2
            if a not in (x, y):
                assert abs(line.project(f[x]) - line.project(f[y])) < 1e-12
        for dx, dy in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            y = (a[0] + dx, a[1] + dy)
            line = edge_line(a, y)
            ref = f[a] if dx > 0 else f[a] - 1
            assert abs(line.project(ref) - line.project(f[y])) < 1e-12


def test_monotonicity_exact():
    doms, e = nested_domains()
    vals = [oracle_energy_plus_exact(d, e) for d in doms]
    assert vals[0] >= vals[1] >= vals[2]
    assert -vals[0] <= -vals[1] <= -vals[2]


def test_oracle_record_json_ready():
    import json

    rec = contours.oracle_record(UNIT, (1, 0), (2, 1))
    s = json.dumps(rec)
    assert set(rec) == {"domain_hash", "a", "z", "Z", "Z_plus", "Z_minus", "spinor"}
    assert abs(rec["Z_plus"] + rec["Z_minus"] - rec["Z"]) < 1e-15
    assert "NaN" not in s


def test_reference_alpha_consistent():
    assert A_REF == ALPHA
