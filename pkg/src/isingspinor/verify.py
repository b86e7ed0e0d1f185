"""Named self-checks shared by the ``verify`` subcommand and the acceptance tests."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import contours, coupling
from .exact import SQRT2_EXACT
from .lattice import DiscreteDomain, Rectangle, discretize, nearest_horizontal_midpoint, square_domain
from .spinor import check_sub_super, discrete_integral, energy_density, solve_spinor


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _shape(rows: list[str]) -> DiscreteDomain:
    """Domain from an ASCII picture; ``#`` marks a vertex, top row is highest."""
    h = len(rows)
    return DiscreteDomain([(j, h - 1 - k) for k, r in enumerate(rows) for j, ch in enumerate(r) if ch == "#"])


def small_domains(max_edges: int = 16) -> list[DiscreteDomain]:
    """A fixed family of tiny domains with at least one horizontal edge."""
    doms = [
        square_domain(2),
        square_domain(3, 2),
        square_domain(2, 3),
        square_domain(4, 2),
        square_domain(2, 4),
        square_domain(3),
        square_domain(5, 2),
        square_domain(6, 2),
        _shape(["##.", "###", "###"]),
        _shape([".#.", "###", ".#."]),
        _shape(["#..", "##.", "###"]),
        _shape(["###.", "####", "###."]),
        _shape([".##.", "####", ".##."]),
        _shape(["##", "#.", "##"]),
    ]
    return [d for d in doms if len(d.edges) <= max_edges]


def nested_domains() -> tuple[list[DiscreteDomain], tuple]:
    """Three nested domains sharing the horizontal edge ``(0,0)-(1,0)``."""
    return [square_domain(2), square_domain(3, 2), square_domain(3)], ((0, 0), (1, 0))


# -- individual checks --------------------------------------------------------


def check_coupling_table(ev: coupling.CouplingEvaluator | None = None, tol: float = 1e-10) -> tuple[bool, str]:
    worst, bad = 0.0, []
    for (x, y), exact in coupling.EXACT_TABLE.items():
        q = coupling.c0_quadrature(x, y)
        f = coupling.c0_fallback(x, y)
        vals = [q, f] + ([ev(x, y)] if ev is not None else [])
        err = max(abs(v - exact) for v in vals)
        worst = max(worst, err)
        if err > tol:
            bad.append((x, y))
    return not bad, f"max error {worst:.2e}" + (f", wrong at {bad}" if bad else "")


def check_singularity(tol: float = 1e-8) -> tuple[bool, str]:
    exact = coupling.check_full_plane_singularity_exact()
    quad = coupling.check_full_plane_singularity()
    ok = all(r == 0 for r in exact) and quad < tol
    return ok, f"symbolic residuals {exact}, quadrature residual {quad:.2e}"


def check_oracle_equivalence(domains=None, tol: float = 1e-9) -> tuple[bool, str]:
    domains = domains or small_domains()
    worst, pairs = 0.0, 0
    for dom in domains:
        for a in dom.horizontal_midpoints:
            f = solve_spinor(dom, a)
            table = contours.SubsetTable(dom)
            for z in dom.medial_vertices:
                o = contours.oracle_spinor(table, a, z)
                worst = max(worst, abs(f[z] - o))
                pairs += 1
            zs, zp, _ = contours.partition_functions(table, dom.edge_of(a))
            worst = max(worst, abs(f.source_value - zp / zs))
    return worst < tol, f"{len(domains)} domains, {pairs} (a, z) pairs, max |solver - oracle| {worst:.2e}"


def check_windings(max_edges: int = 12) -> tuple[bool, str]:
    configs = fails = 0
    for dom in small_domains(max_edges):
        table = contours.SubsetTable(dom)
        for a in dom.horizontal_midpoints:
            for z in dom.medial_vertices:
                if z == a:
                    continue
                for cfg in contours.enumerate_spinor_configs(table, a, z):
                    configs += 1
                    ok, _ = contours.winding_well_defined(cfg)
                    fails += not ok
    return fails == 0 and configs > 0, f"{configs} configurations, {fails} disagreements"


def check_energy_identities(tol: float = 1e-9) -> tuple[bool, str]:
    worst, exact_ok, n = 0.0, True, 0
    for dom in small_domains(12):
        table = contours.SubsetTable(dom)
        for a in dom.horizontal_midpoints:
            e = dom.edge_of(a)
            plus = contours.oracle_energy_plus_exact(table, e)
            ht = contours.high_temp_correlation_exact(table, *e) - SQRT2_EXACT / 2
            exact_ok &= ht == -plus
            sp, sf = energy_density(dom, a)
            worst = max(worst, abs(sp + sf), abs(sp - float(plus)))
            n += 1
    return exact_ok and worst < tol, f"{n} edges, exact high/low identity {'holds' if exact_ok else 'FAILS'}, solver defect {worst:.2e}"


def check_integral_structure(n: int = 20, tol: float = 1e-8) -> tuple[bool, str]:
    dom = discretize(Rectangle(0.0, 0.0, 1.0, 1.0), 1.0 / (n + 1))
    a = nearest_horizontal_midpoint(dom, 0.5 + 0.5j)
    f = solve_spinor(dom, a)
    integral = discrete_integral(f)
    rep = check_sub_super(integral, tol)
    ok = rep.ok and rep.boundary_spread < tol and rep.normal_derivative_error < tol
    return ok, (
        f"{n}x{n} square: boundary spread {rep.boundary_spread:.2e}, "
        f"violations {len(rep.primal_violations)}+{len(rep.dual_violations)}, "
        f"normal derivative error {rep.normal_derivative_error:.2e}"
    )


def check_monotonicity() -> tuple[bool, str]:
    doms, e = nested_domains()
    plus = [contours.oracle_energy_plus_exact(d, e) for d in doms]
    ok = all(plus[i] >= plus[i + 1] for i in range(len(plus) - 1))
    ok &= all(-plus[i] <= -plus[i + 1] for i in range(len(plus) - 1))
    return ok, "plus energies " + ", ".join(f"{float(p):.6f}" for p in plus)


def check_mc(sweeps: int = 200_000, seed: int = 2024) -> tuple[bool, str]:
    from .mc import MCParams, estimate_energy

    unit = square_domain(2)
    target = math.tanh(4 * contours.BETA_C) - math.sqrt(0.5)
    e1 = estimate_energy(unit, (1, 0), "plus", MCParams(sweeps=sweeps, seed=seed))
    dom = discretize(Rectangle(0.0, 0.0, 1.0, 1.0), 1.0 / 9)
    a = nearest_horizontal_midpoint(dom, 0.5 + 0.5j)
    e2 = estimate_energy(dom, a, "plus", MCParams(sweeps=sweeps, seed=seed))
    ref = energy_density(dom, a)[0]
    ok = e1.within(target) and e2.within(ref)
    return ok, f"unit cell {e1.mean:.5f}±{e1.stderr:.5f} vs {target:.5f}; 8x8 {e2.mean:.5f}±{e2.stderr:.5f} vs {ref:.5f}"


QUICK = (
    ("coupling table", check_coupling_table),
    ("full-plane singularity", check_singularity),
    ("oracle equivalence", check_oracle_equivalence),
    ("winding well-definedness", check_windings),
    ("energy identities", check_energy_identities),
    ("discrete integral structure", check_integral_structure),
    ("domain monotonicity", check_monotonicity),
)
FULL = QUICK + (("monte carlo cross-check", check_mc),)


def run_checks(level: str = "quick", evaluator: coupling.CouplingEvaluator | None = None) -> list[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    out = []
    for name, fn in QUICK if level == "quick" else FULL:
        t = time.perf_counter()
        try:
            ok, detail = fn(evaluator) if fn is check_coupling_table else fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t))
    return out


def max_abs(values) -> float:
    return float(np.max(np.abs(np.asarray(values)))) if len(values) else 0.0
