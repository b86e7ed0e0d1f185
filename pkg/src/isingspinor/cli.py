"""Command-line front end: ``isingspinor <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from . import contours, coupling, mc, verify
from .continuum import energy_target, frame_disk
from .lattice import (
    Disk,
    DiscreteDomain,
    Polygon,
    Rectangle,
    discretize,
    nearest_horizontal_midpoint,
    square_domain,
)
from .spinor import discrete_integral, energy_density, solve_spinor


# -- argument helpers ---------------------------------------------------------


def parse_mesh(text: str) -> float:
    """``0.05`` or ``1/16``."""
    return float(Fraction(text.strip()))


def parse_complex(text: str) -> complex:
    """``x,y`` or a Python complex literal such as ``0.4+0.1j``."""
    text = text.strip()
    if "," in text:
        x, y = text.split(",")
        return complex(float(x), float(y))
    return complex(text.replace(" ", ""))


def parse_region(text: str):
    """``disk:cx,cy,r``, ``rect:x0,y0,x1,y1`` or ``polygon:x,y;x,y;...``."""
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    if kind == "disk":
        cx, cy, r = map(float, body.split(","))
        return Disk(complex(cx, cy), r)
    if kind in ("rect", "rectangle"):
        return Rectangle(*map(float, body.split(",")))
    if kind == "polygon":
        pts = tuple(tuple(map(float, p.split(","))) for p in body.split(";") if p.strip())
        return Polygon(pts)
    raise argparse.ArgumentTypeError(f"cannot parse region {text!r}")


def _dump(obj, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_meta(path: Path, meta: dict):
    meta = dict(meta, timestamp=time.strftime("%Y-%m-%dT%H:%M:%S%z"))
    _dump(meta, path.with_suffix(".meta.json"))


def _out(args, name: str) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return Path(args.out_dir) / name


def load_domain(args) -> DiscreteDomain:
    if getattr(args, "domain", None):
        return DiscreteDomain.from_json(Path(args.domain).read_text(encoding="utf-8"))
    if getattr(args, "square", None):
        return square_domain(args.square)
    if getattr(args, "region", None) is None or getattr(args, "mesh", None) is None:
        raise SystemExit("give --domain FILE, --square N, or --region SPEC with --mesh")
    return discretize(args.region, args.mesh)


def source_of(domain: DiscreteDomain, args):
    if getattr(args, "a", None) is None:
        lo = min(domain.vertices)
        hi = max(domain.vertices)
        a = domain.mesh * complex(lo[0] + hi[0], lo[1] + hi[1]) / 2
    else:
        a = args.a
    return nearest_horizontal_midpoint(domain, a)


def _add_domain_args(p):
    g = p.add_argument_group("domain")
    g.add_argument("--domain", help="serialized domain JSON")
    g.add_argument("--region", type=parse_region, help="disk:cx,cy,r | rect:x0,y0,x1,y1 | polygon:x,y;...")
    g.add_argument("--mesh", type=parse_mesh, help="mesh size, e.g. 1/32")
    g.add_argument("--square", type=int, help="n x n block of vertices with unit mesh")


# -- commands -----------------------------------------------------------------


def cmd_discretize(args) -> int:
    dom = load_domain(args)
    path = _out(args, "domain.json")
    _dump(dom.to_dict(), path)
    print(f"{len(dom.vertices)} vertices, {len(dom.edges)} edges -> {path}")
    return 0


def cmd_solve(args) -> int:
    dom = load_domain(args)
    a = source_of(dom, args)
    f = solve_spinor(dom, a, tol=args.tolerance)
    path = _out(args, "field.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(f.to_csv(), encoding="utf-8")
    print(f"source {dom.point(a)}, f(a,a) = {f.source_value.real:.15g}, residual {f.residual:.2e} -> {path}")
    return 0


def cmd_energy(args) -> int:
    dom = load_domain(args)
    a = source_of(dom, args)
    plus, free = energy_density(dom, a)
    rec = {"a": [dom.point(a).real, dom.point(a).imag], "mesh": dom.mesh, "plus": plus, "free": free}
    print(json.dumps(rec, sort_keys=True))
    if args.out:
        _dump(rec, Path(args.out))
    return 0


@dataclass
class SweepSpec:
    region: object
    a: complex
    meshes: list
    boundary: str = "both"

    def __post_init__(self):
        if any(m2 >= m1 for m1, m2 in zip(self.meshes, self.meshes[1:])):
            raise ValueError("meshes must be strictly decreasing")
        if not bool(self.region.contains(self.a)):
            raise ValueError("a must lie inside the region")


def run_sweep(spec: SweepSpec, tol: float = 1e-9) -> tuple[list[dict], list[dict]]:
    """Per-mesh records plus their wall times (kept apart so records are reproducible)."""
    target = None
    if isinstance(spec.region, Disk):
        target = energy_target(frame_disk(spec.region.center, spec.region.radius, spec.a))
    records, timings = [], []
    for mesh in spec.meshes:
        t0 = time.perf_counter()
        rec = {"mesh": mesh, "plus_over_mesh": None, "free_over_mesh": None, "target": target,
               "relative_error": None, "residual": None, "error": None}
        try:
            dom = discretize(spec.region, mesh)
            a = nearest_horizontal_midpoint(dom, spec.a)
            f = solve_spinor(dom, a, tol)
            plus, free = energy_density(f)
            rec.update(plus_over_mesh=plus / mesh, free_over_mesh=free / mesh, residual=f.residual)
            if target is not None:
                rec["relative_error"] = abs(plus / mesh - target) / abs(target)
        except Exception as exc:  # recorded, the sweep goes on
            rec["error"] = f"{type(exc).__name__}: {exc}"
        records.append(rec)
        timings.append({"mesh": mesh, "wall_time": time.perf_counter() - t0})
    return records, timings


def cmd_sweep(args) -> int:
    spec = SweepSpec(args.region, args.a, args.meshes)
    records, timings = run_sweep(spec, args.tolerance)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    wall = {t["mesh"]: t["wall_time"] for t in timings}
    with open(out_dir / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["mesh", "plus_over_mesh", "free_over_mesh", "target", "relative_error", "residual", "wall_time", "error"])
        for r in records:
            wr.writerow([_fmt(r[k]) for k in ("mesh", "plus_over_mesh", "free_over_mesh", "target", "relative_error", "residual")]
                        + [f"{wall[r['mesh']]:.3f}", r["error"] or ""])
    spec_d = {"region": spec.region.to_dict(), "a": [spec.a.real, spec.a.imag], "meshes": spec.meshes}
    _dump({"spec": spec_d, "records": records}, out_dir / "sweep.json")
    _write_meta(out_dir / "sweep.json", {"timings": timings})
    for r in records:
        err = "" if r["relative_error"] is None else f"  rel.err {r['relative_error']:.3e}"
        val = "failed: " + r["error"] if r["error"] else f"plus/mesh {r['plus_over_mesh']:.6f}"
        print(f"mesh {r['mesh']:.6g}: {val}{err}")
    return 0 if all(r["error"] is None for r in records) else 1


def _fmt(x) -> str:
    return "" if x is None else repr(x)


def cmd_coupling(args) -> int:
    ev = coupling.CouplingEvaluator(r0=args.r0)
    r = args.radius
    pts = [(x, y) for x in range(-r, r + 1) for y in range(-r, r + 1) if x * x + y * y <= r * r]
    text = ev.table_csv(pts)
    path = _out(args, "coupling.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"{len(pts)} rows -> {path}")
    return 0


def cmd_oracle(args) -> int:
    dom = load_domain(args)
    a = source_of(dom, args)
    z = a if args.z is None else _nearest_medial(dom, args.z)
    rec = contours.oracle_record(dom, a, z)
    path = _out(args, "oracle.json")
    _dump(rec, path)
    print(json.dumps(rec, sort_keys=True))
    return 0


def _nearest_medial(dom: DiscreteDomain, z: complex):
    return min(dom.medial_vertices, key=lambda m: (abs(dom.point(m) - z), m))


def cmd_mc(args) -> int:
    dom = load_domain(args)
    a = source_of(dom, args)
    params = mc.MCParams(burn_in=args.burn_in, sweeps=args.sweeps, seed=args.seed, algorithm=args.algorithm,
                         chains=max(1, args.chains))
    est = mc.estimate_energy(dom, a, args.boundary, params, threads=args.threads)
    rec = {"boundary": args.boundary, "a": [dom.point(a).real, dom.point(a).imag], "params": asdict(params),
           "estimate": est.to_dict()}
    path = _out(args, "mc.json")
    _dump(rec, path)
    print(f"{args.boundary}: {est.mean:.6f} ± {est.stderr:.6f} ({est.samples} sweeps) -> {path}")
    return 0


def cmd_verify(args) -> int:
    results = verify.run_checks(args.level)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.ok]
    print("all checks passed" if not failed else f"FAILED: {', '.join(failed)}")
    return 1 if failed else 0


def cmd_export(args) -> int:
    if args.kind == "coupling":
        return cmd_coupling(args)
    dom = load_domain(args)
    a = source_of(dom, args)
    f = solve_spinor(dom, a, tol=args.tolerance)
    if args.kind == "field":
        path = _out(args, "field.csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(f.to_csv(), encoding="utf-8")
        print(f"{len(f.values)} rows -> {path}")
        return 0
    integral = discrete_integral(f)
    path = _out(args, "integral.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["re_z", "im_z", "value", "class"])
        for cls, table in (("primal", integral.primal), ("dual", integral.dual)):
            for p in sorted(table):
                z = dom.point(p)
                wr.writerow([repr(z.real), repr(z.imag), repr(table[p]), cls])
        for (v, w), val in sorted(integral.boundary.items()):
            z = dom.vertex_point(w)
            wr.writerow([repr(z.real), repr(z.imag), repr(val), "boundary"])
    print(f"integral -> {path}")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def globals_(suppress: bool):
        g = argparse.ArgumentParser(add_help=False)
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g.add_argument("--seed", type=int, default=d(0), help="random seed")
        g.add_argument("--threads", type=int, default=d(1), help="worker threads")
        g.add_argument("--tolerance", type=float, default=d(1e-9), help="solver residual tolerance")
        g.add_argument("--out-dir", default=d("."), help="directory for outputs")
        return g

    # global flags may come before or after the subcommand
    common = globals_(True)
    p = argparse.ArgumentParser(prog="isingspinor", description=__doc__, parents=[globals_(False)])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=fn)
        return sp

    sp = add("discretize", cmd_discretize, "discretize a region and save the domain")
    _add_domain_args(sp)
    sp.add_argument("--out")

    for name, fn, help_ in (("solve", cmd_solve, "solve for the spinor and write the field"),
                            ("energy", cmd_energy, "energy density at one edge")):
        sp = add(name, fn, help_)
        _add_domain_args(sp)
        sp.add_argument("--a", type=parse_complex, help="source position (nearest horizontal edge is used)")
        sp.add_argument("--out")

    sp = add("sweep", cmd_sweep, "mesh sweep against the continuum target")
    sp.add_argument("--region", type=parse_region, default=Disk(0j, 1.0))
    sp.add_argument("--a", type=parse_complex, default=0j)
    sp.add_argument("--meshes", type=lambda s: [parse_mesh(m) for m in s.split(",")],
                    default=[1 / 16, 1 / 32, 1 / 64])

    sp = add("coupling", cmd_coupling, "table of coupling values as CSV")
    sp.add_argument("--radius", type=int, default=5)
    sp.add_argument("--r0", type=float, default=coupling.R0)
    sp.add_argument("--out")

    sp = add("oracle", cmd_oracle, "exact enumeration on a tiny domain")
    _add_domain_args(sp)
    sp.add_argument("--a", type=parse_complex)
    sp.add_argument("--z", type=parse_complex, help="target position (nearest medial vertex); default a")
    sp.add_argument("--out")

    sp = add("mc", cmd_mc, "Monte Carlo energy estimate")
    _add_domain_args(sp)
    sp.add_argument("--a", type=parse_complex)
    sp.add_argument("--boundary", choices=("plus", "free"), default="plus")
    sp.add_argument("--sweeps", type=int, default=100_000)
    sp.add_argument("--burn-in", type=int, default=1000)
    sp.add_argument("--algorithm", choices=("cluster", "single-flip"), default="cluster")
    sp.add_argument("--chains", type=int, default=1)
    sp.add_argument("--out")

    sp = add("verify", cmd_verify, "run the named self-checks")
    sp.add_argument("--level", choices=("quick", "full"), default="quick")

    sp = add("export", cmd_export, "export field, integral or coupling tables")
    sp.add_argument("kind", choices=("field", "integral", "coupling"))
    _add_domain_args(sp)
    sp.add_argument("--a", type=parse_complex)
    sp.add_argument("--radius", type=int, default=5)
    sp.add_argument("--r0", type=float, default=coupling.R0)
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads > 1:
        os.environ.setdefault("NUMBA_NUM_THREADS", str(args.threads))
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
