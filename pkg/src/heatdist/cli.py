"""Command-line front end.

Subcommands:
  compute      distance field for a mesh file and source vertices
  bench        prefactor-vs-solve amortization timings
  convergence  refinement study against the analytic oracle
  varadhan     exact-arithmetic graph-distance limit on a small grid
  metric       symmetry / triangle-inequality violation scan

Data goes to --out (or stdout when omitted); logs go to stderr. Exit codes:
0 success, 1 parse/validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import heat, oracle, sparse, varadhan
from .mesh import MeshError, TriangleMesh, generate_mesh, load_mesh
from .sparse import NotPositiveDefiniteError

FLOAT_FMT = "{:.17g}"


class CliError(Exception):
    def __init__(self, message, code=1):
        super().__init__(message)
        self.code = code


def _log(msg):
    print(msg, file=sys.stderr)


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w"), True


def _parse_sources(spec: str, mesh: TriangleMesh, nearest: str | None):
    indices = []
    if spec:
        if spec.startswith("@"):
            try:
                with open(spec[1:]) as fh:
                    toks = fh.read().split()
            except OSError as exc:
                raise CliError(f"cannot read source file: {exc}")
            indices = [int(t) for t in toks]
        else:
            indices = [int(t) for t in spec.split(",") if t]
    if nearest:
        try:
            x, y, z = (float(v) for v in nearest.split(","))
        except ValueError:
            raise CliError("--nearest expects x,y,z")
        d = np.linalg.norm(mesh.positions - np.array([x, y, z]), axis=1)
        indices.append(int(np.argmin(d)))  # argmin breaks ties by lowest index
    if not indices:
        raise CliError("no source vertices given (use --source or --nearest)")
    return indices


def _load(path):
    try:
        return load_mesh(path)
    except MeshError as exc:
        raise CliError(str(exc))
    except OSError as exc:
        raise CliError(f"cannot read mesh: {exc}")


def _mesh_from_args(args):
    if getattr(args, "generate", None):
        try:
            kind, _, rest = args.generate.partition(":")
            params = [float(p) for p in rest.split(",")] if rest else []
            if kind == "icosphere":
                return generate_mesh(kind, subdiv=int(params[0]))
            if kind == "grid":
                return generate_mesh(kind, nx=int(params[0]), ny=int(params[1]),
                                     spacing=params[2] if len(params) > 2 else 1.0)
            if kind == "torus":
                return generate_mesh(kind, R=params[0], r=params[1],
                                     nu=int(params[2]), nv=int(params[3]))
            raise ValueError(f"unknown generator {kind!r}")
        except (ValueError, IndexError) as exc:
            raise CliError(f"bad --generate spec: {exc}")
    if getattr(args, "input", None):
        return _load(args.input)
    raise CliError("need --in or --generate")


def _write_csv_field(out, phi):
    out.write("vertex_index,distance\n")
    for i, v in enumerate(phi):
        out.write(f"{i},{FLOAT_FMT.format(v)}\n")


def _write_ply_scalar(out, mesh: TriangleMesh, phi):
    out.write("ply\nformat ascii 1.0\n")
    out.write(f"element vertex {mesh.num_vertices}\n")
    out.write("property double x\nproperty double y\nproperty double z\n")
    out.write("property double distance\n")
    out.write(f"element face {mesh.num_faces}\n")
    out.write("property list uchar int vertex_indices\n")
    out.write("end_header\n")
    for p, v in zip(mesh.positions, phi):
        out.write(
            f"{FLOAT_FMT.format(p[0])} {FLOAT_FMT.format(p[1])} "
            f"{FLOAT_FMT.format(p[2])} {FLOAT_FMT.format(v)}\n"
        )
    for f in mesh.faces:
        out.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def cmd_compute(args) -> int:
    mesh = _mesh_from_args(args)
    sources = _parse_sources(args.source, mesh, args.nearest)
    try:
        solver = heat.build_solver(mesh, m=args.m, bc=args.bc)
        phi = heat.geodesic_distance(solver, sources)
    except (ValueError, IndexError) as exc:
        raise CliError(str(exc))
    except NotPositiveDefiniteError as exc:
        raise CliError(f"factorization failed: {exc}", code=2)
    if not np.isfinite(phi).all():
        raise CliError("non-finite distances computed", code=2)
    out, close = _open_out(args.out)
    try:
        if args.format == "csv":
            _write_csv_field(out, phi)
        else:
            _write_ply_scalar(out, mesh, phi)
    finally:
        if close:
            out.close()
    _log(f"computed distance field: {mesh.num_vertices} vertices, "
         f"{len(sources)} sources, m={args.m}, bc={args.bc}")
    return 0


def cmd_bench(args) -> int:
    if args.queries < 2:
        raise CliError("bench needs at least 2 queries (-k)")
    mesh = _mesh_from_args(args)
    rng = np.random.default_rng(args.seed)
    sources = rng.integers(mesh.num_vertices, size=args.queries)

    sparse.warm_up_kernels()  # JIT compilation must not pollute timings
    sparse.reset_counters()
    t0 = time.perf_counter()
    solver = heat.build_solver(mesh, m=args.m, bc=args.bc)
    build_time = time.perf_counter() - t0
    build_factorizations = sparse.counter_snapshot()["factorizations"]

    heat.geodesic_distance(solver, [int(sources[0])])  # warmup query, discarded
    sparse.reset_counters()

    def query(s):
        t = time.perf_counter()
        heat.geodesic_distance(solver, [int(s)])
        return time.perf_counter() - t

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            times = list(pool.map(query, sources))
    else:
        times = [query(s) for s in sources]
    query_factorizations = sparse.counter_snapshot()["factorizations"]
    per_query = float(np.median(times))

    out, close = _open_out(args.out)
    try:
        out.write("metric,value\n")
        out.write(f"build_seconds,{FLOAT_FMT.format(build_time)}\n")
        out.write(f"median_query_seconds,{FLOAT_FMT.format(per_query)}\n")
        out.write(f"speedup,{FLOAT_FMT.format(build_time / per_query)}\n")
        out.write(f"build_factorizations,{build_factorizations}\n")
        out.write(f"query_factorizations,{query_factorizations}\n")
    finally:
        if close:
            out.close()
    if query_factorizations != 0:
        raise CliError("factorization performed during a query", code=2)
    return 0


def cmd_convergence(args) -> int:
    levels = [int(v) for v in args.levels.split(",") if v]
    if args.family not in ("icosphere", "grid"):
        raise CliError(f"unknown family {args.family!r}")
    rows = oracle.convergence_study(args.family, levels, m=args.m)
    out, close = _open_out(args.out)
    try:
        out.write("level,h,linf_error,mean_relative_error,observed_order\n")
        for r in rows:
            order = "" if np.isnan(r.observed_order) else FLOAT_FMT.format(r.observed_order)
            out.write(
                f"{r.level},{FLOAT_FMT.format(r.h)},{FLOAT_FMT.format(r.linf_error)},"
                f"{FLOAT_FMT.format(r.mean_relative_error)},{order}\n"
            )
    finally:
        if close:
            out.close()
    return 0


def cmd_varadhan(args) -> int:
    if args.grid > 10:
        raise CliError("grid size capped at 10 (exact-arithmetic budget)")
    if args.grid < 2:
        raise CliError("grid size must be at least 2")
    exponents = [int(v) for v in args.t_exponents.split(",") if v]
    if not exponents:
        raise CliError("need at least one t exponent")
    from fractions import Fraction

    adjacency = varadhan.grid_adjacency(args.grid, args.grid)
    ts = [Fraction(1, 10**e) for e in sorted(exponents)]
    bfs = varadhan.bfs_distance(adjacency, args.source)
    rows = varadhan.varadhan_exponent(adjacency, args.source, ts)
    out, close = _open_out(args.out)
    try:
        headers = ",".join(f"exponent_t_1e-{e:02d}" for e in sorted(exponents))
        out.write(f"vertex,bfs,{headers}\n")
        for v in range(args.grid * args.grid):
            vals = ",".join(FLOAT_FMT.format(r[v]) for r in rows)
            out.write(f"{v},{bfs[v]},{vals}\n")
    finally:
        if close:
            out.close()
    return 0


def cmd_metric(args) -> int:
    if args.family != "icosphere":
        raise CliError(f"unknown family {args.family!r} (metric scan uses icosphere)")
    ms = [float(v) for v in args.m_list.split(",") if v] or [1.0]
    mesh = generate_mesh("icosphere", subdiv=args.level)
    diam = mesh.euclidean_diameter()
    rng = np.random.default_rng(args.seed)
    source_pool = rng.choice(mesh.num_vertices, size=min(20, mesh.num_vertices), replace=False)
    out, close = _open_out(args.out)
    try:
        out.write("m,max_symmetry_violation,max_triangle_violation,violating_triples\n")
        for m in ms:
            solver = heat.build_solver(mesh, m=m)
            fields = {int(s): heat.geodesic_distance(solver, [int(s)]) for s in source_pool}
            report = oracle.metric_violation_scan(fields, diam, seed=args.seed)
            out.write(
                f"{FLOAT_FMT.format(m)},{FLOAT_FMT.format(report.max_symmetry)},"
                f"{FLOAT_FMT.format(report.max_triangle)},{len(report.violating_triples)}\n"
            )
    finally:
        if close:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatdist",
        description="Geodesic distance on triangle meshes via prefactored heat-flow solves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_mesh_args(p):
        p.add_argument("--in", dest="input", help="input mesh (OBJ or PLY)")
        p.add_argument("--generate", help="procedural mesh, e.g. icosphere:4 or grid:65,65,1.0")

    p = sub.add_parser("compute", help="compute a distance field")
    add_mesh_args(p)
    p.add_argument("--source", default="", help="comma-separated vertex indices or @file")
    p.add_argument("--nearest", help="x,y,z mapped to the closest vertex")
    p.add_argument("--m", type=float, default=1.0, help="time-step multiplier (t = m h^2)")
    p.add_argument("--bc", default="neumann", choices=heat.BOUNDARY_MODES)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", default="csv", choices=("csv", "ply_scalar"))
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("bench", help="prefactor-vs-solve amortization timings")
    add_mesh_args(p)
    p.add_argument("-k", "--queries", type=int, default=10)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--bc", default="neumann", choices=heat.BOUNDARY_MODES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("convergence", help="refinement study vs the analytic oracle")
    p.add_argument("--family", default="icosphere")
    p.add_argument("--levels", default="2,3,4")
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("varadhan", help="exact-arithmetic graph-distance limit")
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--source", type=int, default=0)
    p.add_argument("--t-exponents", default="6,8", help="t = 10^-e per listed e")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=cmd_varadhan)

    p = sub.add_parser("metric", help="metric-property violation scan")
    p.add_argument("--family", default="icosphere")
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--m-list", default="1", help="comma-separated m values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=cmd_metric)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _log(f"error: {exc}")
        return exc.code
    except varadhan.SingularSystemError as exc:
        _log(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
