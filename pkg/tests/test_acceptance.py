"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the report lines.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from heatdist import heat, oracle, sparse, varadhan
from heatdist.mesh import grid, icosphere, perturbed_grid, torus
from heatdist.operators import (
    cotan_laplacian,
    divergence_matrix,
    gradient_matrix,
    vertex_divergence,
)


def report(num, name, ok, detail):
    line = f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


class Budget:
    def __init__(self, seconds):
        self.limit = seconds
        self.start = time.perf_counter()

    @property
    def elapsed(self):
        return time.perf_counter() - self.start

    def ok(self):
        return self.elapsed < self.limit


def test_criterion_1_operator_identities():
    budget = Budget(10.0)
    meshes = [
        grid(12, 12, 1.0),
        perturbed_grid(12, 12, 1.0, 0.3, 1234),
        icosphere(2),
        icosphere(3),
        torus(2.0, 0.7, 16, 12),
    ]
    rng = np.random.default_rng(0)
    worst_identity = 0.0
    worst_kernel = 0.0
    worst_divergence = 0.0
    for mesh in meshes:
        L = cotan_laplacian(mesh)
        G = gradient_matrix(mesh)
        D = divergence_matrix(mesh)
        dense = L.to_dense()
        scale = np.max(np.abs(dense))
        worst_identity = max(
            worst_identity, np.max(np.abs(D @ G - dense)) / scale
        )
        kernel = sparse.matvec(L, np.ones(mesh.num_vertices))
        worst_kernel = max(worst_kernel, np.max(np.abs(kernel)) / scale)
        del G, D
        for _ in range(10):
            X = rng.standard_normal((mesh.num_faces, 3))
            total = float(vertex_divergence(mesh, X).sum())
            ref = float(np.sum(mesh.face_areas * np.linalg.norm(X, axis=1)))
            worst_divergence = max(worst_divergence, abs(total) / ref)
    ok = (
        worst_identity < 1e-10
        and worst_kernel < 1e-10
        and worst_divergence < 1e-10
        and budget.ok()
    )
    report(
        1,
        "operator identity suite",
        ok,
        f"max identity err {worst_identity:.2e}, kernel err {worst_kernel:.2e}, "
        f"total divergence {worst_divergence:.2e}, {budget.elapsed:.1f}s (limit 10s)",
    )


def test_criterion_2_sphere_accuracy():
    budget = Budget(30.0)
    rows = oracle.convergence_study("icosphere", [2, 3, 4])
    errs = [r.linf_error for r in rows]
    orders = [r.observed_order for r in rows[1:]]
    mean_rel = rows[-1].mean_relative_error
    ok = (
        mean_rel < 0.02
        and errs[0] > errs[1] > errs[2]
        and all(0.5 <= o <= 2.0 for o in orders)
        and budget.ok()
    )
    report(
        2,
        "sphere accuracy and convergence",
        ok,
        f"mean rel err {mean_rel:.4f} (<0.02), Linf {errs[0]:.3f}>{errs[1]:.3f}>"
        f"{errs[2]:.3f}, orders {orders[0]:.2f}/{orders[1]:.2f} in [0.5,2.0], "
        f"{budget.elapsed:.1f}s (limit 30s)",
    )


def test_criterion_3_planar_l2_recovery():
    budget = Budget(10.0)
    mesh = grid(65, 65, 1.0)
    center = 32 * 65 + 32
    phi = heat.geodesic_distance(heat.build_solver(mesh, m=1.0), [center])
    truth = oracle.analytic_distance("plane", mesh, center)
    corner_err = abs(phi[0] - 32 * np.sqrt(2)) / (32 * np.sqrt(2))
    mean_rel = oracle.mean_relative_error(phi, truth, truth.max())
    ok = corner_err < 0.02 and mean_rel < 0.02 and budget.ok()
    report(
        3,
        "planar l2 recovery",
        ok,
        f"corner err {corner_err:.4f} (<0.02), mean rel err {mean_rel:.4f} (<0.02), "
        f"{budget.elapsed:.1f}s (limit 10s)",
    )


def test_criterion_4_time_step_sweep():
    budget = Budget(60.0)
    mesh = icosphere(3)
    src = int(np.argmax(mesh.positions[:, 2]))
    truth = oracle.analytic_distance("sphere", mesh, src)
    errs = {}
    for m in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
        phi = heat.geodesic_distance(heat.build_solver(mesh, m=m), [src])
        errs[m] = oracle.mean_relative_error(phi, truth, truth.max())
    best = min(errs.values())
    ok = errs[1.0] <= 2.0 * best and budget.ok()
    sweep = ", ".join(f"m={m:g}:{e:.4f}" for m, e in errs.items())
    report(
        4,
        "time-step sweep",
        ok,
        f"err(m=1) {errs[1.0]:.4f} <= 2 x best {best:.4f}; {sweep}; "
        f"{budget.elapsed:.1f}s (limit 60s)",
    )


def _metric_report(level, m=1.0, seed=0):
    mesh = icosphere(level)
    solver = heat.build_solver(mesh, m=m)
    rng = np.random.default_rng(seed)
    sources = rng.choice(mesh.num_vertices, size=20, replace=False)
    fields = {int(s): heat.geodesic_distance(solver, [int(s)]) for s in sources}
    return oracle.metric_violation_scan(
        fields, mesh.euclidean_diameter(), num_pairs=50, num_triples=200, seed=seed
    )


def test_criterion_5_metric_properties():
    budget = Budget(60.0)
    coarse = _metric_report(3)
    fine = _metric_report(4)
    smoothed = _metric_report(4, m=100.0)
    ok = (
        fine.max_symmetry < coarse.max_symmetry
        and fine.max_triangle < coarse.max_triangle
        and budget.ok()
    )
    # report-only: with m=100 the violating triples should be near-collinear
    # (detour through y close in length to the direct path, ratio near 1)
    for sx, sy, z, viol, collinearity in smoothed.violating_triples[:5]:
        print(
            f"  m=100 violating triple ({sx},{sy},{z}): "
            f"violation {viol:.2e}, detour/direct ratio {collinearity:.4f}"
        )
    report(
        5,
        "metric-property refinement",
        ok,
        f"symmetry {coarse.max_symmetry:.4f}->{fine.max_symmetry:.4f}, "
        f"triangle {coarse.max_triangle:.4f}->{fine.max_triangle:.4f}, "
        f"{len(smoothed.violating_triples)} m=100 triples reported, "
        f"{budget.elapsed:.1f}s (limit 60s)",
    )


def test_criterion_6_graph_distance_limit():
    budget = Budget(60.0)
    adjacency = varadhan.grid_adjacency(8, 8)
    source = 3 * 8 + 3  # interior source keeps the coarse deviation below 0.25
    bfs = varadhan.bfs_distance(adjacency, source)
    rows = varadhan.varadhan_exponent(
        adjacency, source, [Fraction(1, 10**8), Fraction(1, 10**10)]
    )
    dev8 = float(np.max(np.abs(rows[0] - bfs)))
    dev10 = float(np.max(np.abs(rows[1] - bfs)))
    ok = dev8 < 0.25 and dev10 < dev8 and budget.ok()
    report(
        6,
        "exact-arithmetic graph-distance limit",
        ok,
        f"max dev {dev8:.4f} at t=1e-8 (<0.25), {dev10:.4f} at t=1e-10 (smaller), "
        f"{budget.elapsed:.1f}s (limit 60s)",
    )


def test_criterion_7_amortization():
    budget = Budget(120.0)
    mesh = icosphere(6)
    sparse.warm_up_kernels()
    sparse.reset_counters()
    t0 = time.perf_counter()
    solver = heat.build_solver(mesh, m=1.0)
    build_time = time.perf_counter() - t0

    rng = np.random.default_rng(0)
    sources = rng.integers(mesh.num_vertices, size=10)
    heat.geodesic_distance(solver, [int(sources[0])])  # warmup, discarded
    sparse.reset_counters()
    times = []
    for s in sources:
        t0 = time.perf_counter()
        heat.geodesic_distance(solver, [int(s)])
        times.append(time.perf_counter() - t0)
    query_factorizations = sparse.counter_snapshot()["factorizations"]
    per_query = float(np.median(times))
    ok = (
        per_query <= build_time / 5.0
        and query_factorizations == 0
        and budget.ok()
    )
    report(
        7,
        "prefactor amortization",
        ok,
        f"build {build_time:.2f}s, median query {per_query * 1e3:.1f}ms "
        f"({build_time / per_query:.0f}x, need >=5x), "
        f"{query_factorizations} query factorizations, "
        f"{budget.elapsed:.1f}s (limit 120s)",
    )


def test_criterion_8_boundary_conditions():
    budget = Budget(10.0)
    mesh = grid(20, 20, 1.0)
    solvers = {bc: heat.build_solver(mesh, m=10.0, bc=bc) for bc in heat.BOUNDARY_MODES}
    src = [10 * 20 + 10]
    u = {bc: heat.solve_heat(s, src) for bc, s in solvers.items()}
    bitwise = np.array_equal(u["averaged"], 0.5 * (u["neumann"] + u["dirichlet"]))
    phi = {bc: heat.geodesic_distance(s, src) for bc, s in solvers.items()}
    diam = mesh.euclidean_diameter()
    gaps = [
        np.max(np.abs(phi[a] - phi[b]))
        for a, b in (("neumann", "dirichlet"), ("neumann", "averaged"),
                     ("dirichlet", "averaged"))
    ]
    distinct = all(g > 1e-6 * diam for g in gaps)
    ok = bitwise and distinct and budget.ok()
    report(
        8,
        "boundary conditions",
        ok,
        f"averaged == (u_N + u_D)/2 bitwise: {bitwise}, min pairwise field gap "
        f"{min(gaps):.3f} (> {1e-6 * diam:.1e}), {budget.elapsed:.1f}s (limit 10s)",
    )


def test_criterion_9_robustness():
    budget = Budget(10.0)
    mesh = perturbed_grid(33, 33, 1.0, 0.3, 42)
    center = 16 * 33 + 16
    phi = heat.geodesic_distance(heat.build_solver(mesh), [center])
    finite = bool(np.isfinite(phi).all())
    reference = grid(33, 33, 1.0)
    truth = oracle.analytic_distance("plane", reference, center)
    mean_rel = oracle.mean_relative_error(phi, truth, truth.max())
    ok = finite and mean_rel < 0.10 and budget.ok()
    report(
        9,
        "perturbed-grid robustness",
        ok,
        f"finite: {finite}, mean rel err vs unperturbed l2 {mean_rel:.4f} (<0.10), "
        f"{budget.elapsed:.1f}s (limit 10s)",
    )
