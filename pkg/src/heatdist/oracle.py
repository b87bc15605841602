"""Independent ground-truth distances and metric-property scanners.

Everything here is deliberately decoupled from the heat pipeline: Dijkstra on
the edge graph, closed-form sphere/plane distances, sampled symmetry and
triangle-inequality violation scans, and a mesh-refinement convergence study.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import heat
from .mesh import TriangleMesh, grid, icosphere


def dijkstra_distance(mesh: TriangleMesh, sources) -> np.ndarray:
    """Shortest paths through the edge graph with Euclidean edge weights.

    Unreachable vertices get +inf.
    """
    src = heat._as_sources(sources)
    src.validate(mesh.num_vertices)
    lengths = np.linalg.norm(
        mesh.positions[mesh.edges[:, 0]] - mesh.positions[mesh.edges[:, 1]], axis=1
    )
    adj = [[] for _ in range(mesh.num_vertices)]
    for (a, b), w in zip(mesh.edges, lengths):
        adj[a].append((int(b), float(w)))
        adj[b].append((int(a), float(w)))

    dist = np.full(mesh.num_vertices, np.inf)
    pq = []
    for s in src.indices:
        dist[s] = 0.0
        pq.append((0.0, int(s)))
    heapq.heapify(pq)
    while pq:
        d, v = heapq.heappop(pq)
        if d > dist[v]:
            continue
        for w, length in adj[v]:
            nd = d + length
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(pq, (nd, w))
    return dist


def analytic_distance(kind: str, mesh: TriangleMesh, source_vertex: int) -> np.ndarray:
    """Closed-form geodesic distance for meshes with known geometry.

    kind="sphere": arc length on the unit sphere, arccos of the (clamped)
    dot product. kind="plane": Euclidean distance for planar meshes.
    """
    if not 0 <= source_vertex < mesh.num_vertices:
        raise IndexError("source vertex out of range")
    p = mesh.positions
    if kind == "sphere":
        radii = np.linalg.norm(p, axis=1)
        if not np.allclose(radii, 1.0, atol=1e-6):
            raise ValueError("sphere oracle requires unit-sphere vertices")
        dots = np.clip(p @ p[source_vertex], -1.0, 1.0)
        return np.arccos(dots)
    if kind == "plane":
        spread = p[:, 2].max() - p[:, 2].min()
        if spread > 1e-9 * max(mesh.bounding_diameter(), 1.0):
            raise ValueError("plane oracle requires a planar (z = const) mesh")
        return np.linalg.norm(p - p[source_vertex], axis=1)
    raise ValueError(f"unknown analytic kind {kind!r}")


def mean_relative_error(phi, phi_true, diameter: float) -> float:
    """Mean over vertices of |phi - phi_true| / max(phi_true, 0.05 diam).

    The floor avoids division blowup near sources.
    """
    phi = np.asarray(phi, dtype=np.float64)
    phi_true = np.asarray(phi_true, dtype=np.float64)
    denom = np.maximum(phi_true, 0.05 * diameter)
    return float(np.mean(np.abs(phi - phi_true) / denom))


@dataclass(frozen=True)
class ViolationReport:
    max_symmetry: float  # |phi_x(y) - phi_y(x)| / diameter, worst sampled pair
    max_triangle: float  # max(0, phi_x(z) - phi_x(y) - phi_y(z)) / diameter
    violating_triples: tuple  # (x, y, z, violation, collinearity) rows


def metric_violation_scan(
    phi_by_source: dict,
    diameter: float,
    num_pairs: int = 50,
    num_triples: int = 200,
    seed: int = 0,
) -> ViolationReport:
    """Sampled scan of metric-property violations of a family of fields.

    `phi_by_source` maps a source vertex to its full distance field. Pairs
    are sampled among sources for the symmetry check; triples take two
    sources plus an arbitrary vertex for the triangle inequality.
    """
    sources = sorted(phi_by_source)
    if len(sources) < 2:
        raise ValueError("need at least 2 source fields")
    nv = len(phi_by_source[sources[0]])
    rng = np.random.default_rng(seed)

    max_sym = 0.0
    for _ in range(num_pairs):
        x, y = rng.choice(len(sources), size=2, replace=False)
        sx, sy = sources[x], sources[y]
        viol = abs(phi_by_source[sx][sy] - phi_by_source[sy][sx]) / diameter
        max_sym = max(max_sym, float(viol))

    max_tri = 0.0
    violating = []
    for _ in range(num_triples):
        x, y = rng.choice(len(sources), size=2, replace=False)
        sx, sy = sources[x], sources[y]
        z = int(rng.integers(nv))
        lhs = phi_by_source[sx][z]
        rhs = phi_by_source[sx][sy] + phi_by_source[sy][z]
        viol = max(0.0, float(lhs - rhs)) / diameter
        if viol > 0.0:
            # near-collinearity: how close the detour through y is to direct
            collinearity = float(rhs / lhs) if lhs > 0 else 1.0
            violating.append((sx, sy, z, viol, collinearity))
        max_tri = max(max_tri, viol)
    violating.sort(key=lambda row: -row[3])
    return ViolationReport(max_sym, max_tri, tuple(violating))


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    h: float
    linf_error: float
    mean_relative_error: float
    observed_order: float  # nan for the first level


def _study_mesh(family: str, level: int):
    if family == "icosphere":
        mesh = icosphere(level)
        # source: vertex closest to the north pole
        src = int(np.argmax(mesh.positions[:, 2]))
        truth = analytic_distance("sphere", mesh, src)
        return mesh, src, truth
    if family == "grid":
        # fixed unit square so refinement shrinks h instead of growing the domain
        mesh = grid(level, level, 1.0 / (level - 1))
        src = int((level // 2) * level + level // 2)
        truth = analytic_distance("plane", mesh, src)
        return mesh, src, truth
    raise ValueError(f"unknown mesh family {family!r}")


def convergence_study(family: str, levels, m: float = 1.0) -> list[ConvergenceRow]:
    """Error of the heat pipeline against the analytic oracle per refinement
    level, with the observed convergence order between consecutive levels."""
    levels = list(levels)
    if not levels:
        raise ValueError("need at least one level")
    rows = []
    prev = None
    for level in levels:
        mesh, src, truth = _study_mesh(family, level)
        solver = heat.build_solver(mesh, m=m)
        phi = heat.geodesic_distance(solver, [src])
        diam = float(truth.max())
        linf = float(np.max(np.abs(phi - truth)))
        mrel = mean_relative_error(phi, truth, diam)
        h = mesh.mean_edge_length()
        order = math.nan
        if prev is not None:
            h_prev, linf_prev = prev
            order = math.log(linf_prev / linf) / math.log(h_prev / h)
        rows.append(ConvergenceRow(level, h, linf, mrel, order))
        prev = (h, linf)
    return rows
