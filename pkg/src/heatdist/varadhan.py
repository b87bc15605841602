"""Exact-arithmetic small-time limit: log u_t / log t approaches graph distance.

Solves (I - t A) u_t = delta in exact rational arithmetic (fraction-free
Bareiss elimination over Python integers) for a symmetric integer matrix A,
then evaluates log u_t / log t with high-precision logarithms. As t shrinks,
the per-vertex exponent approaches the combinatorial (edge-count) distance
from the source.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction

import mpmath
import numpy as np

from .mesh import TriangleMesh

LOG_PRECISION_DPS = 50


class SingularSystemError(Exception):
    """The exact system I - tA is singular (t was not below 1/sigma)."""


def operator_norm_bound(matrix) -> int:
    """Max absolute row sum: a cheap upper bound on the operator norm."""
    m = np.asarray(matrix, dtype=object)
    return int(max(sum(abs(int(v)) for v in row) for row in m))


def exact_solve(matrix, t: Fraction, rhs) -> list[Fraction]:
    """Exact solution of (I - t A) u = rhs for integer symmetric A.

    Scales by the denominator of t to an all-integer system, runs
    fraction-free (Bareiss) Gaussian elimination with row pivoting, and back
    substitutes in rational arithmetic.
    """
    a = np.asarray(matrix, dtype=object)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    t = Fraction(t)
    if t <= 0:
        raise ValueError("t must be positive")
    p, q = t.numerator, t.denominator

    # augmented integer matrix of q (I - tA) u = q rhs
    m = [[0] * (n + 1) for _ in range(n)]
    for i in range(n):
        for j in range(n):
            m[i][j] = -p * int(a[i][j])
        m[i][i] += q
    rvec = list(rhs)
    for i in range(n):
        ri = Fraction(rvec[i]) * q
        if ri.denominator != 1:
            raise ValueError("rhs must scale to integers with t's denominator")
        m[i][n] = ri.numerator

    # Bareiss fraction-free elimination
    prev = 1
    for k in range(n):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    break
            else:
                raise SingularSystemError(f"zero pivot column {k}")
        for i in range(k + 1, n):
            for j in range(k + 1, n + 1):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    if m[n - 1][n - 1] == 0:
        raise SingularSystemError(f"zero pivot column {n - 1}")

    x: list[Fraction] = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(m[i][n])
        for j in range(i + 1, n):
            acc -= m[i][j] * x[j]
        x[i] = acc / m[i][i]
    return x


def _log_fraction(f: Fraction) -> mpmath.mpf:
    with mpmath.workdps(LOG_PRECISION_DPS):
        return mpmath.log(mpmath.mpf(f.numerator)) - mpmath.log(mpmath.mpf(f.denominator))


def varadhan_exponent(matrix, source: int, t_sequence) -> list[np.ndarray]:
    """Per-vertex log u_t / log t for each t in a decreasing sequence.

    Vertices where u_t = 0 exactly (possible with cancellation or on
    disconnected graphs) get +inf.
    """
    a = np.asarray(matrix, dtype=object)
    n = a.shape[0]
    if not 0 <= source < n:
        raise IndexError("source out of range")
    ts = [Fraction(t) for t in t_sequence]
    if any(t2 >= t1 for t1, t2 in zip(ts, ts[1:])):
        raise ValueError("t_sequence must be strictly decreasing")
    sigma = operator_norm_bound(a)
    if sigma > 0 and any(t >= Fraction(1, sigma) for t in ts):
        raise ValueError("every t must be below 1/sigma (max abs row sum)")

    delta = [0] * n
    delta[source] = 1
    results = []
    for t in ts:
        u = exact_solve(a, t, delta)
        log_t = _log_fraction(t)
        row = np.empty(n)
        for v in range(n):
            if u[v] == 0:
                row[v] = np.inf
            else:
                with mpmath.workdps(LOG_PRECISION_DPS):
                    row[v] = float(_log_fraction(abs(u[v])) / log_t)
        results.append(row)
    return results


def bfs_distance(adjacency_or_matrix, source: int) -> np.ndarray:
    """Graph distance in edge counts; unreachable vertices get -1."""
    a = np.asarray(adjacency_or_matrix, dtype=object)
    n = a.shape[0]
    if not 0 <= source < n:
        raise IndexError("source out of range")
    neighbors = [[j for j in range(n) if j != i and a[i][j] != 0] for i in range(n)]
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in neighbors[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def first_nonzero_power_index(matrix, source: int, max_power: int | None = None) -> np.ndarray:
    """min{k : (A^k delta)_v != 0} per vertex, -1 if never within max_power.

    For 0/1 adjacency matrices this equals the BFS distance (walk counts are
    positive, so no cancellation can occur).
    """
    a = np.asarray(matrix, dtype=object)
    n = a.shape[0]
    limit = n if max_power is None else max_power
    vec = np.zeros(n, dtype=object)
    vec[source] = 1
    out = np.full(n, -1, dtype=np.int64)
    out[source] = 0
    for k in range(1, limit + 1):
        vec = a @ vec
        newly = (out < 0) & (vec != 0)
        out[newly] = k
        if (out >= 0).all():
            break
    return out


def grid_adjacency(nx: int, ny: int) -> np.ndarray:
    """0/1 adjacency of the 4-connected nx x ny grid graph."""
    if nx < 1 or ny < 1:
        raise ValueError("grid dimensions must be positive")
    n = nx * ny
    a = np.zeros((n, n), dtype=object)
    for i in range(nx):
        for j in range(ny):
            v = i * ny + j
            if i + 1 < nx:
                a[v][v + ny] = a[v + ny][v] = 1
            if j + 1 < ny:
                a[v][v + 1] = a[v + 1][v] = 1
    return a


def mesh_adjacency(mesh: TriangleMesh) -> np.ndarray:
    """0/1 adjacency of a mesh's edge graph."""
    n = mesh.num_vertices
    a = np.zeros((n, n), dtype=object)
    for i, j in mesh.edges:
        a[i][j] = a[j][i] = 1
    return a


def graph_laplacian(adjacency) -> np.ndarray:
    """Combinatorial Laplacian D - A as an integer matrix."""
    a = np.asarray(adjacency, dtype=object)
    n = a.shape[0]
    lap = -a.copy()
    for i in range(n):
        lap[i][i] += sum(int(v) for v in a[i])
    return lap
