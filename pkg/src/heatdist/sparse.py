"""Symmetric sparse matrices and simplicial sparse Cholesky.

Storage is compressed-sparse-column over the lower triangle only. The
factorization is an up-looking simplicial Cholesky driven by the elimination
tree; fill-reducing orderings come from an in-repo minimum-degree variant
(quotient graph with element absorption and approximate external degrees).
Hot numeric kernels are JIT-compiled with numba; everything else is numpy.

Factorization and solve calls bump module-level counters so tests can assert
the prefactor-once / solve-many discipline.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from numba import njit


class NotPositiveDefiniteError(Exception):
    def __init__(self, column: int):
        self.column = column
        super().__init__(f"non-positive pivot at column {column}")


# -- instrumentation ------------------------------------------------------------

_counters = {"factorizations": 0, "solves": 0}


def reset_counters():
    _counters["factorizations"] = 0
    _counters["solves"] = 0


def counter_snapshot() -> dict:
    return dict(_counters)


# -- matrix type ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymmetricSparseMatrix:
    """Lower-triangle CSC storage of a symmetric matrix.

    Row indices within each column are strictly increasing and >= the column
    index. Structural entries are kept even when their value is zero.
    """

    n: int
    indptr: np.ndarray  # (n+1,) int64
    indices: np.ndarray  # row indices, int64
    data: np.ndarray  # float64

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        for j in range(self.n):
            lo = self.indptr[j]
            if lo < self.indptr[j + 1] and self.indices[lo] == j:
                d[j] = self.data[lo]
        return d

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for j in range(self.n):
            for p in range(self.indptr[j], self.indptr[j + 1]):
                i = self.indices[p]
                out[i, j] = self.data[p]
                out[j, i] = self.data[p]
        return out

    def triplets(self):
        """Lower-triangle (rows, cols, values) arrays."""
        cols = np.repeat(np.arange(self.n), np.diff(self.indptr))
        return self.indices.copy(), cols, self.data.copy()

    def scale(self, alpha: float) -> "SymmetricSparseMatrix":
        return SymmetricSparseMatrix(self.n, self.indptr, self.indices, self.data * alpha)

    def add(self, other: "SymmetricSparseMatrix") -> "SymmetricSparseMatrix":
        """Entrywise sum on the union pattern."""
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        ri, ci, vi = self.triplets()
        rj, cj, vj = other.triplets()
        return assemble(
            self.n,
            rows=np.concatenate([ri, rj]),
            cols=np.concatenate([ci, cj]),
            values=np.concatenate([vi, vj]),
        )

    def with_added_diagonal(self, diag) -> "SymmetricSparseMatrix":
        diag = np.broadcast_to(np.asarray(diag, dtype=np.float64), (self.n,))
        r, c, v = self.triplets()
        return assemble(
            self.n,
            rows=np.concatenate([r, np.arange(self.n)]),
            cols=np.concatenate([c, np.arange(self.n)]),
            values=np.concatenate([v, diag]),
        )

    def write_matrix_market(self, path):
        """Coordinate-format symmetric real dump for offline validation."""
        with open(path, "w") as fh:
            fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
            fh.write(f"{self.n} {self.n} {self.nnz}\n")
            rows, cols, vals = self.triplets()
            for i, j, v in zip(rows, cols, vals):
                fh.write(f"{i + 1} {j + 1} {v:.17g}\n")


def assemble(dimension: int, triplets=None, *, rows=None, cols=None, values=None) -> SymmetricSparseMatrix:
    """Build a SymmetricSparseMatrix from (row, col, value) triplets.

    Either triangle may be supplied; upper-triangle entries are mirrored into
    the lower triangle and duplicates are summed.
    """
    if triplets is not None:
        arr = np.asarray(list(triplets), dtype=np.float64)
        if arr.size == 0:
            rows = cols = values = np.empty(0)
        else:
            rows, cols, values = arr[:, 0], arr[:, 1], arr[:, 2]
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    values = np.asarray(values, dtype=np.float64).ravel()
    if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= dimension or cols.max() >= dimension):
        raise IndexError("triplet index out of range")

    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    # dedupe on (col, row) keys; summation over duplicates
    keys = lo * dimension + hi
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    vals = values[order]
    uniq, start = np.unique(keys, return_index=True)
    summed = np.add.reduceat(vals, start) if vals.size else vals
    c = uniq // dimension
    r = uniq % dimension
    indptr = np.zeros(dimension + 1, dtype=np.int64)
    np.add.at(indptr, c + 1, 1)
    np.cumsum(indptr, out=indptr)
    return SymmetricSparseMatrix(dimension, indptr, r.astype(np.int64), summed.astype(np.float64))


# -- numba kernels ----------------------------------------------------------------


@njit(cache=True)
def _matvec(n, indptr, indices, data, x):
    out = np.zeros(n)
    for j in range(n):
        xj = x[j]
        for p in range(indptr[j], indptr[j + 1]):
            i = indices[p]
            v = data[p]
            out[i] += v * xj
            if i != j:
                out[j] += v * x[i]
    return out


@njit(cache=True)
def _etree(n, up_indptr, up_indices):
    """Elimination tree from the upper-triangle CSC pattern (Liu)."""
    parent = np.full(n, -1, dtype=np.int64)
    ancestor = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        for p in range(up_indptr[k], up_indptr[k + 1]):
            i = up_indices[p]
            while i != -1 and i < k:
                nxt = ancestor[i]
                ancestor[i] = k
                if nxt == -1:
                    parent[i] = k
                i = nxt
    return parent


@njit(cache=True)
def _symbolic_counts(n, up_indptr, up_indices, parent):
    """Column counts of L via repeated etree traversals (O(nnz(L)))."""
    counts = np.ones(n, dtype=np.int64)  # diagonal entries
    mark = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        mark[k] = k
        for p in range(up_indptr[k], up_indptr[k + 1]):
            i = up_indices[p]
            while i < k and mark[i] != k:
                counts[i] += 1  # L(k, i) structurally nonzero
                mark[i] = k
                i = parent[i]
    return counts


@njit(cache=True)
def _numeric_cholesky(n, up_indptr, up_indices, up_data, diag, parent, Lp):
    """Up-looking Cholesky. `up_*` hold the strict upper triangle by column,
    `diag` the diagonal. Returns (Li, Lx, fail_col)."""
    nnz = Lp[n]
    Li = np.empty(nnz, dtype=np.int64)
    Lx = np.empty(nnz)
    fill = Lp.copy()  # next write position per column; position Lp[j] is diag
    x = np.zeros(n)
    mark = np.full(n, -1, dtype=np.int64)
    pattern = np.empty(n, dtype=np.int64)
    for k in range(n):
        # scatter row k of A (strict upper column k) and collect the row
        # pattern via elimination-tree climbs; pattern[top:n] ends up in
        # topological order (descendants first)
        top = n
        mark[k] = k
        for p in range(up_indptr[k], up_indptr[k + 1]):
            i = up_indices[p]
            if i >= k:
                continue
            x[i] = up_data[p]
            depth = 0
            while mark[i] != k:
                pattern[depth] = i
                depth += 1
                mark[i] = k
                i = parent[i]
            while depth > 0:
                depth -= 1
                top -= 1
                pattern[top] = pattern[depth]
        d = diag[k]
        for t in range(top, n):
            i = pattern[t]
            lki = x[i] / Lx[Lp[i]]
            x[i] = 0.0
            for p in range(Lp[i] + 1, fill[i]):
                x[Li[p]] -= Lx[p] * lki
            d -= lki * lki
            q = fill[i]
            Li[q] = k
            Lx[q] = lki
            fill[i] = q + 1
        if d <= 0.0:
            return Li, Lx, k
        Li[Lp[k]] = k
        Lx[Lp[k]] = np.sqrt(d)
        fill[k] = Lp[k] + 1
    return Li, Lx, -1


@njit(cache=True)
def _lower_solve(n, Lp, Li, Lx, b):
    x = b.copy()
    for j in range(n):
        xj = x[j] / Lx[Lp[j]]
        x[j] = xj
        for p in range(Lp[j] + 1, Lp[j + 1]):
            x[Li[p]] -= Lx[p] * xj
    return x


@njit(cache=True)
def _lower_transpose_solve(n, Lp, Li, Lx, b):
    x = b.copy()
    for j in range(n - 1, -1, -1):
        acc = x[j]
        for p in range(Lp[j] + 1, Lp[j + 1]):
            acc -= Lx[p] * x[Li[p]]
        x[j] = acc / Lx[Lp[j]]
    return x


def warm_up_kernels():
    """Trigger (cached) JIT compilation on a 1x1 problem."""
    m = assemble(1, [(0, 0, 1.0)])
    f = factorize(m, identity_ordering(1))
    solve(f, np.ones(1))
    matvec(m, np.ones(1))
    _counters["factorizations"] -= 1
    _counters["solves"] -= 1


# -- public operations -------------------------------------------------------------


def matvec(matrix: SymmetricSparseMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (matrix.n,):
        raise ValueError("dimension mismatch")
    return _matvec(matrix.n, matrix.indptr, matrix.indices, matrix.data, x)


def identity_ordering(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def compute_ordering(matrix: SymmetricSparseMatrix, method: str = "mindeg") -> np.ndarray:
    """Fill-reducing permutation; perm[k] is the vertex eliminated k-th.

    `method="mindeg"` runs a minimum-degree variant on the quotient graph
    with element absorption; `method="natural"` returns the identity (kept
    selectable for differential testing).
    """
    if method == "natural":
        return identity_ordering(matrix.n)
    if method != "mindeg":
        raise ValueError(f"unknown ordering method {method!r}")
    return _minimum_degree(matrix)


def _adjacency_sets(matrix: SymmetricSparseMatrix):
    adj = [set() for _ in range(matrix.n)]
    rows, cols, _ = matrix.triplets()
    for i, j in zip(rows, cols):
        if i != j:
            adj[i].add(int(j))
            adj[j].add(int(i))
    return adj


def _minimum_degree(matrix: SymmetricSparseMatrix) -> np.ndarray:
    """Minimum external degree with quotient-graph element absorption.

    Degrees are the standard cheap upper bound |A_i| + sum(|L_e| - 1), which
    keeps each update linear in the size of the new element.
    """
    n = matrix.n
    adj = _adjacency_sets(matrix)  # uneliminated neighbors via original edges
    elems = [set() for _ in range(n)]  # adjacent elements (eliminated pivots)
    boundary = {}  # element -> set of live boundary vars
    alive = np.ones(n, dtype=bool)
    degree = np.array([len(a) for a in adj], dtype=np.int64)
    heap = [(int(degree[i]), i) for i in range(n)]
    heapq.heapify(heap)
    perm = np.empty(n, dtype=np.int64)

    for k in range(n):
        while True:
            d, v = heapq.heappop(heap)
            if alive[v] and d == degree[v]:
                break
        perm[k] = v
        alive[v] = False

        # new element: all live vars reachable through v
        front = set(adj[v])
        for e in elems[v]:
            front |= boundary.pop(e)
        front.discard(v)
        dead_elems = elems[v]

        for u in front:
            au = adj[u]
            au.discard(v)
            if au:
                adj[u] = au - front  # edges absorbed into the element
            eu = elems[u]
            if dead_elems:
                eu -= dead_elems
            eu.add(v)
            deg = len(adj[u])
            for e in eu:
                deg += len(boundary[e]) - 1 if e != v else len(front) - 1
            degree[u] = deg
            heapq.heappush(heap, (deg, u))
        boundary[v] = front
        elems[v] = set()
    return perm


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """Reusable LL^T factor of P M P^T with fill-reducing permutation P."""

    n: int
    perm: np.ndarray  # perm[k] = original index in position k
    parent: np.ndarray  # elimination tree of the permuted matrix
    indptr: np.ndarray  # CSC column pointers of L
    indices: np.ndarray
    data: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.indices.size)


def _permute_lower(matrix: SymmetricSparseMatrix, perm):
    """Rows/cols/values of B = P M P^T, in lower-triangle form."""
    iperm = np.empty(matrix.n, dtype=np.int64)
    iperm[perm] = np.arange(matrix.n)
    rows, cols, vals = matrix.triplets()
    pr = iperm[rows]
    pc = iperm[cols]
    lo = np.minimum(pr, pc)
    hi = np.maximum(pr, pc)
    return hi, lo, vals  # (row, col, value) with row >= col


def _upper_csc(n, rows, cols, vals):
    """Strict-upper CSC arrays plus dense diagonal from lower triplets."""
    diag = np.zeros(n)
    on_diag = rows == cols
    np.add.at(diag, rows[on_diag], vals[on_diag])
    r = rows[~on_diag]
    c = cols[~on_diag]
    v = vals[~on_diag]
    # entry (r, c) with r > c sits in the strict upper triangle as (c, r):
    # column r, row c
    order = np.lexsort((c, r))
    up_cols = r[order]
    up_rows = c[order]
    up_vals = v[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, up_cols + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, up_rows.astype(np.int64), up_vals.astype(np.float64), diag


def factorize(matrix: SymmetricSparseMatrix, ordering=None) -> CholeskyFactor:
    """Sparse Cholesky P M P^T = L L^T; raises NotPositiveDefiniteError with
    the failing column when M is not SPD."""
    n = matrix.n
    perm = identity_ordering(n) if ordering is None else np.asarray(ordering, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("ordering is not a permutation")
    rows, cols, vals = _permute_lower(matrix, perm)
    up_indptr, up_indices, up_data, diag = _upper_csc(n, rows, cols, vals)
    parent = _etree(n, up_indptr, up_indices)
    counts = _symbolic_counts(n, up_indptr, up_indices, parent)
    Lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=Lp[1:])
    Li, Lx, fail = _numeric_cholesky(n, up_indptr, up_indices, up_data, diag, parent, Lp)
    if fail >= 0:
        raise NotPositiveDefiniteError(int(fail))
    _counters["factorizations"] += 1
    return CholeskyFactor(n, perm, parent, Lp, Li, Lx)


def solve(factor: CholeskyFactor, rhs) -> np.ndarray:
    """Solve M x = rhs using the prefactored L; safe to call concurrently."""
    b = np.asarray(rhs, dtype=np.float64)
    if b.shape != (factor.n,):
        raise ValueError("dimension mismatch")
    pb = b[factor.perm]
    y = _lower_solve(factor.n, factor.indptr, factor.indices, factor.data, pb)
    z = _lower_transpose_solve(factor.n, factor.indptr, factor.indices, factor.data, y)
    x = np.empty_like(z)
    x[factor.perm] = z
    _counters["solves"] += 1
    return x


def factor_matrix_dense(factor: CholeskyFactor) -> np.ndarray:
    """Dense L (in permuted order); test/debug helper."""
    L = np.zeros((factor.n, factor.n))
    for j in range(factor.n):
        for p in range(factor.indptr[j], factor.indptr[j + 1]):
            L[factor.indices[p], j] = factor.data[p]
    return L
