"""Discrete differential operators on triangle meshes.

Cotan stiffness operator, lumped (barycentric) vertex mass, per-face gradient
of piecewise-linear fields, and per-vertex integrated divergence of per-face
vector fields. Sign conventions:

* ``cotan_laplacian`` returns L with positive off-diagonal weights
  0.5 (cot a + cot b) and negative diagonal, so -L is the positive
  semidefinite Dirichlet-energy (stiffness) form.
* ``vertex_divergence`` follows the smooth convention: summing u_i * div_i
  over a closed mesh equals MINUS the mass-weighted inner product of the
  face gradients of u with the field.

Together these make ``L phi = div X`` the normal equations of the
least-squares problem min |grad phi - X|^2.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh
from .sparse import SymmetricSparseMatrix, assemble


def check_vertex_field(mesh: TriangleMesh, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (mesh.num_vertices,):
        raise ValueError("vertex field length mismatch")
    if not np.isfinite(u).all():
        raise ValueError("vertex field has non-finite values")
    return u


def check_face_field(mesh: TriangleMesh, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (mesh.num_faces, 3):
        raise ValueError("face field shape mismatch")
    return X


def cotan_laplacian(mesh: TriangleMesh) -> SymmetricSparseMatrix:
    """Cotan operator: off-diagonal (i, j) = 0.5 (cot a_ij + cot b_ij),
    diagonal = minus the off-diagonal row sum. Negative semidefinite with the
    constant vector in its kernel."""
    f = mesh.faces
    cot = mesh.face_cotans
    rows, cols, vals = [], [], []
    for c in range(3):
        j = f[:, (c + 1) % 3]
        k = f[:, (c + 2) % 3]
        w = 0.5 * cot[:, c]
        rows.append(j)
        cols.append(k)
        vals.append(w)
        rows.append(j)
        cols.append(j)
        vals.append(-w)
        rows.append(k)
        cols.append(k)
        vals.append(-w)
    return assemble(
        mesh.num_vertices,
        rows=np.concatenate(rows),
        cols=np.concatenate(cols),
        values=np.concatenate(vals),
    )


def mass_matrix(mesh: TriangleMesh) -> np.ndarray:
    """Diagonal of the lumped mass matrix: one third of the area of all
    triangles incident on each vertex. Trace equals total surface area."""
    a = np.zeros(mesh.num_vertices)
    np.add.at(a, mesh.faces.ravel(), np.repeat(mesh.face_areas / 3.0, 3))
    return a


def face_gradient(mesh: TriangleMesh, u) -> np.ndarray:
    """Per-face constant gradient of the piecewise-linear interpolant of u:
    (1 / 2 A_f) sum_i u_i (N x e_i) with e_i the edge opposite corner i."""
    u = check_vertex_field(mesh, u)
    e = mesh.face_corner_edges  # (F, 3, 3)
    n = mesh.face_normals  # (F, 3)
    uf = u[mesh.faces]  # (F, 3)
    rot = np.cross(n[:, None, :], e)  # (F, 3, 3)
    g = np.einsum("fc,fcd->fd", uf, rot)
    g /= (2.0 * mesh.face_areas)[:, None]
    return g


def vertex_divergence(mesh: TriangleMesh, X) -> np.ndarray:
    """Integrated divergence per vertex:
    0.5 sum over incident faces of cot t1 (e1 . X) + cot t2 (e2 . X),
    where e1, e2 are the edges of the face leaving the vertex and t1, t2 the
    respectively opposing angles."""
    X = check_face_field(mesh, X)
    f = mesh.faces
    cot = mesh.face_cotans
    e = mesh.face_corner_edges
    div = np.zeros(mesh.num_vertices)
    for c in range(3):
        b = (c + 1) % 3
        k = (c + 2) % 3
        # edges leaving corner c: toward corner b is -e_k, toward corner k
        # is e_b negated; opposing angles sit at corners k and b
        e1 = e[:, k]  # p_b - p_c ... oriented as corner-k opposite edge
        e2 = -e[:, b]
        contrib = 0.5 * (
            cot[:, k] * np.einsum("fd,fd->f", e1, X)
            + cot[:, b] * np.einsum("fd,fd->f", e2, X)
        )
        np.add.at(div, f[:, c], contrib)
    return div


def gradient_matrix(mesh: TriangleMesh) -> np.ndarray:
    """Dense (3F, V) matrix G with face_gradient(u) = (G u).reshape(F, 3).

    Desk-scale helper used to certify operators against each other.
    """
    G = np.zeros((3 * mesh.num_faces, mesh.num_vertices))
    e = mesh.face_corner_edges
    n = mesh.face_normals
    rot = np.cross(n[:, None, :], e) / (2.0 * mesh.face_areas)[:, None, None]
    for c in range(3):
        for d in range(3):
            G[3 * np.arange(mesh.num_faces) + d, mesh.faces[:, c]] += rot[:, c, d]
    return G


def face_area_weights(mesh: TriangleMesh) -> np.ndarray:
    """Diagonal of M_f for flattened (3F,) face fields."""
    return np.repeat(mesh.face_areas, 3)


def divergence_matrix(mesh: TriangleMesh) -> np.ndarray:
    """Dense (V, 3F) matrix D with vertex_divergence(X) = D X.ravel().

    Satisfies D = -G^T M_f (smooth sign convention), hence
    cotan_laplacian = D G = -G^T M_f G.
    """
    G = gradient_matrix(mesh)
    return -(G.T * face_area_weights(mesh)).astype(np.float64)
