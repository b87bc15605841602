"""Geodesic distance on triangle meshes via prefactored heat-flow solves."""

from .heat import (
    HeatGeodesicSolver,
    SourceSet,
    build_solver,
    geodesic_distance,
    normalized_negative_gradient,
    recover_distance,
    smoothed_distance,
    solve_heat,
)
from .mesh import TriangleMesh, generate_mesh, grid, icosphere, load_mesh, perturbed_grid, torus
from .operators import cotan_laplacian, face_gradient, mass_matrix, vertex_divergence
from .oracle import analytic_distance, convergence_study, dijkstra_distance, metric_violation_scan
from .sparse import (
    CholeskyFactor,
    NotPositiveDefiniteError,
    SymmetricSparseMatrix,
    assemble,
    compute_ordering,
    factorize,
    matvec,
    solve,
)

__version__ = "0.1.0"
