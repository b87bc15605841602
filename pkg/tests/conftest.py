import numpy as np
import pytest

from heatdist import sparse
from heatdist.mesh import grid, icosphere, perturbed_grid, torus


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # keep JIT compilation out of individual tests (and out of timings)
    sparse.warm_up_kernels()


@pytest.fixture(scope="session")
def ico2():
    return icosphere(2)


@pytest.fixture(scope="session")
def ico3():
    return icosphere(3)


@pytest.fixture(scope="session")
def ico4():
    return icosphere(4)


@pytest.fixture(scope="session")
def grid11():
    return grid(11, 11, 1.0)


@pytest.fixture(scope="session")
def operator_mesh_zoo():
    return {
        "grid": grid(12, 12, 1.0),
        "perturbed_grid": perturbed_grid(12, 12, 1.0, 0.3, 1234),
        "icosphere2": icosphere(2),
        "icosphere3": icosphere(3),
        "torus": torus(2.0, 0.7, 16, 12),
    }


def random_spd_graph_laplacian(n, num_edges, seed, shift=1.0):
    """Graph Laplacian plus shift * I: SPD test matrix."""
    rng = np.random.default_rng(seed)
    rows, cols, vals = [], [], []
    for _ in range(num_edges):
        i, j = rng.integers(n, size=2)
        if i == j:
            continue
        w = float(rng.uniform(0.5, 2.0))
        rows += [i, i, j]
        cols += [j, i, j]
        vals += [-w, w, w]
    rows += list(range(n))
    cols += list(range(n))
    vals += [shift] * n
    return sparse.assemble(n, rows=rows, cols=cols, values=vals)
