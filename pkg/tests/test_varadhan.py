from fractions import Fraction

import numpy as np
import pytest

from heatdist.mesh import icosphere
from heatdist.varadhan import (
    SingularSystemError,
    bfs_distance,
    exact_solve,
    first_nonzero_power_index,
    graph_laplacian,
    grid_adjacency,
    mesh_adjacency,
    operator_norm_bound,
    varadhan_exponent,
)


def path_adjacency(n):
    a = np.zeros((n, n), dtype=object)
    for i in range(n - 1):
        a[i][i + 1] = a[i + 1][i] = 1
    return a


# -- exact solve -------------------------------------------------------------


def test_exact_solve_1x1():
    u = exact_solve(np.array([[0]], dtype=object), Fraction(1, 2), [1])
    assert u == [Fraction(1)]


def test_exact_solve_path_of_two():
    u = exact_solve(path_adjacency(2), Fraction(1, 10), [1, 0])
    assert u == [Fraction(100, 99), Fraction(10, 99)]


def test_exact_solve_singular():
    # t = 1/sigma makes I - tA singular for the 2-path (sigma = 1)
    with pytest.raises(SingularSystemError):
        exact_solve(path_adjacency(2), Fraction(1), [1, 0])


def test_exact_solve_residual_is_exactly_zero():
    a = grid_adjacency(3, 3)
    t = Fraction(1, 100)
    delta = [0] * 9
    delta[4] = 1
    u = exact_solve(a, t, delta)
    for i in range(9):
        acc = u[i] - t * sum(Fraction(int(a[i][j])) * u[j] for j in range(9))
        assert acc == delta[i]


def test_exact_solve_input_validation():
    with pytest.raises(ValueError):
        exact_solve(np.zeros((2, 3), dtype=object), Fraction(1, 2), [1, 0])
    with pytest.raises(ValueError):
        exact_solve(path_adjacency(2), Fraction(-1, 2), [1, 0])


def test_operator_norm_bound():
    assert operator_norm_bound(path_adjacency(4)) == 2
    assert operator_norm_bound(grid_adjacency(3, 3)) == 4


# -- bfs ---------------------------------------------------------------------


def test_bfs_path():
    np.testing.assert_array_equal(bfs_distance(path_adjacency(4), 0), [0, 1, 2, 3])


def test_bfs_3x3_grid_manhattan():
    d = bfs_distance(grid_adjacency(3, 3), 0)
    expected = [abs(i) + abs(j) for i in range(3) for j in range(3)]
    np.testing.assert_array_equal(d, expected)


def test_bfs_source_validation():
    with pytest.raises(IndexError):
        bfs_distance(path_adjacency(3), 5)


# -- exponent limit ----------------------------------------------------------


def test_exponent_at_source_approaches_zero():
    a = grid_adjacency(4, 4)
    rows = varadhan_exponent(a, 0, [Fraction(1, 10**6), Fraction(1, 10**8)])
    assert abs(rows[0][0]) < 1e-4
    assert abs(rows[1][0]) < abs(rows[0][0])


def test_exponent_tracks_bfs_on_grid():
    a = grid_adjacency(5, 5)
    bfs = bfs_distance(a, 12)
    rows = varadhan_exponent(a, 12, [Fraction(1, 10**8)])
    assert np.max(np.abs(rows[0] - bfs)) < 0.25


def test_exponent_deviation_tightens():
    a = grid_adjacency(4, 4)
    bfs = bfs_distance(a, 5)
    rows = varadhan_exponent(
        a, 5, [Fraction(1, 10**6), Fraction(1, 10**10)]
    )
    dev_coarse = np.abs(rows[0] - bfs)
    dev_fine = np.abs(rows[1] - bfs)
    non_source = np.arange(16) != 5
    assert (dev_fine[non_source] < dev_coarse[non_source]).all()


def test_exponent_rejects_bad_t_sequence():
    a = path_adjacency(3)
    with pytest.raises(ValueError, match="decreasing"):
        varadhan_exponent(a, 0, [Fraction(1, 10), Fraction(1, 10)])
    with pytest.raises(ValueError, match="below 1/sigma"):
        varadhan_exponent(a, 0, [Fraction(1, 2)])


def test_exponent_with_graph_laplacian_runs():
    # cancellation is possible for non-adjacency matrices; only check the
    # pipeline completes with finite-or-inf output
    lap = graph_laplacian(grid_adjacency(2, 2))
    rows = varadhan_exponent(lap, 0, [Fraction(1, 10**6)])
    assert rows[0].shape == (4,)
    assert not np.isnan(rows[0]).any()


# -- series index -------------------------------------------------------------


def test_first_nonzero_power_equals_bfs_for_adjacency():
    for a in (path_adjacency(5), grid_adjacency(4, 4)):
        bfs = bfs_distance(a, 0)
        np.testing.assert_array_equal(first_nonzero_power_index(a, 0), bfs)


def test_first_nonzero_power_on_mesh_graph():
    mesh = icosphere(0)
    a = mesh_adjacency(mesh)
    np.testing.assert_array_equal(
        first_nonzero_power_index(a, 0), bfs_distance(a, 0)
    )
