import numpy as np
import pytest

from survmlp.timegrid import build_grid, indicator, indicator_matrix, interval_index


def test_default_horizon_unit_spacing():
    grid = build_grid(400.0, 1.0)
    assert grid.k == 400
    np.testing.assert_array_equal(grid.points, np.arange(401.0))


def test_single_interval():
    grid = build_grid(1.0, 1.0)
    assert grid.k == 1
    np.testing.assert_array_equal(grid.points, [0.0, 1.0])


def test_non_dividing_spacing_rounds_up():
    grid = build_grid(82.0, 10.0)
    assert grid.k == 9
    assert grid.end == 90.0
    assert grid.end >= grid.t_max


def test_fine_spacing_no_float_noise():
    assert build_grid(400.0, 0.1).k == 4000
    assert build_grid(0.9, 0.3).k == 3


def test_build_grid_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_grid(0.0, 1.0)
    with pytest.raises(ValueError):
        build_grid(10.0, -1.0)
    with pytest.raises(ValueError):
        build_grid(1.0, 2.0)


def test_interval_index_interior():
    grid = build_grid(5.0, 1.0)
    assert interval_index(2.5, grid) == 2


def test_interval_index_right_closed_boundary():
    grid = build_grid(5.0, 1.0)
    assert interval_index(3.0, grid) == 2


def test_interval_index_time_zero_clamps_to_first():
    grid = build_grid(5.0, 1.0)
    assert interval_index(0.0, grid) == 0


def test_interval_index_end_of_grid():
    grid = build_grid(5.0, 1.0)
    assert interval_index(5.0, grid) == 4


def test_interval_index_out_of_range_rejected():
    grid = build_grid(5.0, 1.0)
    with pytest.raises(ValueError, match="outside"):
        interval_index(-0.5, grid)
    with pytest.raises(ValueError, match="outside"):
        interval_index(5.5, grid)


def test_interval_index_roundtrip_random_times():
    grid = build_grid(7.0, 0.5)
    rng = np.random.default_rng(0)
    for i in range(grid.k):
        for t in grid.points[i] + grid.epsilon * rng.uniform(1e-9, 1.0, 20):
            assert interval_index(float(t), grid) == i
        assert interval_index(float(grid.points[i + 1]), grid) == i


def test_indicator_uncensored_one_hot():
    grid = build_grid(5.0, 1.0)
    mask = indicator(2.5, False, grid)
    np.testing.assert_array_equal(mask.bits, [0, 0, 1, 0, 0])
    assert mask.observed_index == 2


def test_indicator_censored_suffix():
    grid = build_grid(5.0, 1.0)
    mask = indicator(2.5, True, grid)
    np.testing.assert_array_equal(mask.bits, [0, 0, 1, 1, 1])


def test_indicator_last_interval_boundary():
    grid = build_grid(5.0, 1.0)
    mask = indicator(5.0, False, grid)
    np.testing.assert_array_equal(mask.bits, [0, 0, 0, 0, 1])
    assert mask.observed_index == grid.k - 1


def test_censored_mask_is_or_of_uncensored_suffix():
    grid = build_grid(6.0, 1.0)
    for i in range(grid.k):
        t = grid.points[i] + 0.5 * grid.epsilon
        censored = indicator(float(t), True, grid).bits
        union = np.zeros(grid.k, dtype=bool)
        for j in range(i, grid.k):
            tj = grid.points[j] + 0.5 * grid.epsilon
            union |= indicator(float(tj), False, grid).bits
        np.testing.assert_array_equal(censored, union)


def test_halving_epsilon_doubles_k():
    assert build_grid(8.0, 0.5).k == 2 * build_grid(8.0, 1.0).k


def test_indicator_matrix_batches():
    grid = build_grid(3.0, 1.0)
    masks = indicator_matrix([0.5, 1.5, 1.5], [1, 0, 1], grid)
    np.testing.assert_array_equal(masks, [[1, 0, 0], [0, 1, 1], [0, 1, 0]])


def test_simpson_nodes_interleave_midpoints():
    grid = build_grid(2.0, 1.0)
    np.testing.assert_array_equal(grid.simpson_nodes(), [0.0, 0.5, 1.0, 1.5, 2.0])
