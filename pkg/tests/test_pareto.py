import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from shapely.geometry import box
from shapely.ops import unary_union

from mcmo.pareto import (DecompositionGrid, IncrementalFront, constrained_extract, converged,
                         hv_avg, hv_avg_arrays, hypervolume_2d, non_dominated, select_front)
from mcmo.problem import LOG10, BoxSpace, EvaluationRecord, dominates

points = st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=1, max_size=40)


def brute_force_front(F):
    keep = []
    for i, f in enumerate(F):
        if any(dominates(g, f) for g in F):
            continue
        if any(np.array_equal(F[j], f) for j in keep):
            continue
        keep.append(i)
    return keep


def union_area(F, ref):
    boxes = [box(f[0], f[1], ref[0], ref[1]) for f in F if f[0] < ref[0] and f[1] < ref[1]]
    return unary_union(boxes).area if boxes else 0.0


@settings(max_examples=300, deadline=None)
@given(points)
def test_non_dominated_matches_brute_force(pts):
    F = np.array(pts, dtype=float)
    assert sorted(non_dominated(F).tolist()) == brute_force_front(F)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5)),
                min_size=1, max_size=25))
def test_non_dominated_three_objectives(pts):
    F = np.array(pts, dtype=float)
    assert sorted(non_dominated(F).tolist()) == brute_force_front(F)


def test_duplicates_keep_earliest_in_order():
    F = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 3.0]])
    assert sorted(non_dominated(F, order=[5, 2, 0]).tolist()) == [1, 2]


def test_hypervolume_analytic_values():
    assert hypervolume_2d([[0, 1], [1, 0]], [2, 2]) == 3.0
    assert hypervolume_2d([[0, 0]], [1, 1]) == 1.0
    assert hypervolume_2d([[3, 0]], [2, 2]) == 0.0
    assert hypervolume_2d(np.empty((0, 2)), [2, 2]) == 0.0


@settings(max_examples=200, deadline=None)
@given(points, st.tuples(st.integers(-5, 25), st.integers(-5, 25)))
def test_hypervolume_equals_union_of_boxes(pts, ref):
    F = np.array(pts, dtype=float)
    assert hypervolume_2d(F, ref) == pytest.approx(union_area(F, ref), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(points, points)
def test_hypervolume_monotone_under_insertion(a, b):
    A, B = np.array(a, float), np.array(b, float)
    ref = (25.0, 25.0)
    assert hypervolume_2d(np.vstack([A, B]), ref) >= hypervolume_2d(A, ref)


@settings(max_examples=100, deadline=None)
@given(points)
def test_incremental_front_matches_batch(pts):
    F = np.array(pts, dtype=float)
    front = IncrementalFront()
    hv = []
    for f in F:
        front.add(f)
        hv.append(front.hypervolume((25, 25)))
    expected = F[non_dominated(F)]
    got = front.points[np.lexsort((front.points[:, 1], front.points[:, 0]))]
    assert np.array_equal(got, expected)
    assert np.all(np.diff(hv) >= 0)


def test_grid_cells_partition_space():
    grid = DecompositionGrid(BoxSpace((0.0,), (1.0,)), 4)
    idx = grid.cell_indices(np.array([[0.0], [0.24], [0.25], [0.99], [1.0]]))
    assert idx.tolist() == [0, 0, 1, 3, 3]
    lo, hi = grid.cell_bounds(1)
    assert np.allclose([lo[0], hi[0]], [0.25, 0.5])
    assert np.allclose(grid.cell_midpoint(3), [0.875])


def test_grid_log_space_and_multi_dimension():
    grid = DecompositionGrid(BoxSpace((1e5,), (1e7,), (LOG10,)), 2)
    assert grid.cell_index([9e5]) == 0 and grid.cell_index([2e6]) == 1
    grid2 = DecompositionGrid(BoxSpace((0.0, 0.0), (1.0, 1.0)), (2, 3))
    assert grid2.n_cells == 6
    assert grid2.cell_index([0.9, 0.9]) == 5
    with pytest.raises(ValueError):
        DecompositionGrid(BoxSpace((0.0, 0.0), (1.0, 1.0)), (2, 3, 4))


def _records():
    F = [[1.0, 1.0], [0.5, 2.0], [2.0, 2.0], [0.0, 0.0], [0.1, 0.1]]
    C = [[0.1], [0.2], [0.1], [0.9], [0.6]]
    recs = [EvaluationRecord(i + 1, c, [0.0], f) for i, (c, f) in enumerate(zip(C, F))]
    recs.append(EvaluationRecord(6, [0.1], [0.0], [np.nan, np.nan], failed=True))
    return recs


def test_select_front_and_re_decomposition():
    recs = _records()
    grid = DecompositionGrid(BoxSpace((0.0,), (1.0,)), 2)
    front = select_front(recs, grid, 0)
    assert [r.episode for r in front.members] == [2, 1]
    assert len(select_front(recs, DecompositionGrid(BoxSpace((0.0,), (1.0,)), 1), 0)) == 1
    assert len(select_front([], grid, 0)) == 0


def test_hv_avg_counts_empty_cells_as_zero():
    recs = _records()
    grid = DecompositionGrid(BoxSpace((0.0,), (1.0,)), 4)
    report = hv_avg(recs, grid, (3.0, 3.0))
    assert report.per_cell[1] == 0.0
    assert report.per_cell[2] == pytest.approx(2.9 ** 2)
    assert report.hv_avg == pytest.approx(report.per_cell.sum() / 4)
    C = np.array([r.condition_raw for r in recs if not r.failed])
    F = np.array([r.objectives for r in recs if not r.failed])
    assert np.array_equal(hv_avg_arrays(C, F, grid, (3.0, 3.0)).per_cell, report.per_cell)


def test_constrained_extract():
    F = np.array([[0.0, 3.0], [1.0, 1.0], [2.0, 0.0]])
    assert np.array_equal(constrained_extract(F, 1, 1.5), [1.0, 1.0])
    assert constrained_extract(F, 1, -1.0) is None
    with pytest.raises(ValueError):
        constrained_extract(np.empty((0, 2)), 1, 0.0)


def test_converged():
    assert not converged([1.0, 2.0, 3.0], 3, 0.01)
    assert converged([1.0, 5.0, 5.0, 5.001], 3, 0.01)
    assert not converged([5.0], 3, 0.01)
    with pytest.raises(ValueError):
        converged([1.0], 1, 0.1)
