"""Condition-space decomposition, Pareto front selection and hypervolume."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._validation import check_matrix, check_positive_int, check_vector
from .problem import BoxSpace, EvaluationRecord


class DecompositionGrid:
    """Equal-width cells over a condition space, in normalized coordinates.

    ``n_cells`` is an int for one condition dimension, or one count per
    dimension. The upper edge of the last cell along each axis is inclusive,
    so every point of the space lands in exactly one cell.
    """

    def __init__(self, condition_space: BoxSpace, n_cells=100):
        self.condition_space = condition_space
        shape = np.atleast_1d(n_cells).astype(int)
        if len(shape) == 1 and condition_space.dim > 1:
            shape = np.repeat(shape, condition_space.dim)
        if len(shape) != condition_space.dim:
            raise ValueError("need one cell count per condition dimension")
        for s in shape:
            check_positive_int(int(s), "n_cells")
        self.shape = tuple(int(s) for s in shape)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    def __repr__(self) -> str:
        return f"DecompositionGrid(n_cells={self.shape if len(self.shape) > 1 else self.shape[0]})"

    def cell_indices(self, conditions) -> np.ndarray:
        """Flat cell index for each row of ``conditions`` (raw coordinates)."""
        c = np.asarray(conditions, dtype=np.float64).reshape(-1, self.condition_space.dim)
        u = self.condition_space.normalize(c)
        shape = np.array(self.shape)
        idx = np.floor((u + 1.0) * 0.5 * shape).astype(np.int64)
        idx = np.clip(idx, 0, shape - 1)
        return np.ravel_multi_index(tuple(idx.T), self.shape)

    def cell_index(self, c_raw) -> int:
        return int(self.cell_indices(c_raw)[0])

    def cell_bounds(self, cell: int) -> tuple[np.ndarray, np.ndarray]:
        """Raw lower and upper corners of ``cell``."""
        multi = np.array(np.unravel_index(cell, self.shape))
        shape = np.array(self.shape)
        lo = -1.0 + 2.0 * multi / shape
        hi = -1.0 + 2.0 * (multi + 1) / shape
        space = self.condition_space
        return space.denormalize(np.clip(lo, -1, 1)), space.denormalize(np.clip(hi, -1, 1))

    def cell_midpoint(self, cell: int) -> np.ndarray:
        multi = np.array(np.unravel_index(cell, self.shape))
        mid = -1.0 + 2.0 * (multi + 0.5) / np.array(self.shape)
        return self.condition_space.denormalize(mid)


def cell_index(grid: DecompositionGrid, c_raw) -> int:
    return grid.cell_index(c_raw)


def non_dominated(objectives, order=None) -> np.ndarray:
    """Indices of the non-dominated rows of ``objectives`` (minimization).

    Exact duplicates keep only the row that comes first in ``order``
    (default: row order). Returned indices are sorted by the first objective.
    """
    F = np.asarray(objectives, dtype=np.float64)
    n = len(F)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    if order is None:
        order = np.arange(n)
    order = np.asarray(order)
    if F.shape[1] == 2:
        idx = np.lexsort((order, F[:, 1], F[:, 0]))
        f2 = F[idx, 1]
        best_before = np.concatenate([[np.inf], np.minimum.accumulate(f2)[:-1]])
        return idx[f2 < best_before]
    # general m: O(n^2) filter
    idx = np.lexsort((order,) + tuple(F[:, k] for k in reversed(range(F.shape[1]))))
    kept: list[int] = []
    for i in idx:
        fi = F[i]
        if any(np.all(F[j] <= fi) for j in kept):
            continue
        kept = [j for j in kept if not (np.all(fi <= F[j]) and np.any(fi < F[j]))]
        kept.append(i)
    return np.array(sorted(kept, key=lambda j: tuple(F[j])), dtype=np.int64)


@dataclass
class ParetoFront:
    """Non-dominated records of one condition cell."""

    cell: int
    members: list[EvaluationRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def objectives(self) -> np.ndarray:
        if not self.members:
            return np.empty((0, 0))
        return np.vstack([r.objectives for r in self.members])


def _successful(records: Sequence[EvaluationRecord]) -> list[EvaluationRecord]:
    return [r for r in records if not r.failed]


def select_front(records: Sequence[EvaluationRecord], grid: DecompositionGrid, cell: int) -> ParetoFront:
    """Non-dominated subset of the successful records whose condition is in ``cell``."""
    ok = _successful(records)
    if not ok:
        return ParetoFront(cell)
    cells = grid.cell_indices(np.vstack([r.condition_raw for r in ok]))
    in_cell = [r for r, k in zip(ok, cells) if k == cell]
    if not in_cell:
        return ParetoFront(cell)
    F = np.vstack([r.objectives for r in in_cell])
    episodes = np.array([r.episode for r in in_cell])
    keep = non_dominated(F, order=episodes)
    return ParetoFront(cell, [in_cell[i] for i in keep])


def hypervolume_2d(front, reference) -> float:
    """Exact area dominated by ``front`` and bounded by ``reference``.

    Points not strictly better than the reference in both objectives add nothing.
    """
    ref = check_vector(reference, "reference", 2)
    F = np.asarray(front, dtype=np.float64)
    if F.size == 0:
        return 0.0
    F = check_matrix(F, "front", 2)
    F = F[np.all(F < ref, axis=1)]
    if len(F) == 0:
        return 0.0
    F = F[non_dominated(F)]
    prev = np.concatenate([[ref[1]], F[:-1, 1]])
    return float(np.sum((ref[0] - F[:, 0]) * (prev - F[:, 1])))


@dataclass
class HVReport:
    per_cell: np.ndarray
    hv_avg: float
    reference: np.ndarray


def hv_avg_arrays(conditions, objectives, grid: DecompositionGrid, reference) -> HVReport:
    """Mean per-cell hypervolume over all ``grid`` cells; empty cells count as 0."""
    ref = check_vector(reference, "reference", 2)
    per_cell = np.zeros(grid.n_cells)
    F = np.asarray(objectives, dtype=np.float64)
    if len(F):
        cells = grid.cell_indices(conditions)
        inside = np.all(F < ref, axis=1)
        cells, F = cells[inside], F[inside]
        order = np.argsort(cells, kind="stable")
        cells, F = cells[order], F[order]
        bounds = np.searchsorted(cells, np.arange(grid.n_cells + 1))
        for k in np.unique(cells):
            per_cell[k] = hypervolume_2d(F[bounds[k]:bounds[k + 1]], ref)
    return HVReport(per_cell, float(per_cell.mean()), ref)


def hv_avg(records: Sequence[EvaluationRecord], grid: DecompositionGrid, reference) -> HVReport:
    ok = _successful(records)
    if not ok:
        return HVReport(np.zeros(grid.n_cells), 0.0, check_vector(reference, "reference", 2))
    C = np.vstack([r.condition_raw for r in ok])
    F = np.vstack([r.objectives for r in ok])
    return hv_avg_arrays(C, F, grid, reference)


def constrained_extract(front, constraint: int, bound: float, target: int = 0):
    """Best member on ``target`` among those with ``f[constraint] <= bound``.

    ``front`` is a :class:`ParetoFront` or an objective array; the matching
    record (or row) is returned, or ``None`` when no member is feasible.
    """
    if isinstance(front, ParetoFront):
        members = front.members
        F = front.objectives
    else:
        F = np.atleast_2d(np.asarray(front, dtype=np.float64))
        members = list(F)
    if len(members) == 0:
        raise ValueError("constrained_extract needs a non-empty front")
    feasible = np.nonzero(F[:, constraint] <= bound)[0]
    if feasible.size == 0:
        return None
    best = feasible[np.argmin(F[feasible, target])]
    return members[best]


def converged(hv_history, window: int, rel_tol: float) -> bool:
    """True when the trailing ``window`` values vary by at most ``rel_tol * max``."""
    if window < 2:
        raise ValueError("window must cover at least two logged values")
    h = np.asarray(hv_history, dtype=np.float64)
    if len(h) < window:
        return False
    tail = h[-window:]
    return bool(tail.max() - tail.min() <= rel_tol * tail.max())


class IncrementalFront:
    """Bi-objective non-dominated set maintained point by point."""

    def __init__(self):
        self.points = np.empty((0, 2))

    def __len__(self) -> int:
        return len(self.points)

    def add(self, f) -> bool:
        """Insert ``f``; returns False if it is dominated by or equal to a member."""
        f = check_vector(f, "f", 2)
        P = self.points
        if len(P) and np.any(np.all(P <= f, axis=1)):
            return False
        dominated = np.all(f <= P, axis=1) & np.any(f < P, axis=1)
        self.points = np.vstack([P[~dominated], f])
        return True

    def hypervolume(self, reference) -> float:
        return hypervolume_2d(self.points, reference)
