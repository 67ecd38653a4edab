"""Weighted Chebyshev scalarization, utopia tracking and data reproduction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int, check_vector
from .pareto import DecompositionGrid
from .problem import EvaluationRecord


def chebyshev(f, w, f_star) -> float:
    """``max_i w_i * |f_i - f*_i|``."""
    f = check_vector(f, "f")
    w = check_vector(w, "w", len(f))
    f_star = check_vector(f_star, "f_star", len(f))
    return float(np.max(w * np.abs(f - f_star)))


def reward(f, w, f_star) -> float:
    return -chebyshev(f, w, f_star)


def chebyshev_batch(f, weights, f_star) -> np.ndarray:
    """Row-wise Chebyshev values for a ``(k, m)`` weight matrix and fixed ``f``."""
    return np.max(np.asarray(weights) * np.abs(np.asarray(f) - np.asarray(f_star)), axis=1)


def sample_weight(m: int, rng: np.random.Generator) -> np.ndarray:
    """Weight uniformly distributed on the probability simplex.

    For two objectives this is ``(u, 1 - u)`` with ``u ~ U(0, 1)``.
    """
    return sample_weights(m, 1, rng)[0]


def sample_weights(m: int, k: int, rng: np.random.Generator) -> np.ndarray:
    m = check_positive_int(m, "m", minimum=2)
    if m == 2:
        u = rng.uniform(0.0, 1.0, size=k)
        return np.column_stack([u, 1.0 - u])
    e = rng.exponential(1.0, size=(k, m))
    return e / e.sum(axis=1, keepdims=True)


class UtopiaTracker:
    """Per-cell utopia points kept ``tau`` below the best objectives observed.

    Cells come from a :class:`DecompositionGrid` over the condition space.
    Unvisited cells hold ``+inf``.
    """

    def __init__(self, grid: DecompositionGrid, m: int, tau=0.01):
        self.grid = grid
        self.m = m
        self.tau = np.broadcast_to(np.asarray(tau, dtype=np.float64), (m,)).copy()
        if np.any(self.tau <= 0):
            raise ValueError("tau must be strictly positive")
        self.utopia = np.full((grid.n_cells, m), np.inf)

    def cell(self, c_raw) -> int:
        return self.grid.cell_index(c_raw)

    def visited(self, cell: int) -> bool:
        return bool(np.all(np.isfinite(self.utopia[cell])))

    def get(self, c_raw) -> np.ndarray:
        return self.utopia[self.cell(c_raw)].copy()

    def estimate(self, c_raw) -> np.ndarray:
        """Utopia for ``c_raw``, borrowing the nearest visited cell when unvisited.

        Returns zeros when no cell has been visited yet.
        """
        k = self.cell(c_raw)
        if self.visited(k):
            return self.utopia[k].copy()
        seen = np.nonzero(np.all(np.isfinite(self.utopia), axis=1))[0]
        if seen.size == 0:
            return np.zeros(self.m)
        nearest = seen[np.argmin(np.abs(seen - k))]
        return self.utopia[nearest].copy()

    def update(self, c_raw, f) -> np.ndarray:
        """Lower the cell utopia where ``f - tau`` beats it; returns the changed mask."""
        f = check_vector(f, "f", self.m)
        k = self.cell(c_raw)
        candidate = f - self.tau
        changed = candidate < self.utopia[k]
        self.utopia[k] = np.where(changed, candidate, self.utopia[k])
        return changed


def update_utopia(tracker: UtopiaTracker, c_raw, f) -> np.ndarray:
    return tracker.update(c_raw, f)


@dataclass
class ReproducedSamples:
    """``n`` training triples generated from one evaluation.

    ``states`` rows are ``[c_norm | w | f*]``; ``objectives`` is kept so the
    rewards can be recomputed later.
    """

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    objectives: np.ndarray

    def __len__(self) -> int:
        return len(self.rewards)


def reproduce_data(record: EvaluationRecord, f_star, n_samples: int,
                   rng: np.random.Generator, *, c_norm, action,
                   weights=None) -> ReproducedSamples:
    """Turn one evaluation into ``n_samples`` (state, action, reward) triples.

    Each triple shares the condition, action and utopia of ``record`` but has
    its own weight vector; the reward is recomputed for that weight. Rows of
    ``weights`` (if given) are used first, the rest are drawn uniformly.
    """
    if record.failed:
        raise ValueError(f"episode {record.episode}: cannot reproduce data from a failed evaluation")
    n_samples = check_positive_int(n_samples, "n_samples")
    f = record.objectives
    m = len(f)
    f_star = check_vector(f_star, "f_star", m)
    c_norm = check_vector(c_norm, "c_norm")
    action = check_vector(action, "action")

    given = np.empty((0, m)) if weights is None else np.atleast_2d(np.asarray(weights, float))
    given = given[:n_samples]
    drawn = sample_weights(m, n_samples - len(given), rng) if n_samples > len(given) else np.empty((0, m))
    w = np.vstack([given, drawn])

    rewards = -chebyshev_batch(f, w, f_star)
    states = np.hstack([
        np.broadcast_to(c_norm, (n_samples, len(c_norm))),
        w,
        np.broadcast_to(f_star, (n_samples, m)),
    ])
    actions = np.broadcast_to(action, (n_samples, len(action))).copy()
    objectives = np.broadcast_to(f, (n_samples, m)).copy()
    return ReproducedSamples(states, actions, rewards, objectives)
