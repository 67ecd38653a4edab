"""Rotated Kursawe benchmark: a two-objective problem with a rotation-angle condition.

Rotating the objective vector ``(g1, g2)`` of the classic Kursawe function by
``theta`` keeps the feasible region's shape, so the true front at any angle
can be found by brute force from one large sample of the decision space.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import qmc

from ._validation import check_rng
from .pareto import non_dominated, hypervolume_2d
from .problem import BoxSpace, MCMOProblem

DECISION_BOUNDS = (-5.0, 5.0)
THETA_MAX = math.pi / 4
REFERENCE_POINT = (-2.0, 13.0)


def kursawe_g(x) -> np.ndarray:
    """Original Kursawe objectives for one point ``(3,)`` or a batch ``(n, 3)``."""
    x = np.asarray(x, dtype=np.float64)
    r = np.sqrt(x[..., :-1] ** 2 + x[..., 1:] ** 2)
    g1 = np.sum(-10.0 * np.exp(-0.2 * r), axis=-1)
    g2 = np.sum(np.abs(x) ** 0.8 + 5.0 * np.sin(x ** 3), axis=-1)
    return np.stack([g1, g2], axis=-1)


def rotate(g, theta) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    ct, st = np.cos(theta), np.sin(theta)
    f1 = g[..., 0] * ct - g[..., 1] * st
    f2 = g[..., 0] * st + g[..., 1] * ct
    return np.stack([f1, f2], axis=-1)


def kursawe_modified(x, theta) -> np.ndarray:
    """Kursawe objectives rotated by ``theta``; ``theta = 0`` gives the original."""
    g = kursawe_g(x)
    if np.all(np.asarray(theta) == 0):
        return g
    return rotate(g, theta)


def kursawe_problem() -> MCMOProblem:
    def evaluator(x, c):
        return kursawe_modified(x, c[0])

    return MCMOProblem(
        decision_space=BoxSpace((DECISION_BOUNDS[0],) * 3, (DECISION_BOUNDS[1],) * 3),
        condition_space=BoxSpace((0.0,), (THETA_MAX,)),
        objective_count=2,
        evaluator=evaluator,
        name="kursawe",
        reentrant=True,
        reference_point=REFERENCE_POINT,
    )


def sample_decisions(n_samples: int, rng=None, sobol_fraction: float = 0.5) -> np.ndarray:
    """Mix of scrambled-Sobol and uniform points filling the decision box."""
    rng = check_rng(rng)
    n_sobol = int(n_samples * sobol_fraction)
    parts = []
    if n_sobol:
        sobol = qmc.Sobol(d=3, scramble=True, seed=rng)
        m = int(math.ceil(math.log2(n_sobol)))
        parts.append(sobol.random_base2(m)[:n_sobol])
    parts.append(rng.uniform(0.0, 1.0, size=(n_samples - n_sobol, 3)))
    lo, hi = DECISION_BOUNDS
    return lo + (hi - lo) * np.vstack(parts)


def _prune(X, G):
    """Drop points that are dominated at every angle in ``[0, pi/4]``.

    ``q`` dominates ``p`` for all such angles exactly when ``g_p - g_q`` lies in
    the cone spanned by ``(1, 0)`` and ``(1, 1)``, which is plain dominance in
    the sheared coordinates ``(g1 - g2, g2)``.
    """
    keep = non_dominated(np.column_stack([G[:, 0] - G[:, 1], G[:, 1]]))
    return X[keep], G[keep]


class KursaweOracle:
    """Brute-force reference fronts of the rotated Kursawe problem.

    Evaluates ``g`` once on a large sample of the decision box, then for any
    angle rotates and keeps the non-dominated points. ``refine_rounds`` adds
    local perturbations around the current fronts to sharpen them. A regular
    ``lattice``-per-axis grid (odd, so it contains the box centre) is added to
    the random sample.
    """

    def __init__(self, n_samples: int = 1_000_000, rng=None, refine_rounds: int = 0,
                 refine_thetas=None, lattice: int = 21):
        if lattice and lattice % 2 == 0:
            raise ValueError("lattice must be odd so that it contains the box centre")
        rng = check_rng(rng)
        X = sample_decisions(n_samples, rng)
        if lattice:
            axis = np.linspace(*DECISION_BOUNDS, lattice)
            X = np.vstack([X, np.stack(np.meshgrid(axis, axis, axis), axis=-1).reshape(-1, 3)])
        G = kursawe_g(X)
        self.n_sampled = len(G)
        X, G = _prune(X, G)
        thetas = np.linspace(0.0, THETA_MAX, 9) if refine_thetas is None else np.asarray(refine_thetas)
        for _ in range(refine_rounds):
            keep = np.unique(np.concatenate([non_dominated(rotate(G, t)) for t in thetas]))
            seeds = X[keep]
            lo, hi = DECISION_BOUNDS
            jitter = rng.normal(0.0, 0.02, size=(20,) + seeds.shape)
            X_new = np.clip(seeds[None] + jitter, lo, hi).reshape(-1, 3)
            self.n_sampled += len(X_new)
            X, G = _prune(np.vstack([X, X_new]), np.vstack([G, kursawe_g(X_new)]))
        self.decisions = X
        self.g = G

    def front(self, theta: float) -> np.ndarray:
        F = rotate(self.g, theta)
        return F[non_dominated(F)]

    def hypervolume(self, theta: float, reference=REFERENCE_POINT) -> float:
        return hypervolume_2d(self.front(theta), reference)


def real_front_oracle(theta: float, sample_budget: int = 1_000_000, rng=None) -> np.ndarray:
    """Approximate true front at ``theta`` from ``sample_budget`` brute-force samples."""
    return KursaweOracle(sample_budget, rng).front(theta)


def prescribed_conditions(n_conditions: int) -> np.ndarray:
    """``n_conditions`` equally spaced angles covering ``[0, pi/4]`` including both ends."""
    if n_conditions < 2:
        raise ValueError("need at least two prescribed conditions")
    return np.linspace(0.0, THETA_MAX, n_conditions)
