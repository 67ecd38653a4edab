"""scikit-learn style wrapper around :class:`~mcmo.engine.Trainer`."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .engine import DEFAULT_HIDDEN, Trainer, TrainingConfig
from .pareto import DecompositionGrid, hv_avg_arrays, select_front
from .problem import MCMOProblem


class MCMOOptimizer(BaseEstimator):
    """Multi-condition multi-objective optimizer with the estimator interface.

    ``fit(X)`` trains on ``problem``; rows of ``X`` (optional) are prescribed
    raw conditions, otherwise conditions are drawn over the whole condition
    space. ``predict(X)`` maps rows ``[condition..., weight...]`` to the raw
    decisions the trained actor proposes.

    Examples
    --------
    >>> from mcmo.kursawe import kursawe_problem
    >>> opt = MCMOOptimizer(kursawe_problem(), episodes=20, hidden=(8,),
    ...                     learning_iterations=2).fit()
    >>> opt.predict([[0.0, 0.5, 0.5]]).shape
    (1, 3)
    """

    def __init__(self, problem: MCMOProblem | None = None, episodes: int = 100_000,
                 hidden=DEFAULT_HIDDEN, batch_size: int = 100, learning_iterations: int = 100,
                 actor_delay: int = 2, n_reproduce: int = 100, warmup_episodes: int = 1000,
                 actor_lr: float = 1e-4, critic_lr: float = 1e-4, tau: float = 0.01,
                 utopia_cells: int = 100, analysis_cells: int = 100, hv_reference=None,
                 log_interval: int = 100, random_state: int = 0):
        self.problem = problem
        self.episodes = episodes
        self.hidden = hidden
        self.batch_size = batch_size
        self.learning_iterations = learning_iterations
        self.actor_delay = actor_delay
        self.n_reproduce = n_reproduce
        self.warmup_episodes = warmup_episodes
        self.actor_lr = actor_lr
        self.critic_lr = critic_lr
        self.tau = tau
        self.utopia_cells = utopia_cells
        self.analysis_cells = analysis_cells
        self.hv_reference = hv_reference
        self.log_interval = log_interval
        self.random_state = random_state

    def _config(self) -> TrainingConfig:
        reference = self.hv_reference
        if reference is None and self.problem.reference_point is not None:
            reference = self.problem.reference_point
        return TrainingConfig(
            episodes=self.episodes, hidden=tuple(self.hidden), batch_size=self.batch_size,
            learning_iterations=self.learning_iterations, actor_delay=self.actor_delay,
            n_reproduce=self.n_reproduce, warmup_episodes=self.warmup_episodes,
            actor_lr=self.actor_lr, critic_lr=self.critic_lr, tau=self.tau,
            utopia_cells=self.utopia_cells, analysis_cells=self.analysis_cells,
            hv_reference=reference, log_interval=self.log_interval, seed=self.random_state)

    def fit(self, X=None, y=None):
        """Train for ``episodes`` episodes; ``X`` optionally lists prescribed conditions."""
        if self.problem is None:
            raise ValueError("MCMOOptimizer needs a problem")
        conditions = None
        if X is not None:
            conditions = check_array(X, dtype=np.float64)
            if conditions.shape[1] != self.problem.n_conditions:
                raise ValueError(f"X has {conditions.shape[1]} columns, the problem has "
                                 f"{self.problem.n_conditions} conditions")
        self.trainer_ = Trainer(self.problem, self._config(), conditions)
        self.trainer_.train()
        self.records_ = self.trainer_.records
        self.n_evaluations_ = self.trainer_.episode
        self.hv_history_ = np.array(self.trainer_.history.hv_avg)
        return self

    def predict(self, X) -> np.ndarray:
        """Raw decisions for rows ``[condition..., weight...]``."""
        check_is_fitted(self, "trainer_")
        p, m = self.problem.n_conditions, self.problem.objective_count
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != p + m:
            raise ValueError(f"X needs {p + m} columns (conditions then weights), got {X.shape[1]}")
        return self.trainer_.policy(X[:, :p], X[:, p:])

    def front(self, condition, n_cells: int | None = None):
        """Non-dominated records of the analysis cell containing ``condition``."""
        check_is_fitted(self, "trainer_")
        grid = DecompositionGrid(self.problem.condition_space, n_cells or self.analysis_cells)
        return select_front(self.records_, grid, grid.cell_index(condition))

    def score(self, X=None, y=None) -> float:
        """Mean per-cell hypervolume of everything evaluated so far."""
        check_is_fitted(self, "trainer_")
        C, F = self.trainer_.successful_arrays()
        grid = self.trainer_.analysis_grid
        return hv_avg_arrays(C, F, grid, self.trainer_.config.hv_reference).hv_avg
