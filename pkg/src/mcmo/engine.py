"""Single-step actor-critic training loop for MCMO optimization.

Each episode draws a condition and a weight vector, lets the actor propose a
decision, evaluates it once, and turns that single evaluation into many
training triples by resampling the weight. The critic regresses rewards
directly (episodes have one step, so there is no bootstrapped target) and the
actor follows the critic's action gradient every ``actor_delay`` iterations.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._validation import check_positive_int, check_rng, check_vector
from .nn import IDENTITY, TANH, AdamState, DenseNetwork, adam_step, init_network
from .pareto import DecompositionGrid, hv_avg_arrays, hypervolume_2d, non_dominated, converged
from .problem import EvaluationRecord, MCMOProblem
from .scalarization import ReproducedSamples, UtopiaTracker, reproduce_data, sample_weight

logger = logging.getLogger(__name__)

DEFAULT_HIDDEN = (512, 256, 256, 128)


@dataclass
class TrainingConfig:
    """Hyperparameters of one training run.

    Defaults are the full-scale settings; tests and quick runs shrink
    ``hidden``, ``learning_iterations`` and ``episodes``.
    """

    episodes: int = 100_000
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    batch_size: int = 100
    learning_iterations: int = 100
    actor_delay: int = 2
    n_reproduce: int = 100
    warmup_episodes: int = 1000
    sigma_amplitude: float = 0.05
    sigma_period: int = 1000
    actor_lr: float = 1e-4
    critic_lr: float = 1e-4
    negative_slope: float = 0.01
    tau: float | tuple[float, ...] = 0.01
    utopia_cells: int = 100
    analysis_cells: int = 100
    hv_reference: tuple[float, ...] | None = None
    log_interval: int = 100
    checkpoint_interval: int = 0
    stop_on_plateau: bool = False
    plateau_window: int = 20
    plateau_tol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        if isinstance(self.tau, (list, tuple)):
            self.tau = tuple(float(t) for t in self.tau)
        if self.hv_reference is not None:
            self.hv_reference = tuple(float(r) for r in self.hv_reference)
        for name in ("episodes", "batch_size", "learning_iterations", "actor_delay",
                     "n_reproduce", "sigma_period", "utopia_cells", "analysis_cells",
                     "log_interval"):
            check_positive_int(getattr(self, name), name)
        for name in ("warmup_episodes", "checkpoint_interval", "seed"):
            check_positive_int(getattr(self, name), name, minimum=0)
        if not self.hidden or min(self.hidden) < 1:
            raise ValueError("hidden must list at least one positive layer width")
        if np.any(np.asarray(self.tau) <= 0):
            raise ValueError("tau must be strictly positive")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["hidden"] = list(self.hidden)
        if isinstance(self.tau, tuple):
            d["tau"] = list(self.tau)
        if self.hv_reference is not None:
            d["hv_reference"] = list(self.hv_reference)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown training option(s): {', '.join(unknown)}")
        return cls(**data)


def build_state(c_norm, w, utopia) -> np.ndarray:
    """State vector ``[c_norm | w | f*]``; the utopia must already be finite."""
    c_norm = check_vector(c_norm, "c_norm")
    w = check_vector(w, "w")
    utopia = check_vector(utopia, "utopia", len(w), allow_nonfinite=True)
    if not np.all(np.isfinite(utopia)):
        raise ValueError("cannot build a state from an unvisited (infinite) utopia")
    return np.concatenate([c_norm, w, utopia])


def split_state(state, p: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    state = np.asarray(state)
    return state[..., :p], state[..., p:p + m], state[..., p + m:p + 2 * m]


def exploration_sigma(episode: int, config: TrainingConfig) -> float:
    """Noise scale: 1 during warm-up, then ``A * (cos(2 pi episode / period) + 1)``."""
    if episode <= config.warmup_episodes:
        return 1.0
    return config.sigma_amplitude * (math.cos(2.0 * math.pi * episode / config.sigma_period) + 1.0)


def select_action(actor: DenseNetwork, state, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """``clip(actor(state) + N(0, sigma^2), -1, 1)``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    a = actor.forward(state)
    noise = rng.normal(0.0, 1.0, size=a.shape) * sigma
    return np.clip(a + noise, -1.0, 1.0)


class ReplayBuffer:
    """Growing store of (state, action, reward) triples, sampled uniformly."""

    def __init__(self, state_dim: int, action_dim: int, n_objectives: int, capacity: int = 1024):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.n_objectives = n_objectives
        self._states = np.empty((capacity, state_dim))
        self._actions = np.empty((capacity, action_dim))
        self._rewards = np.empty(capacity)
        self._objectives = np.empty((capacity, n_objectives))
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def _grow(self, needed: int):
        cap = len(self._rewards)
        if needed <= cap:
            return
        new_cap = max(needed, 2 * cap)
        for name in ("_states", "_actions", "_rewards", "_objectives"):
            old = getattr(self, name)
            new = np.empty((new_cap,) + old.shape[1:])
            new[:self._size] = old[:self._size]
            setattr(self, name, new)

    def add(self, samples: ReproducedSamples):
        n = len(samples)
        self._grow(self._size + n)
        sl = slice(self._size, self._size + n)
        self._states[sl] = samples.states
        self._actions[sl] = samples.actions
        self._rewards[sl] = samples.rewards
        self._objectives[sl] = samples.objectives
        self._size += n

    @property
    def states(self) -> np.ndarray:
        return self._states[:self._size]

    @property
    def actions(self) -> np.ndarray:
        return self._actions[:self._size]

    @property
    def rewards(self) -> np.ndarray:
        return self._rewards[:self._size]

    @property
    def objectives(self) -> np.ndarray:
        return self._objectives[:self._size]

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform mini-batch, with replacement, from everything stored."""
        if self._size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self._size, size=batch_size)
        return self._states[idx], self._actions[idx], self._rewards[idx]


def critic_update(critic: DenseNetwork, adam: AdamState, states, actions, rewards) -> float:
    """One Adam step on ``mean((r - Q(s, a))^2)``; returns the loss before the step."""
    x = np.hstack([states, actions])
    q, cache = critic.forward(x, return_cache=True)
    diff = q[:, 0] - rewards
    loss = float(np.mean(diff * diff))
    if not math.isfinite(loss):
        raise FloatingPointError(f"critic loss is not finite ({loss})")
    grads, _ = critic.backward(cache, (2.0 / len(diff)) * diff[:, None])
    adam_step(critic.params, grads, adam)
    return loss


def actor_update(actor: DenseNetwork, adam: AdamState, critic: DenseNetwork, states) -> float:
    """One deterministic-policy-gradient step ascending ``mean Q(s, actor(s))``.

    The critic's parameters are left alone; only its input gradient is used.
    Returns the objective before the step.
    """
    a, a_cache = actor.forward(states, return_cache=True)
    q, c_cache = critic.forward(np.hstack([states, a]), return_cache=True)
    objective = float(np.mean(q))
    if not math.isfinite(objective):
        raise FloatingPointError(f"actor objective is not finite ({objective})")
    n = len(q)
    _, g_in = critic.backward(c_cache, np.full((n, 1), -1.0 / n), param_grads=False)
    grads, _ = actor.backward(a_cache, g_in[:, states.shape[1]:])
    adam_step(actor.params, grads, adam)
    return objective


@dataclass
class RunHistory:
    episodes: list[int] = field(default_factory=list)
    hv_avg: list[float] = field(default_factory=list)


class Trainer:
    """Owns the networks, replay buffer and utopia tracker of one run.

    ``conditions`` restricts condition sampling to a finite set of raw
    condition vectors (one row each); by default conditions are drawn
    uniformly over the normalized condition space.
    """

    def __init__(self, problem: MCMOProblem, config: TrainingConfig, conditions=None):
        self.problem = problem
        self.config = config
        self.rng = check_rng(config.seed)
        p, m, d = problem.n_conditions, problem.objective_count, problem.n_decisions
        self.state_dim = p + 2 * m
        self.actor = init_network((self.state_dim, *config.hidden, d), TANH, self.rng,
                                  config.negative_slope)
        self.critic = init_network((self.state_dim + d, *config.hidden, 1), IDENTITY, self.rng,
                                   config.negative_slope)
        self.actor_opt = AdamState(self.actor.n_params, config.actor_lr)
        self.critic_opt = AdamState(self.critic.n_params, config.critic_lr)
        self.buffer = ReplayBuffer(self.state_dim, d, m)
        self.tracker = UtopiaTracker(DecompositionGrid(problem.condition_space, config.utopia_cells),
                                     m, config.tau)
        self.analysis_grid = DecompositionGrid(problem.condition_space, config.analysis_cells)
        self.conditions = None
        if conditions is not None:
            self.set_conditions(conditions)
        self.episode = 0
        self.records: list[EvaluationRecord] = []
        self.history = RunHistory()
        self.actor_updates = 0
        self.critic_updates = 0
        self._ok_conditions: list[np.ndarray] = []
        self._ok_objectives: list[np.ndarray] = []

    def set_conditions(self, conditions):
        c = np.asarray(conditions, dtype=np.float64).reshape(-1, self.problem.n_conditions)
        if len(c) == 0:
            raise ValueError("condition set must not be empty")
        for row in c:
            if not self.problem.condition_space.contains(row):
                raise ValueError(f"condition {row} outside the condition space")
        self.conditions = c

    def sample_condition(self) -> np.ndarray:
        if self.conditions is not None:
            return self.conditions[self.rng.integers(len(self.conditions))].copy()
        return self.problem.condition_space.sample(self.rng)

    def run_episode(self, condition=None) -> EvaluationRecord:
        """One episode: exactly one objective evaluation, then ``learning_iterations`` updates."""
        cfg, problem = self.config, self.problem
        self.episode += 1
        c_raw = self.sample_condition() if condition is None else check_vector(condition, "condition")
        c_norm = problem.condition_space.normalize(c_raw)
        w = sample_weight(problem.objective_count, self.rng)
        state = build_state(c_norm, w, self.tracker.estimate(c_raw))
        action = select_action(self.actor, state, exploration_sigma(self.episode, cfg), self.rng)
        x_raw = problem.decision_space.denormalize(action)
        f = problem.evaluate(x_raw, c_raw)
        if f is None:
            record = EvaluationRecord(self.episode, c_raw, x_raw,
                                      np.full(problem.objective_count, np.nan), True, w)
        else:
            record = EvaluationRecord(self.episode, c_raw, x_raw, f, False, w)
            self.tracker.update(c_raw, f)
            samples = reproduce_data(record, self.tracker.get(c_raw), cfg.n_reproduce, self.rng,
                                     c_norm=c_norm, action=action, weights=w[None, :])
            self.buffer.add(samples)
            self._ok_conditions.append(c_raw)
            self._ok_objectives.append(f)
        self.records.append(record)
        if len(self.buffer):
            self.learn()
        return record

    def learn(self):
        cfg = self.config
        for it in range(1, cfg.learning_iterations + 1):
            s, a, r = self.buffer.sample(cfg.batch_size, self.rng)
            try:
                critic_update(self.critic, self.critic_opt, s, a, r)
                self.critic_updates += 1
                if it % cfg.actor_delay == 0:
                    actor_update(self.actor, self.actor_opt, self.critic, s)
                    self.actor_updates += 1
            except FloatingPointError as exc:
                raise FloatingPointError(f"episode {self.episode}, iteration {it}: {exc}") from exc

    def successful_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Raw conditions and objectives of all successful evaluations so far."""
        p, m = self.problem.n_conditions, self.problem.objective_count
        if not self._ok_conditions:
            return np.empty((0, p)), np.empty((0, m))
        return np.vstack(self._ok_conditions), np.vstack(self._ok_objectives)

    def hv_avg(self, grid: DecompositionGrid | None = None, reference=None) -> float:
        reference = self.config.hv_reference if reference is None else reference
        if reference is None:
            raise ValueError("no hypervolume reference point configured")
        C, F = self.successful_arrays()
        return hv_avg_arrays(C, F, grid or self.analysis_grid, reference).hv_avg

    def hv_at(self, condition, reference=None) -> float:
        """Hypervolume of the records evaluated at exactly ``condition``."""
        reference = self.config.hv_reference if reference is None else reference
        C, F = self.successful_arrays()
        mask = np.all(C == np.asarray(condition, dtype=np.float64), axis=1)
        return hypervolume_2d(F[mask], reference)

    def front_at(self, condition) -> np.ndarray:
        C, F = self.successful_arrays()
        F = F[np.all(C == np.asarray(condition, dtype=np.float64), axis=1)]
        return F[non_dominated(F)]

    def log_hv(self) -> float | None:
        if self.config.hv_reference is None or self.problem.objective_count != 2:
            return None
        value = self.hv_avg()
        self.history.episodes.append(self.episode)
        self.history.hv_avg.append(value)
        logger.info("episode %d  HV_avg %.6g", self.episode, value)
        return value

    def train(self, episodes: int | None = None,
              callback: Callable[["Trainer", EvaluationRecord], bool | None] | None = None
              ) -> list[EvaluationRecord]:
        """Run episodes until the budget is spent, a plateau stop fires, or
        ``callback`` returns ``True``."""
        cfg = self.config
        budget = cfg.episodes if episodes is None else episodes
        for _ in range(budget):
            record = self.run_episode()
            if self.episode % cfg.log_interval == 0:
                self.log_hv()
                if (cfg.stop_on_plateau and
                        converged(self.history.hv_avg, cfg.plateau_window, cfg.plateau_tol)):
                    logger.info("HV_avg plateau reached at episode %d", self.episode)
                    break
            if callback is not None and callback(self, record):
                break
        return self.records

    def policy(self, conditions, weights) -> np.ndarray:
        """Deterministic raw decisions proposed for each (condition, weight) pair."""
        C = np.atleast_2d(np.asarray(conditions, dtype=np.float64))
        W = np.atleast_2d(np.asarray(weights, dtype=np.float64))
        space = self.problem.condition_space
        states = np.vstack([build_state(space.normalize(c), w, self.tracker.estimate(c))
                            for c, w in zip(C, W)])
        actions = self.actor.forward(states)
        return self.problem.decision_space.denormalize(np.clip(actions, -1.0, 1.0))


def train(problem: MCMOProblem, config: TrainingConfig, conditions=None) -> Trainer:
    """Build a :class:`Trainer` and run it for ``config.episodes`` episodes."""
    trainer = Trainer(problem, config, conditions)
    trainer.train()
    return trainer
