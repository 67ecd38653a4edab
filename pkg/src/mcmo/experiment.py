"""Evaluation-count comparison of per-condition (SC) and multi-condition (MC) training.

For a set of prescribed conditions, SC trains one agent per condition until its
front reaches a target hypervolume; MC trains a single agent over all of them,
retiring each condition once its target is met. Both are scored by the number
of objective evaluations spent at every condition.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .engine import Trainer, TrainingConfig
from .pareto import IncrementalFront
from .problem import MCMOProblem

logger = logging.getLogger(__name__)

SEED_STRIDE = 1000


@dataclass
class CaseResult:
    """Outcome of one SC or MC case within one repetition."""

    evaluations: np.ndarray            # per prescribed condition
    reached: np.ndarray                # bool, target met before the budget ran out
    trajectories: list[list[float]]    # HV after each evaluation at that condition

    @property
    def total(self) -> int:
        return int(self.evaluations.sum())


@dataclass
class ExperimentReport:
    conditions: np.ndarray
    hv_targets: np.ndarray
    sc: list[CaseResult] = field(default_factory=list)
    mc: list[CaseResult] = field(default_factory=list)

    @property
    def repetitions(self) -> int:
        return len(self.sc)

    def totals(self, case: str) -> np.ndarray:
        return np.array([r.total for r in getattr(self, case)])

    def summary(self) -> dict:
        out = {"n_conditions": len(self.conditions), "repetitions": self.repetitions}
        for case in ("sc", "mc"):
            t = self.totals(case)
            out[case] = {"totals": t.tolist(), "mean": float(t.mean()),
                         "min": int(t.min()), "max": int(t.max()),
                         "all_reached": bool(all(r.reached.all() for r in getattr(self, case)))}
        return out

    def rows(self) -> list[dict]:
        rows = []
        for rep in range(self.repetitions):
            for case in ("sc", "mc"):
                result = getattr(self, case)[rep]
                for i, c in enumerate(self.conditions):
                    rows.append({"repetition": rep, "case": case, "condition_index": i,
                                 "condition": " ".join(repr(float(v)) for v in c),
                                 "hv_target": float(self.hv_targets[i]),
                                 "evaluations": int(result.evaluations[i]),
                                 "reached": bool(result.reached[i])})
        return rows

    def write(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        rows = self.rows()
        with open(directory / "experiment.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        with open(directory / "experiment_summary.json", "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def _run_sc(problem, config, condition, target, budget, seed) -> tuple[int, bool, list[float]]:
    trainer = Trainer(problem, replace(config, seed=seed), conditions=[condition])
    front = IncrementalFront()
    hv, trajectory = 0.0, []
    while trainer.episode < budget:
        record = trainer.run_episode(condition)
        if not record.failed and front.add(record.objectives):
            hv = front.hypervolume(config.hv_reference)
        trajectory.append(hv)
        if hv >= target:
            return trainer.episode, True, trajectory
    return trainer.episode, False, trajectory


def run_sc(problem: MCMOProblem, config: TrainingConfig, conditions, targets, budget: int,
           seed: int) -> CaseResult:
    """One independent agent per condition, each stopped at its target or after ``budget``."""
    counts, reached, trajectories = [], [], []
    for i, (c, target) in enumerate(zip(conditions, targets)):
        n, ok, traj = _run_sc(problem, config, c, target, budget, seed + i)
        logger.info("SC condition %d: %d evaluations%s", i, n, "" if ok else " (censored)")
        counts.append(n)
        reached.append(ok)
        trajectories.append(traj)
    return CaseResult(np.array(counts), np.array(reached), trajectories)


def run_mc(problem: MCMOProblem, config: TrainingConfig, conditions, targets, budget: int,
           seed: int) -> CaseResult:
    """One agent over all conditions; a condition leaves the sampling set once its target is met.

    ``budget`` caps the total number of evaluations across conditions.
    """
    conditions = np.asarray(conditions, dtype=np.float64)
    n = len(conditions)
    trainer = Trainer(problem, replace(config, seed=seed), conditions=conditions)
    fronts = [IncrementalFront() for _ in range(n)]
    hv = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    reached = np.zeros(n, dtype=bool)
    trajectories: list[list[float]] = [[] for _ in range(n)]
    active = list(range(n))
    while active and trainer.episode < budget:
        i = active[trainer.rng.integers(len(active))]
        record = trainer.run_episode(conditions[i])
        counts[i] += 1
        if not record.failed and fronts[i].add(record.objectives):
            hv[i] = fronts[i].hypervolume(config.hv_reference)
        trajectories[i].append(float(hv[i]))
        if hv[i] >= targets[i]:
            reached[i] = True
            active.remove(i)
            logger.info("MC condition %d reached after %d evaluations (%d total)",
                        i, counts[i], trainer.episode)
    return CaseResult(counts, reached, trajectories)


def compare(problem: MCMOProblem, config: TrainingConfig, conditions, hv_targets,
            repetitions: int = 3, sc_budget: int = 20000, mc_budget: int | None = None
            ) -> ExperimentReport:
    """Run the SC and MC cases ``repetitions`` times with distinct seeds.

    SC runs for condition ``i`` in repetition ``r`` use seed
    ``config.seed + SEED_STRIDE * r + i``; the MC run uses ``config.seed + SEED_STRIDE * r``.
    """
    if config.hv_reference is None:
        raise ValueError("the experiment needs hv_reference in the training config")
    conditions = np.asarray(conditions, dtype=np.float64).reshape(-1, problem.n_conditions)
    targets = np.broadcast_to(np.asarray(hv_targets, dtype=np.float64), (len(conditions),)).copy()
    if mc_budget is None:
        mc_budget = sc_budget * len(conditions)
    report = ExperimentReport(conditions, targets)
    for rep in range(repetitions):
        seed = config.seed + SEED_STRIDE * rep
        report.sc.append(run_sc(problem, config, conditions, targets, sc_budget, seed))
        report.mc.append(run_mc(problem, config, conditions, targets, mc_budget, seed))
        logger.info("repetition %d: SC %d, MC %d evaluations", rep,
                    report.sc[-1].total, report.mc[-1].total)
    return report


def reference_hypervolume(problem: MCMOProblem, config: TrainingConfig, condition,
                          runs: int = 10, episodes: int | None = None) -> float:
    """Target hypervolume for ``condition``: mean final HV of ``runs`` single-condition runs."""
    values = []
    for k in range(runs):
        trainer = Trainer(problem, replace(config, seed=config.seed + k), conditions=[condition])
        trainer.train(episodes if episodes is not None else config.episodes)
        values.append(trainer.hv_at(condition))
    return float(np.mean(values))


def hv_ref_protocol(condition, repetitions: int = 10, episodes: int = 10000,
                    config: TrainingConfig | None = None) -> float:
    """Kursawe target HV at ``condition``: mean final HV of ``repetitions`` SC runs."""
    from .kursawe import REFERENCE_POINT, kursawe_problem

    if config is None:
        config = TrainingConfig(hidden=(64, 64), learning_iterations=10)
    if config.hv_reference is None:
        config = replace(config, hv_reference=REFERENCE_POINT)
    return reference_hypervolume(kursawe_problem(), config, np.atleast_1d(condition),
                                 runs=repetitions, episodes=episodes)
