"""Multi-condition multi-objective optimization with single-step actor-critic learning."""

from .engine import Trainer, TrainingConfig, train
from .estimator import MCMOOptimizer
from .pareto import DecompositionGrid, ParetoFront, hv_avg, hypervolume_2d, select_front
from .problem import BoxSpace, EvaluationError, EvaluationRecord, MCMOProblem, dominates

__version__ = "0.1.0"

__all__ = [
    "BoxSpace",
    "DecompositionGrid",
    "EvaluationError",
    "EvaluationRecord",
    "MCMOOptimizer",
    "MCMOProblem",
    "ParetoFront",
    "Trainer",
    "TrainingConfig",
    "dominates",
    "hv_avg",
    "hypervolume_2d",
    "select_front",
    "train",
]
