"""Problem abstraction for multi-condition multi-objective (MCMO) optimization.

A problem couples a box-bounded decision space, a box-bounded condition space
and an objective evaluator ``f(x, c) -> R^m`` (all objectives minimized).
Networks work in normalized coordinates in ``[-1, 1]``; the helpers here map
between those and the raw coordinates the evaluator understands.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._validation import check_vector

LINEAR = "linear"
LOG10 = "log10"

# slack for floating-point round-off when checking raw bounds
_BOUND_RTOL = 1e-12


class EvaluationError(RuntimeError):
    """Raised by an evaluator when an objective evaluation cannot be completed."""


@dataclass(frozen=True)
class BoxSpace:
    """Axis-aligned box with a per-dimension ``linear`` or ``log10`` scale."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    scale: tuple[str, ...] = ()

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        scale = tuple(self.scale) if self.scale else (LINEAR,) * len(lower)
        if isinstance(self.scale, str):
            scale = (self.scale,) * len(lower)
        if not (len(lower) == len(upper) == len(scale)) or not lower:
            raise ValueError("lower, upper and scale must be non-empty and of equal length")
        for i, (lo, hi, sc) in enumerate(zip(lower, upper, scale)):
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise ValueError(f"dimension {i}: need finite lower < upper, got [{lo}, {hi}]")
            if sc not in (LINEAR, LOG10):
                raise ValueError(f"dimension {i}: unknown scale {sc!r}")
            if sc == LOG10 and lo <= 0:
                raise ValueError(f"dimension {i}: log10 scale requires lower > 0, got {lo}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "scale", scale)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def _is_log(self) -> np.ndarray:
        return np.array([s == LOG10 for s in self.scale])

    def _transformed_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array(self.lower)
        hi = np.array(self.upper)
        log = self._is_log
        lo[log] = np.log10(lo[log])
        hi[log] = np.log10(hi[log])
        return lo, hi

    def contains(self, raw) -> bool:
        raw = np.asarray(raw, dtype=np.float64)
        lo, hi = np.array(self.lower), np.array(self.upper)
        tol = _BOUND_RTOL * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
        return bool(np.all(raw >= lo - tol) and np.all(raw <= hi + tol))

    def midpoint(self) -> np.ndarray:
        return self.denormalize(np.zeros(self.dim))

    def normalize(self, raw) -> np.ndarray:
        """Map raw coordinates (shape ``(d,)`` or ``(n, d)``) into ``[-1, 1]``."""
        raw = np.asarray(raw, dtype=np.float64)
        if raw.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got shape {raw.shape}")
        lo_raw, hi_raw = np.array(self.lower), np.array(self.upper)
        tol = _BOUND_RTOL * np.maximum(1.0, np.maximum(np.abs(lo_raw), np.abs(hi_raw)))
        bad = (raw < lo_raw - tol) | (raw > hi_raw + tol) | ~np.isfinite(raw)
        if np.any(bad):
            dims = sorted(set(np.nonzero(bad)[-1].tolist()))
            raise ValueError(f"raw point outside bounds in dimension(s) {dims}: {raw}")
        raw = np.clip(raw, lo_raw, hi_raw)
        log = self._is_log
        t = np.where(log, np.log10(np.where(log, raw, 1.0)), raw)
        lo, hi = self._transformed_bounds()
        return np.clip(2.0 * (t - lo) / (hi - lo) - 1.0, -1.0, 1.0)

    def denormalize(self, normalized) -> np.ndarray:
        """Inverse of :meth:`normalize`; rejects components outside ``[-1, 1]``."""
        v = np.asarray(normalized, dtype=np.float64)
        if v.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got shape {v.shape}")
        bad = (v < -1.0) | (v > 1.0) | ~np.isfinite(v)
        if np.any(bad):
            dims = sorted(set(np.nonzero(bad)[-1].tolist()))
            raise ValueError(f"normalized point outside [-1, 1] in dimension(s) {dims}")
        lo, hi = self._transformed_bounds()
        t = lo + (v + 1.0) * 0.5 * (hi - lo)
        raw = np.where(self._is_log, 10.0 ** t, t)
        return np.clip(raw, self.lower, self.upper)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Uniform sample in normalized coordinates, returned in raw coordinates."""
        shape = (self.dim,) if size is None else (size, self.dim)
        return self.denormalize(rng.uniform(-1.0, 1.0, size=shape))

    def to_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper), "scale": list(self.scale)}


def normalize_point(space: BoxSpace, raw) -> np.ndarray:
    return space.normalize(raw)


def denormalize_point(space: BoxSpace, normalized) -> np.ndarray:
    return space.denormalize(normalized)


def dominates(a, b) -> bool:
    """Pareto dominance for minimization: ``a`` no worse everywhere and better somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


@dataclass
class EvaluationRecord:
    """One objective evaluation produced by one episode."""

    episode: int
    condition_raw: np.ndarray
    decision_raw: np.ndarray
    objectives: np.ndarray
    failed: bool = False
    weight: np.ndarray | None = None

    def __post_init__(self):
        self.condition_raw = np.asarray(self.condition_raw, dtype=np.float64)
        self.decision_raw = np.asarray(self.decision_raw, dtype=np.float64)
        self.objectives = np.asarray(self.objectives, dtype=np.float64)
        if not self.failed and not np.all(np.isfinite(self.objectives)):
            raise ValueError(f"episode {self.episode}: successful record has non-finite objectives")


class EvaluationCounter:
    """Thread-safe tally of objective-function evaluations."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def increment(self) -> int:
        with self._lock:
            self._count += 1
            return self._count

    @property
    def count(self) -> int:
        return self._count

    def reset(self):
        with self._lock:
            self._count = 0

    def __getstate__(self):
        return {"_count": self._count}

    def __setstate__(self, state):
        self._lock = threading.Lock()
        self._count = state["_count"]


Evaluator = Callable[[np.ndarray, np.ndarray], Sequence[float]]


@dataclass
class MCMOProblem:
    """An MCMO problem: minimize ``evaluator(x, c)`` over ``x`` for every ``c``.

    ``evaluator`` receives raw decision and condition vectors and returns
    ``objective_count`` values, or raises :class:`EvaluationError`.
    ``reentrant`` declares whether it may be called from several threads;
    ``reference_point`` is the default hypervolume reference, if any.
    """

    decision_space: BoxSpace
    condition_space: BoxSpace
    objective_count: int
    evaluator: Evaluator
    name: str = "problem"
    reentrant: bool = True
    reference_point: tuple[float, ...] | None = None
    counter: EvaluationCounter = field(default_factory=EvaluationCounter, repr=False)

    def __post_init__(self):
        if self.objective_count < 2:
            raise ValueError("an MCMO problem needs at least two objectives")

    @property
    def n_decisions(self) -> int:
        return self.decision_space.dim

    @property
    def n_conditions(self) -> int:
        return self.condition_space.dim

    def evaluate(self, x_raw, c_raw) -> np.ndarray | None:
        """Evaluate objectives; returns ``None`` when the evaluator fails.

        Every call counts as one function evaluation, failed or not.
        """
        x = check_vector(x_raw, "x_raw", self.n_decisions)
        c = check_vector(c_raw, "c_raw", self.n_conditions)
        if not self.decision_space.contains(x):
            raise ValueError(f"decision {x} outside the decision space")
        if not self.condition_space.contains(c):
            raise ValueError(f"condition {c} outside the condition space")
        self.counter.increment()
        try:
            f = np.asarray(self.evaluator(x, c), dtype=np.float64)
        except EvaluationError:
            return None
        if f.shape != (self.objective_count,):
            raise ValueError(f"evaluator returned shape {f.shape}, expected ({self.objective_count},)")
        if not np.all(np.isfinite(f)):
            return None
        return f


def evaluate(problem: MCMOProblem, x_raw, c_raw) -> np.ndarray | None:
    return problem.evaluate(x_raw, c_raw)
