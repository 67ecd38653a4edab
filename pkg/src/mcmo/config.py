"""Run configuration: loading, validation and problem construction.

A config file is JSON or YAML with the sections below; every key is optional
and unknown keys are rejected with their dotted path::

    problem: kursawe            # kursawe | airfoil-mock | airfoil-external
    output_dir: runs/kursawe
    conditions: null            # optional list of prescribed raw conditions
    training: {...}             # TrainingConfig fields
    airfoil: {...}              # AirfoilOptions fields
    experiment: {...}           # ExperimentOptions fields
"""

from __future__ import annotations

import dataclasses
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .engine import TrainingConfig
from .problem import MCMOProblem

PROBLEMS = ("kursawe", "airfoil-mock", "airfoil-external")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


@dataclass
class AirfoilOptions:
    xfoil_binary: str | None = None
    timeout: float = 30.0
    n_panels: int = 160
    ncrit: float = 9.0
    max_iter: int = 100
    n_points: int = 200
    cache: str | None = None


@dataclass
class ExperimentOptions:
    n_conditions: int = 3
    repetitions: int = 3
    hv_target_fraction: float = 0.7
    sc_budget: int = 10000
    mc_budget: int | None = None
    oracle_samples: int = 1_000_000
    oracle_refine_rounds: int = 3


@dataclass
class RunConfig:
    problem: str = "kursawe"
    output_dir: str = "run"
    conditions: list | None = None
    training: TrainingConfig = field(default_factory=TrainingConfig)
    airfoil: AirfoilOptions = field(default_factory=AirfoilOptions)
    experiment: ExperimentOptions = field(default_factory=ExperimentOptions)

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "output_dir": self.output_dir,
            "conditions": self.conditions,
            "training": self.training.to_dict(),
            "airfoil": dataclasses.asdict(self.airfoil),
            "experiment": dataclasses.asdict(self.experiment),
        }


def _check_type(value, annotation, path: str):
    """Light check of scalar config values against the dataclass annotations."""
    ann = str(annotation)
    if value is None:
        if "None" not in ann:
            raise ConfigError(f"{path}: must not be null")
        return
    if ann.startswith("int") and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if ann.startswith("float") and not ann.startswith("float | tuple") and (
            isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if ann.startswith("str") and not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    if ann.startswith("bool") and not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true or false, got {value!r}")
    if ann.startswith("tuple") and not isinstance(value, (list, tuple)):
        raise ConfigError(f"{path}: expected a list, got {value!r}")


def _build(cls, data, path: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}: unknown key")
    hints = typing.get_type_hints(cls)
    for key, value in data.items():
        _check_type(value, hints[key], f"{path}.{key}")
    try:
        return cls(**data)
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        name = next((k for k in data if msg.startswith(k)), None)
        raise ConfigError(f"{path}.{name}: {msg}" if name else f"{path}: {msg}") from exc


def config_from_dict(data: dict) -> RunConfig:
    """Validate ``data`` and return a :class:`RunConfig` with defaults applied."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>: expected a mapping")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    problem = data.get("problem", "kursawe")
    if problem not in PROBLEMS:
        raise ConfigError(f"problem: must be one of {', '.join(PROBLEMS)}, got {problem!r}")
    output_dir = data.get("output_dir", "run")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir: expected a string")
    conditions = data.get("conditions")
    if conditions is not None:
        if not isinstance(conditions, list) or not conditions:
            raise ConfigError("conditions: expected a non-empty list")
        conditions = [list(map(float, c)) if isinstance(c, (list, tuple)) else [float(c)]
                      for c in conditions]
    cfg = RunConfig(
        problem=problem,
        output_dir=output_dir,
        conditions=conditions,
        training=_build(TrainingConfig, data.get("training"), "training"),
        airfoil=_build(AirfoilOptions, data.get("airfoil"), "airfoil"),
        experiment=_build(ExperimentOptions, data.get("experiment"), "experiment"),
    )
    if cfg.problem == "airfoil-external" and not cfg.airfoil.xfoil_binary:
        raise ConfigError("airfoil.xfoil_binary: required for problem airfoil-external")
    return cfg


def read_mapping(path) -> dict:
    """Parse a JSON or YAML file into a dict, reporting the line of syntax errors."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else "?"
        raise ConfigError(f"{path}:{line}: {exc.problem}") from exc


def load_config(path) -> RunConfig:
    return config_from_dict(read_mapping(path))


def build_problem(cfg: RunConfig) -> MCMOProblem:
    """Instantiate the configured problem; fills ``training.hv_reference`` if unset."""
    if cfg.problem == "kursawe":
        from .kursawe import kursawe_problem
        problem = kursawe_problem()
    else:
        from .airfoil.cache import EvaluationCache
        from .airfoil.evaluators import XfoilClient
        from .airfoil.problem import airfoil_problem
        opts = cfg.airfoil
        client = None
        if cfg.problem == "airfoil-external":
            binary = Path(opts.xfoil_binary)
            if not binary.exists():
                raise ConfigError(f"airfoil.xfoil_binary: {binary} does not exist")
            client = XfoilClient(str(binary), opts.timeout, opts.n_panels, opts.ncrit, opts.max_iter)
        cache = EvaluationCache(opts.cache) if opts.cache else None
        problem = airfoil_problem(client, cache, opts.n_points)
    if cfg.training.hv_reference is None and problem.reference_point is not None:
        cfg.training.hv_reference = tuple(float(v) for v in problem.reference_point)
    return problem
