"""Memoization of aerodynamic evaluations, optionally persisted as JSON lines."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable

from .evaluators import FAILURE_TYPES, AeroCoefficients, SolverFailure

CACHE_FORMAT = "mcmo-aero-cache"
CACHE_VERSION = 1
KEY_DECIMALS = 6


class CachedFailure(SolverFailure):
    """A failure replayed from the cache; ``kind`` names the original failure class."""

    def __init__(self, kind: str, message: str = ""):
        super().__init__(message or f"cached {kind}")
        self.kind = kind


class EvaluationCache:
    """Maps inputs rounded to ``KEY_DECIMALS`` decimals to coefficients or failures.

    With a ``path`` every new entry is appended to the file immediately; the
    first line is a versioned header.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[tuple, dict] = {}
        self.hits = 0
        self.misses = 0
        if self.path is not None and self.path.exists():
            self._load()

    @staticmethod
    def key(inputs) -> tuple:
        return tuple(round(float(v), KEY_DECIMALS) + 0.0 for v in inputs)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, inputs) -> bool:
        return self.key(inputs) in self._entries

    def _load(self):
        lines = self.path.read_text().splitlines()
        if not lines:
            return
        header = json.loads(lines[0])
        if header.get("format") != CACHE_FORMAT or header.get("version") != CACHE_VERSION:
            raise ValueError(f"{self.path}: not a version {CACHE_VERSION} {CACHE_FORMAT} file")
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
                self._entries[tuple(entry["key"])] = entry
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{self.path}:{lineno}: corrupt cache entry") from exc

    def _append(self, entry: dict):
        if self.path is None:
            return
        new_file = not self.path.exists() or self.path.stat().st_size == 0
        with open(self.path, "a") as fh:
            if new_file:
                fh.write(json.dumps({"format": CACHE_FORMAT, "version": CACHE_VERSION}) + "\n")
            fh.write(json.dumps(entry) + "\n")

    def _replay(self, entry: dict) -> AeroCoefficients:
        if "failure" in entry:
            raise CachedFailure(entry["failure"], entry.get("message", ""))
        return AeroCoefficients(entry["cl"], entry["cd"])

    def get_or_compute(self, inputs, compute: Callable[[], AeroCoefficients]) -> AeroCoefficients:
        key = self.key(inputs)
        if key in self._entries:
            self.hits += 1
            return self._replay(self._entries[key])
        self.misses += 1
        try:
            coeffs = compute()
        except SolverFailure as exc:
            entry = {"key": list(key), "failure": type(exc).__name__, "message": str(exc)}
            self._entries[key] = entry
            self._append(entry)
            raise
        entry = {"key": list(key), "cl": coeffs.cl, "cd": coeffs.cd}
        self._entries[key] = entry
        self._append(entry)
        return coeffs


def cached_evaluate(cache: EvaluationCache, evaluator: Callable[..., AeroCoefficients], inputs):
    """``evaluator(*inputs)`` through ``cache``."""
    inputs = tuple(inputs)
    return cache.get_or_compute(inputs, lambda: evaluator(*inputs))


__all__ = ["CachedFailure", "EvaluationCache", "cached_evaluate", "FAILURE_TYPES"]
