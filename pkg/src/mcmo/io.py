"""Run artifacts: records, HV history, fronts, manifest and checkpoints.

CSV layouts (floats written with ``repr`` so files round-trip exactly):

* records: ``episode, c0.., x0.., f0.., w0.., failed``
* fronts: ``cell, c_lo0.., c_hi0.., x0.., f0.., episode``
* hv: ``episode, hv_avg``
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .nn import save_network
from .pareto import DecompositionGrid, select_front
from .problem import EvaluationRecord

RECORDS_FILE = "records.csv"
HV_FILE = "hv.csv"
FRONTS_FILE = "fronts.csv"
HV_REPORT_FILE = "hv_report.csv"
MANIFEST_FILE = "manifest.json"
MANIFEST_VERSION = 1


class RecordsParseError(ValueError):
    """Malformed records file; the message names the file and line."""


def _fmt(v: float) -> str:
    return repr(float(v))


def records_header(p: int, d: int, m: int) -> list[str]:
    return (["episode"] + [f"c{i}" for i in range(p)] + [f"x{i}" for i in range(d)]
            + [f"f{i}" for i in range(m)] + [f"w{i}" for i in range(m)] + ["failed"])


def write_records(records: Sequence[EvaluationRecord], path, p: int, d: int, m: int) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(records_header(p, d, m)) + "\n")
        for r in records:
            w = r.weight if r.weight is not None else np.full(m, np.nan)
            cells = ([str(r.episode)] + [_fmt(v) for v in r.condition_raw]
                     + [_fmt(v) for v in r.decision_raw] + [_fmt(v) for v in r.objectives]
                     + [_fmt(v) for v in w] + ["1" if r.failed else "0"])
            fh.write(",".join(cells) + "\n")
    return path


def read_records(path) -> tuple[list[EvaluationRecord], tuple[int, int, int]]:
    """Parse a records file; returns the records and ``(p, d, m)``."""
    path = Path(path)
    if not path.exists():
        raise RecordsParseError(f"{path}: records file not found")
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise RecordsParseError(f"{path}:1: empty records file")
    header = lines[0].split(",")
    p = sum(h.startswith("c") for h in header)
    d = sum(h.startswith("x") for h in header)
    m = sum(h.startswith("f") and h != "failed" for h in header)
    if header != records_header(p, d, m) or m == 0:
        raise RecordsParseError(f"{path}:1: unexpected header {lines[0]!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise RecordsParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(cells)}")
        try:
            episode = int(cells[0])
            v = np.array([float(x) for x in cells[1:-1]])
            if cells[-1] not in ("0", "1"):
                raise ValueError(f"failed flag must be 0 or 1, got {cells[-1]!r}")
            failed = cells[-1] == "1"
            c, x = v[:p], v[p:p + d]
            f, w = v[p + d:p + d + m], v[p + d + m:]
            records.append(EvaluationRecord(episode, c, x, f, failed, w))
        except ValueError as exc:
            raise RecordsParseError(f"{path}:{lineno}: {exc}") from exc
    return records, (p, d, m)


def write_hv_history(episodes, values, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write("episode,hv_avg\n")
        for e, v in zip(episodes, values):
            fh.write(f"{int(e)},{_fmt(v)}\n")
    return path


def read_hv_history(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    return data[:, 0].astype(np.int64), data[:, 1]


def write_fronts(records: Sequence[EvaluationRecord], grid: DecompositionGrid, path) -> Path:
    """Per-cell non-dominated sets of ``records`` under ``grid``."""
    path = Path(path)
    ok = [r for r in records if not r.failed]
    p = grid.condition_space.dim
    d = len(ok[0].decision_raw) if ok else 0
    m = len(ok[0].objectives) if ok else 0
    header = (["cell"] + [f"c_lo{i}" for i in range(p)] + [f"c_hi{i}" for i in range(p)]
              + [f"x{i}" for i in range(d)] + [f"f{i}" for i in range(m)] + ["episode"])
    by_cell: dict[int, list[EvaluationRecord]] = {}
    if ok:
        cells = grid.cell_indices(np.vstack([r.condition_raw for r in ok]))
        for r, k in zip(ok, cells):
            by_cell.setdefault(int(k), []).append(r)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k in sorted(by_cell):
            lo, hi = grid.cell_bounds(k)
            for r in select_front(by_cell[k], grid, k).members:
                cells = ([str(k)] + [_fmt(v) for v in lo] + [_fmt(v) for v in hi]
                         + [_fmt(v) for v in r.decision_raw] + [_fmt(v) for v in r.objectives]
                         + [str(r.episode)])
                fh.write(",".join(cells) + "\n")
    return path


def write_hv_report(grid: DecompositionGrid, per_cell, path) -> Path:
    path = Path(path)
    p = grid.condition_space.dim
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell"] + [f"c_lo{i}" for i in range(p)] + [f"c_hi{i}" for i in range(p)] + ["hv"])
        for k, hv in enumerate(per_cell):
            lo, hi = grid.cell_bounds(k)
            writer.writerow([k] + [_fmt(v) for v in lo] + [_fmt(v) for v in hi] + [_fmt(hv)])
    return path


def write_manifest(config: dict, problem_info: dict, path) -> Path:
    path = Path(path)
    payload = {"version": MANIFEST_VERSION, "config": config, "problem": problem_info}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> dict:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if payload.get("version") != MANIFEST_VERSION:
        raise ValueError(f"{path}: unsupported manifest version {payload.get('version')!r}")
    return payload


def save_checkpoint(trainer, directory) -> Path:
    """Actor and critic (with optimizer state) at the trainer's current episode."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tag = f"{trainer.episode:08d}"
    save_network(trainer.actor, directory / f"actor_{tag}.npz", trainer.actor_opt)
    save_network(trainer.critic, directory / f"critic_{tag}.npz", trainer.critic_opt)
    return directory
