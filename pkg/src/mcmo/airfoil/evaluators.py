"""Aerodynamic evaluators: a closed-form mock and an XFOIL process client."""

from __future__ import annotations

import math
import os
import re
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

from ..problem import EvaluationError
from .geometry import (ALPHA_RANGE, BETA_RANGE, MU_X_RANGE, MU_Y_RANGE, AirfoilGeometry,
                       write_coordinates)

RE_RANGE = (1e5, 1e7)

# stall rolloff width (degrees) of the mock lift curve
STALL_WIDTH = 5.0


@dataclass(frozen=True)
class AeroCoefficients:
    cl: float
    cd: float

    def __post_init__(self):
        if not (math.isfinite(self.cl) and math.isfinite(self.cd)):
            raise ValueError("aerodynamic coefficients must be finite")
        if self.cd <= 0:
            raise ValueError(f"drag coefficient must be positive, got {self.cd}")


class SolverFailure(EvaluationError):
    """Base class for external-solver failures."""


class SolverTimeout(SolverFailure):
    pass


class SolverNonConvergence(SolverFailure):
    pass


class PolarParseError(SolverFailure):
    pass


class SolverExitError(SolverFailure):
    pass


FAILURE_TYPES = {cls.__name__: cls for cls in
                 (SolverFailure, SolverTimeout, SolverNonConvergence, PolarParseError, SolverExitError)}


def _check_range(name, value, bounds):
    lo, hi = bounds
    if not (math.isfinite(value) and lo <= value <= hi):
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


def mock_lift(mu_y: float, alpha: float) -> float:
    alpha_stall = 15.0 + 10.0 * mu_y
    alpha_eff = alpha
    if alpha > alpha_stall:
        alpha_eff = alpha - (alpha - alpha_stall) ** 2 / (2.0 * STALL_WIDTH)
    return 2.0 * math.pi ** 2 / 180.0 * alpha_eff * (1.0 + 0.8 * mu_y / 0.4)


def mock_drag(mu_x: float, alpha: float, re_c: float) -> float:
    return 0.01 * (1.0 + abs(mu_x) / 0.4) * (1e6 / re_c) ** 0.2 + 0.05 * (alpha / 30.0) ** 2


def mock_evaluate(mu_x: float, mu_y: float, beta: float, alpha: float, re_c: float) -> AeroCoefficients:
    """Smooth stand-in for a panel solver.

    Lift grows with angle of attack and camber and rolls off smoothly past a
    camber-dependent stall angle; drag grows with thickness, incidence and
    falling Reynolds number. ``beta`` is accepted for interface parity only.
    """
    _check_range("mu_x", mu_x, MU_X_RANGE)
    _check_range("mu_y", mu_y, MU_Y_RANGE)
    _check_range("beta", beta, BETA_RANGE)
    _check_range("alpha", alpha, ALPHA_RANGE)
    _check_range("re_c", re_c, RE_RANGE)
    return AeroCoefficients(mock_lift(mu_y, alpha), mock_drag(mu_x, alpha, re_c))


_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eEdD][-+]?\d+)?"
_ROW = re.compile(rf"^\s*({_NUMBER})\s+({_NUMBER})\s+({_NUMBER})(?:\s+{_NUMBER})*\s*$")


def parse_polar(text: str, alpha: float | None = None) -> AeroCoefficients:
    """Read ``(alpha, CL, CD)`` from XFOIL polar-accumulation output.

    Data rows follow a dashed separator line. A well-formed file with no
    rows means the operating point did not converge. With ``alpha`` given,
    the row closest to it is used; otherwise the last row.
    """
    lines = text.splitlines()
    sep = next((i for i, line in enumerate(lines) if line.strip().startswith("---")), None)
    if sep is None:
        raise PolarParseError("polar output has no column separator line")
    rows = []
    for lineno, line in enumerate(lines[sep + 1:], start=sep + 2):
        if not line.strip():
            continue
        match = _ROW.match(line)
        if match is None:
            raise PolarParseError(f"line {lineno}: cannot parse polar row {line.strip()!r}")
        rows.append(tuple(float(v.replace("D", "E").replace("d", "e")) for v in match.groups()))
    if not rows:
        raise SolverNonConvergence("no converged operating point in polar output")
    row = rows[-1] if alpha is None else min(rows, key=lambda r: abs(r[0] - alpha))
    try:
        return AeroCoefficients(row[1], row[2])
    except ValueError as exc:
        raise PolarParseError(str(exc)) from exc


@dataclass
class XfoilClient:
    """Drives an XFOIL-compatible binary through a scripted stdin session.

    Each call runs in a fresh temporary directory under ``workdir`` so
    several clients can run side by side; one client handles one call at a
    time. Panel count, transition ``ncrit`` and iteration limit are exposed
    because no single setting is right for every Reynolds number.
    """

    binary: str
    timeout: float = 30.0
    n_panels: int = 160
    ncrit: float = 9.0
    max_iter: int = 100
    workdir: str | None = None

    def __post_init__(self):
        if not self.binary:
            raise ValueError("an XFOIL binary path is required")

    @classmethod
    def from_env(cls, var: str = "MCMO_XFOIL", **kwargs) -> "XfoilClient | None":
        binary = os.environ.get(var)
        return cls(binary, **kwargs) if binary else None

    def session_script(self, coord_file: str, polar_file: str, alpha: float, re_c: float) -> str:
        commands = [
            "PLOP", "G F", "",
            f"LOAD {coord_file}", "kt_airfoil",
            "PPAR", f"N {self.n_panels}", "", "",
            "OPER",
            "VPAR", f"N {self.ncrit:g}", "",
            f"ITER {self.max_iter}",
            f"VISC {re_c:.6g}",
            "PACC", polar_file, "",
            f"ALFA {alpha:.6f}",
            "PACC", "",
            "QUIT",
        ]
        return "\n".join(commands) + "\n"

    def evaluate(self, geometry: AirfoilGeometry, alpha: float, re_c: float) -> AeroCoefficients:
        with tempfile.TemporaryDirectory(dir=self.workdir, prefix="xfoil_") as tmp:
            tmp = Path(tmp)
            write_coordinates(geometry, tmp / "coords.dat")
            script = self.session_script("coords.dat", "polar.txt", alpha, re_c)
            try:
                proc = subprocess.run([self.binary], input=script, text=True, cwd=tmp,
                                      capture_output=True, timeout=self.timeout)
            except subprocess.TimeoutExpired as exc:
                raise SolverTimeout(f"solver exceeded {self.timeout} s") from exc
            except OSError as exc:
                raise SolverExitError(f"cannot start solver {self.binary!r}: {exc}") from exc
            if proc.returncode != 0:
                raise SolverExitError(f"solver exited with code {proc.returncode}")
            polar = tmp / "polar.txt"
            if not polar.exists():
                raise PolarParseError("solver wrote no polar file")
            return parse_polar(polar.read_text(), alpha)


def external_evaluate(client: XfoilClient, geometry: AirfoilGeometry, alpha: float,
                      re_c: float) -> AeroCoefficients:
    return client.evaluate(geometry, alpha, re_c)
