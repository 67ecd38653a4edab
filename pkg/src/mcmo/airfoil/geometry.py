"""Kármán–Trefftz airfoil generation and coordinate files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MU_X_RANGE = (-0.4, -0.05)
MU_Y_RANGE = (0.0, 0.4)
BETA_RANGE = (1.0, 30.0)
ALPHA_RANGE = (0.0, 30.0)

_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class KTParams:
    """Circle centre ``(mu_x, mu_y)``, trailing-edge angle and angle of attack (degrees)."""

    mu_x: float
    mu_y: float
    beta: float
    alpha: float = 0.0

    def validate(self, strict: bool = True) -> "KTParams":
        checks = [("mu_x", self.mu_x, MU_X_RANGE), ("mu_y", self.mu_y, MU_Y_RANGE),
                  ("beta", self.beta, BETA_RANGE), ("alpha", self.alpha, ALPHA_RANGE)]
        for name, value, (lo, hi) in checks:
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            if strict and not lo <= value <= hi:
                raise ValueError(f"{name}={value} outside [{lo}, {hi}]")
        return self

    def as_array(self) -> np.ndarray:
        return np.array([self.mu_x, self.mu_y, self.beta, self.alpha])


@dataclass
class AirfoilGeometry:
    """Closed contour, chord-normalized, ordered TE -> upper -> LE -> lower -> TE."""

    x: np.ndarray
    y: np.ndarray

    @property
    def n_points(self) -> int:
        return len(self.x)

    @property
    def coordinates(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def is_closed(self, tol: float = 1e-9) -> bool:
        return bool(np.hypot(self.x[0] - self.x[-1], self.y[0] - self.y[-1]) <= tol)


def circle_radius(mu_x: float, mu_y: float) -> float:
    """Radius of the circle centred at ``(mu_x, mu_y)`` passing through ``(1, 0)``."""
    return float(np.hypot(1.0 - mu_x, mu_y))


def kt_map(zeta, exponent: float) -> np.ndarray:
    """``z = n [(zeta+1)^n + (zeta-1)^n] / [(zeta+1)^n - (zeta-1)^n]``.

    Evaluated as ``n (1 + q^n) / (1 - q^n)`` with ``q = (zeta-1)/(zeta+1)``,
    which keeps the principal branch continuous along the whole circle.
    """
    zeta = np.asarray(zeta, dtype=np.complex128)
    q = (zeta - 1.0) / (zeta + 1.0)
    qn = np.power(q, exponent)
    qn = np.where(q == 0, 0.0, qn)
    denom = 1.0 - qn
    if np.any(np.abs(denom) < _SINGULAR_TOL):
        raise ValueError("Kármán–Trefftz map is singular for this circle")
    return exponent * (1.0 + qn) / denom


def kt_transform(params: KTParams, n_points: int = 200, strict: bool = True) -> AirfoilGeometry:
    """Airfoil contour from Kármán–Trefftz parameters.

    The circle is sampled at ``n_points`` equally spaced angles starting and
    ending at the trailing-edge point ``zeta = 1``. The result is scaled so the
    chord spans ``x in [0, 1]``. ``alpha`` is not applied to the geometry.
    ``strict=False`` skips the range check (used to probe limits such as
    ``beta = 0``).
    """
    if not isinstance(params, KTParams):
        params = KTParams(*params)
    params.validate(strict)
    if n_points < 40:
        raise ValueError("n_points must be at least 40")
    exponent = 2.0 - params.beta / 180.0
    center = complex(params.mu_x, params.mu_y)
    radius = circle_radius(params.mu_x, params.mu_y)
    theta0 = np.angle(1.0 - center)
    theta = theta0 + np.linspace(0.0, 2.0 * np.pi, n_points)
    zeta = center + radius * np.exp(1j * theta)
    zeta[0] = zeta[-1] = 1.0
    z = kt_map(zeta, exponent)
    x_le = z.real.min()
    chord = z.real[0] - x_le
    x = (z.real - x_le) / chord
    y = z.imag / chord
    y[0] = y[-1] = 0.0
    x[0] = x[-1] = 1.0
    return AirfoilGeometry(x, y)


def _secant_angle(geometry: AirfoilGeometry, k: int) -> float:
    te = np.array([geometry.x[0], geometry.y[0]])
    upper = np.array([geometry.x[k], geometry.y[k]]) - te
    lower = np.array([geometry.x[-1 - k], geometry.y[-1 - k]]) - te
    cos = np.dot(upper, lower) / (np.linalg.norm(upper) * np.linalg.norm(lower))
    return float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))


def trailing_edge_angle(geometry: AirfoilGeometry, n_fit: int = 3) -> float:
    """Interior trailing-edge angle in degrees.

    The angle between the secants from the trailing edge to the ``k``-th point
    of each surface is linear in ``k`` to leading order; a straight-line fit
    over ``k = 1..n_fit`` is extrapolated to ``k = 0``.
    """
    if geometry.n_points < 2 * n_fit + 2:
        raise ValueError("geometry has too few points to measure the trailing edge")
    ks = np.arange(1, n_fit + 1)
    angles = np.array([_secant_angle(geometry, k) for k in ks])
    if not np.all(np.isfinite(angles)):
        raise ValueError("degenerate trailing edge")
    slope, intercept = np.polyfit(ks, angles, 1)
    return float(max(intercept, 0.0))


def _segments_intersect(p1, p2, q1, q2) -> np.ndarray:
    """Vectorized test (touching included) for segment arrays ``p1p2`` vs ``q1q2``."""
    def cross(o, a, b):
        return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])
    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    boxes = ((np.minimum(p1[..., 0], p2[..., 0]) <= np.maximum(q1[..., 0], q2[..., 0]))
             & (np.minimum(q1[..., 0], q2[..., 0]) <= np.maximum(p1[..., 0], p2[..., 0]))
             & (np.minimum(p1[..., 1], p2[..., 1]) <= np.maximum(q1[..., 1], q2[..., 1]))
             & (np.minimum(q1[..., 1], q2[..., 1]) <= np.maximum(p1[..., 1], p2[..., 1])))
    return (d1 * d2 <= 0) & (d3 * d4 <= 0) & boxes


def _sweep_self_intersects(pts: np.ndarray) -> bool:
    n = len(pts)
    a = pts
    b = np.roll(pts, -1, axis=0)
    # offsets 0, 1 and n-1 pair an edge with itself or a neighbour sharing a vertex
    for offset in range(2, n - 1):
        j = (np.arange(n) + offset) % n
        if np.any(_segments_intersect(a, b, a[j], b[j])):
            return True
    return False


def self_intersects(geometry: AirfoilGeometry, method: str = "auto") -> bool:
    """True if two non-adjacent edges of the closed contour cross.

    ``"sweep"`` tests every edge pair. ``"auto"`` first checks whether both
    surfaces are graphs over ``x`` (monotone from the leading edge); if so the
    contour is simple exactly when the upper surface stays above the lower
    one between the end points, otherwise it falls back to the sweep.
    """
    pts = geometry.coordinates
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if method == "sweep":
        return _sweep_self_intersects(pts)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    x, y = geometry.x, geometry.y
    le = int(np.argmin(x))
    xu, yu = x[:le + 1][::-1], y[:le + 1][::-1]
    xl, yl = x[le:], y[le:]
    if not (np.all(np.diff(xu) > 0) and np.all(np.diff(xl) > 0)):
        return _sweep_self_intersects(pts)
    stations = np.union1d(xu[1:-1], xl[1:-1])
    gap = np.interp(stations, xu, yu) - np.interp(stations, xl, yl)
    return bool(np.any(gap <= 0))


def write_coordinates(geometry: AirfoilGeometry, path, name: str | None = None) -> Path:
    """Plain ``x y`` per line; optional leading name line."""
    path = Path(path)
    lines = [] if name is None else [name]
    lines += [f"{x:.10f} {y:.10f}" for x, y in zip(geometry.x, geometry.y)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_coordinates(path) -> AirfoilGeometry:
    """Read a coordinate file written by :func:`write_coordinates` (name line optional)."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            if rows or lineno > 1:
                raise ValueError(f"{path}:{lineno}: cannot parse coordinate line {line!r}")
    if not rows:
        raise ValueError(f"{path}: no coordinates found")
    arr = np.array(rows)
    return AirfoilGeometry(arr[:, 0], arr[:, 1])
