"""The airfoil MCMO problem: maximize lift and lift-to-drag over a Reynolds range."""

from __future__ import annotations

import numpy as np

from ..problem import LOG10, BoxSpace, MCMOProblem
from .cache import EvaluationCache
from .evaluators import RE_RANGE, AeroCoefficients, XfoilClient, mock_evaluate
from .geometry import ALPHA_RANGE, BETA_RANGE, MU_X_RANGE, MU_Y_RANGE, KTParams, kt_transform

REFERENCE_POINT = (0.0, 1.0)
DECISION_NAMES = ("mu_x", "mu_y", "beta", "alpha")


def airfoil_objectives(coeffs: AeroCoefficients) -> np.ndarray:
    """``(-(CL/CD)/100, -CL)``: both maximized quantities as minimization objectives."""
    if coeffs.cd <= 0:
        raise ValueError(f"drag coefficient must be positive, got {coeffs.cd}")
    return np.array([-(coeffs.cl / coeffs.cd) / 100.0, -coeffs.cl])


def decision_space() -> BoxSpace:
    bounds = (MU_X_RANGE, MU_Y_RANGE, BETA_RANGE, ALPHA_RANGE)
    return BoxSpace(tuple(b[0] for b in bounds), tuple(b[1] for b in bounds))


def condition_space() -> BoxSpace:
    return BoxSpace((RE_RANGE[0],), (RE_RANGE[1],), (LOG10,))


def airfoil_problem(client: XfoilClient | None = None, cache: EvaluationCache | None = None,
                    n_points: int = 200) -> MCMOProblem:
    """Airfoil problem backed by the mock evaluator, or by ``client`` when given.

    Decision vector ``(mu_x, mu_y, beta, alpha)``; condition ``(Re_c,)``.
    """
    def coefficients(mu_x, mu_y, beta, alpha, re_c) -> AeroCoefficients:
        if client is None:
            return mock_evaluate(mu_x, mu_y, beta, alpha, re_c)
        geometry = kt_transform(KTParams(mu_x, mu_y, beta, alpha), n_points)
        return client.evaluate(geometry, alpha, re_c)

    def evaluator(x, c):
        inputs = (*(float(v) for v in x), float(c[0]))
        if cache is None:
            coeffs = coefficients(*inputs)
        else:
            coeffs = cache.get_or_compute(inputs, lambda: coefficients(*inputs))
        return airfoil_objectives(coeffs)

    return MCMOProblem(
        decision_space=decision_space(),
        condition_space=condition_space(),
        objective_count=2,
        evaluator=evaluator,
        name="airfoil-mock" if client is None else "airfoil-external",
        reentrant=client is None,
        reference_point=REFERENCE_POINT,
    )
