"""Step-size selection: exact quadratic, golden section, adaptive backtracking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .objectives import LeastSquares

# Relative slack on the quadratic-model acceptance test; at the exact
# smoothness constant the test is an equality and float noise must not
# trigger a spurious backtrack.
MODEL_SLACK = 1e-12

GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LipschitzState:
    """Dynamic Lipschitz estimate threaded through adaptive line searches."""

    current_l: float
    tau: float
    xi: float

    def __post_init__(self):
        if not self.current_l > 0.0:
            raise ValueError("Lipschitz estimate must stay positive")
        if not (self.tau > 1.0 and self.xi >= 1.0):
            raise ValueError("require tau > 1 and xi >= 1")


def exact_quadratic(
    obj: LeastSquares,
    x: np.ndarray,
    d: np.ndarray,
    eta_max: float,
    grad: Optional[np.ndarray] = None,
) -> float:
    """Minimizer of the quadratic restriction eta -> f(x + eta d) on [0, eta_max]."""
    if not isinstance(obj, LeastSquares):
        raise TypeError("exact line search requires a quadratic objective")
    d = np.asarray(d)
    if not np.any(d):
        raise ValueError("zero direction")
    if grad is None:
        grad = obj.gradient(x)
    denom = obj.curvature_along(d)
    if denom <= 1e-300:
        return eta_max
    eta = -float(grad @ d) / denom
    return min(max(eta, 0.0), eta_max)


def golden_section(
    obj, x, d, eta_max: float, tol: float = 1e-10, max_iter: int = 200
) -> float:
    """Golden-section minimization of eta -> f(x + eta d) on [0, eta_max]."""
    d = np.asarray(d)
    if not np.any(d):
        raise ValueError("zero direction")
    phi = lambda eta: obj.value(x + eta * d)
    lo, hi = 0.0, float(eta_max)
    a = hi - GOLDEN_RATIO * (hi - lo)
    b = lo + GOLDEN_RATIO * (hi - lo)
    fa, fb = phi(a), phi(b)
    for _ in range(max_iter):
        if hi - lo <= tol * eta_max:
            break
        if fa <= fb:
            hi, b, fb = b, a, fa
            a = hi - GOLDEN_RATIO * (hi - lo)
            fa = phi(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + GOLDEN_RATIO * (hi - lo)
            fb = phi(b)
    candidates = [(phi(lo), lo), (fa, a), (fb, b), (phi(hi), hi)]
    return min(candidates)[1]


def quadratic_model(f_x: float, slope: float, dd: float, eta: float, m: float) -> float:
    """Directional quadratic upper bound f(x) + eta <grad, d> + eta^2 m |d|^2 / 2."""
    return f_x + eta * slope + 0.5 * eta * eta * m * dd


def adaptive_step(
    state: LipschitzState,
    obj,
    x: np.ndarray,
    d: np.ndarray,
    eta_max: float,
    grad: Optional[np.ndarray] = None,
    f_x: Optional[float] = None,
):
    """Backtracking step with a dynamically adapted Lipschitz estimate.

    Starts from M = current_l / xi and multiplies by tau until the candidate
    step satisfies the quadratic model. Returns (eta, new_state, evals) where
    evals counts trial objective evaluations.
    """
    d = np.asarray(d)
    dd = float(d @ d)
    if grad is None:
        grad = obj.gradient(x)
    if f_x is None:
        f_x = obj.value(x)
    slope = float(grad @ d)
    if dd < 1e-28:
        # vanishing direction: caller treats this as a null step
        return 0.0, state, 0
    if slope >= 0.0:
        raise ValueError("adaptive step requires a descent direction")
    m = state.current_l / state.xi
    evals = 0
    while True:
        eta = min(-slope / (m * dd), eta_max)
        f_new = obj.value(x + eta * d)
        evals += 1
        bound = quadratic_model(f_x, slope, dd, eta, m)
        if f_new <= bound + MODEL_SLACK * max(1.0, abs(bound)):
            return eta, LipschitzState(m, state.tau, state.xi), evals
        m *= state.tau
        if m > 1e300:
            raise ArithmeticError(
                "Lipschitz estimate diverged; objective violates smoothness"
            )
