"""Rate-bound evaluators, recurrence simulation, and empirical rate fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.stats import linregress

from .algorithms import RunLog


@dataclass(frozen=True)
class RateParams:
    """Constants entering the restart-rate bounds.

    r: strong-Wolfe primal exponent in [1, 2]; mu: its constant;
    theta/c: error-bound exponent/constant; delta: set scaling constant;
    s: smoothness exponent in (1, 2]; curvature: away-curvature constant.
    """

    r: float
    mu: float
    curvature: float
    theta: Optional[float] = None
    c: Optional[float] = None
    delta: Optional[float] = None
    s: float = 2.0

    def __post_init__(self):
        if not 1.0 <= self.r <= 2.0:
            raise ValueError("r must lie in [1, 2]")
        if not (self.mu > 0.0 and self.curvature > 0.0):
            raise ValueError("mu and curvature must be positive")
        if not 1.0 < self.s <= 2.0:
            raise ValueError("s must lie in (1, 2]")
        if self.theta is not None:
            if not 0.0 <= self.theta <= 1.0:
                raise ValueError("theta must lie in [0, 1]")
            if self.theta < 1.0 and abs(self.r - 1.0 / (1.0 - self.theta)) > 1e-12:
                raise ValueError("inconsistent (r, theta): need r = 1/(1-theta)")
        if (self.c is None) != (self.delta is None):
            raise ValueError("c and delta must be supplied together")
        if self.c is not None:
            if not (self.c > 0.0 and self.delta > 0.0):
                raise ValueError("c and delta must be positive")
            mu_derived = (self.c / self.delta) ** self.r
            if abs(self.mu - mu_derived) > 1e-9 * max(1.0, mu_derived):
                raise ValueError("inconsistent mu: expected (c/delta)^r")


def theoretical_bound(params: RateParams, gamma: float, w0: float,
                      t_tilde: float) -> float:
    """Strong-Wolfe-gap bound after t_tilde total inner iterations.

    r < 2: w0 / (1 + t C_g)^{1/(2-r)} with
    C_g = (e^{gamma(2-r)} - 1) / (8 e^{2 gamma} C mu w0^{r-2});
    r = 2: w0 exp(-gamma t / (8 C mu e^{2 gamma})).
    """
    if not (w0 > 0.0 and t_tilde >= 0.0 and gamma > 0.0):
        raise ValueError("need w0 > 0, t_tilde >= 0, gamma > 0")
    r, mu, cur = params.r, params.mu, params.curvature
    if r == 2.0:
        return w0 * math.exp(-gamma * t_tilde / (8.0 * cur * mu * math.e ** (2 * gamma)))
    c_gamma = (math.exp(gamma * (2.0 - r)) - 1.0) / (
        8.0 * math.exp(2.0 * gamma) * cur * mu * w0 ** (r - 2.0)
    )
    return w0 / (1.0 + t_tilde * c_gamma) ** (1.0 / (2.0 - r))


def holder_bound(params: RateParams, gamma: float, w0: float,
                 t_tilde: float) -> float:
    """Rate bound under s-smoothness: w0 / (1 + t C_g)^{1/tau} with
    tau = s/(s-1) - r and C_s = 2^{1+s/(s-1)} (s/(s-1)) mu C^{1/(s-1)}."""
    if not (w0 > 0.0 and t_tilde >= 0.0 and gamma > 0.0):
        raise ValueError("need w0 > 0, t_tilde >= 0, gamma > 0")
    s, r, mu, cur = params.s, params.r, params.mu, params.curvature
    s_ratio = s / (s - 1.0)
    tau = s_ratio - r
    if tau <= 0.0:
        raise ValueError("holder_bound requires r < s/(s-1)")
    c_s = 2.0 ** (1.0 + s_ratio) * s_ratio * mu * cur ** (1.0 / (s - 1.0))
    # the w0 exponent is r - s/(s-1) = -tau, mirroring w0^{r-2} in the
    # s = 2 bound; it renders C_g dimensionless in gap units
    c_gamma = (math.exp(gamma * tau) - 1.0) / (
        c_s * math.exp(gamma * s_ratio) * w0 ** (-tau)
    )
    return w0 / (1.0 + t_tilde * c_gamma) ** (1.0 / tau)


def recurrence_check(h0: float, m: float, beta: float, t_max: int):
    """Simulate h_{t+1} = h_t max(1/2, 1 - m h_t^beta) and verify the
    sub-linear envelope h_t <= C / (t + k)^{1/beta}.

    Returns (trajectory, (k, C), ok). The recurrence is simulated with
    equality, which is the extremal trajectory of the inequality form.
    """
    if not h0 > 0.0:
        raise ValueError("h0 must be positive")
    if not (m > 0.0 and 0.0 < beta <= 1.0):
        raise ValueError("need m > 0 and beta in (0, 1]")
    denom = beta - (1.0 - beta) * (2.0 ** beta - 1.0)
    if denom <= 0.0:
        raise ValueError(f"invalid beta={beta}: constant denominator {denom} <= 0")
    # any k >= (2 - 2^beta)/(2^beta - 1) is admissible; we take that value
    # plus one, i.e. 1/(2^beta - 1), so the halving branch of the induction
    # also covers the very first step (t + k >= 1/(2^beta - 1) for all t >= 0)
    k = (2.0 - 2.0 ** beta) / (2.0 ** beta - 1.0) + 1.0
    c_prime = 1.0 / denom
    c_const = max(h0 * k ** (1.0 / beta), 2.0 * (c_prime / m) ** (1.0 / beta))
    traj = np.empty(t_max + 1)
    traj[0] = h0
    h = h0
    for t in range(t_max):
        h = h * max(0.5, 1.0 - m * h ** beta)
        traj[t + 1] = h
    ts = np.arange(t_max + 1, dtype=np.float64) + k
    with np.errstate(divide="ignore"):
        envelope = np.where(ts > 0.0, c_const / ts ** (1.0 / beta), np.inf)
    # the halving branch makes the envelope exactly tight at t = 1
    # (h0/2 vs C/(1+k)^{1/beta} agree in real arithmetic), so compare
    # with a relative float tolerance
    ok = bool(np.all(traj <= envelope * (1.0 + 1e-12)))
    return traj, (k, c_const), ok


class FitModel(str, Enum):
    LOG_LINEAR = "LogLinear"
    LOG_LOG = "LogLog"


def primal_gaps(log: RunLog, f_star: Optional[float] = None):
    """(t, f - f*) arrays from a run log; f* defaults to the run's minimum f."""
    if not log.records:
        raise ValueError("empty run log")
    ts = np.array([rec.t for rec in log.records], dtype=np.float64)
    fs = np.array([rec.f_value for rec in log.records])
    if f_star is None:
        f_star = float(np.min(fs))
    return ts, fs - f_star


def fit_rate(log: RunLog, model: FitModel, tail_fraction: float = 0.5,
             f_star: Optional[float] = None):
    """Least-squares fit of log10(primal gap) over the tail of a run.

    LogLinear regresses against t, LogLog against log10 t. Returns
    (slope, intercept, r_squared). Requires >= 20 positive-gap tail points.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")
    ts, gaps = primal_gaps(log, f_star=f_star)
    keep = gaps > 0.0
    if model == FitModel.LOG_LOG:
        keep &= ts >= 1.0
    ts, gaps = ts[keep], gaps[keep]
    start = int(len(ts) * (1.0 - tail_fraction))
    ts, gaps = ts[start:], gaps[start:]
    if len(ts) < 20:
        raise ValueError(
            f"need at least 20 positive-gap tail points, got {len(ts)}"
        )
    x = np.log10(ts) if model == FitModel.LOG_LOG else ts
    res = linregress(x, np.log10(gaps))
    return float(res.slope), float(res.intercept), float(res.rvalue ** 2)


def calibrate_mu(params_r: float, curvature: float, gamma: float, w0: float,
                 first_boundary_t: float, first_boundary_w: float) -> float:
    """Smallest mu making the rate bound tight at the first restart boundary."""
    if not (first_boundary_w > 0.0 and first_boundary_w < w0):
        raise ValueError("first boundary gap must lie in (0, w0)")
    if params_r == 2.0:
        # w0 exp(-g t / (8 C mu e^{2g})) = w_1  =>  solve for mu
        return gamma * first_boundary_t / (
            8.0 * curvature * math.e ** (2 * gamma) * math.log(w0 / first_boundary_w)
        )
    ratio = (w0 / first_boundary_w) ** (2.0 - params_r) - 1.0
    # invert C_gamma^r = ratio / t for mu
    return first_boundary_t * (math.exp(gamma * (2.0 - params_r)) - 1.0) / (
        8.0 * math.exp(2.0 * gamma) * curvature * w0 ** (params_r - 2.0) * ratio
    )
