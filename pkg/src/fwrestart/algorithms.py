"""Solvers: fractional away-step FW, scheduled restarts, fractional FW,
restarted fractional FW, vanilla FW, and the one-shot large-schedule mode."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    ActiveSet,
    IterationRecord,
    LineSearchKind,
    SolverConfig,
    StepType,
    as_vector,
    dense_id,
)
from .gaps import compute_gaps
from .linesearch import LipschitzState, adaptive_step, exact_quadratic, golden_section
from .oracles import FeasibleRegion

STALL_WINDOW = 50
STALL_DELTA = 1e-15
REBUILD_PERIOD = 1000  # recompute x from the active set to suppress drift


class Termination(str, Enum):
    GAP_REACHED = "GapReached"
    ORACLE_BUDGET = "OracleBudget"
    STALLED = "Stalled"


@dataclass(frozen=True)
class AdaptiveTraceEntry:
    """Accepted backtracking step, kept so the model test can be re-asserted."""

    t: int
    f_x: float
    slope: float
    dir_sq_norm: float
    eta: float
    accepted_m: float
    f_new: float


@dataclass
class RunLog:
    records: list = field(default_factory=list)
    restart_boundaries: list = field(default_factory=list)  # (k, t, gap_at_restart)
    termination: Termination = Termination.GAP_REACHED
    final_x: Optional[np.ndarray] = None
    final_active_set: Optional[ActiveSet] = None
    final_fw_gap: Optional[float] = None
    final_strong_wolfe_gap: Optional[float] = None
    adaptive_trace: list = field(default_factory=list)

    @property
    def lmo_calls(self) -> int:
        return self.records[-1].lmo_calls if self.records else 0

    @property
    def grad_calls(self) -> int:
        return self.records[-1].grad_calls if self.records else 0


def initial_extreme_point(region: FeasibleRegion, seed: int):
    """Random extreme point: LMO applied to a seeded Gaussian direction."""
    rng = np.random.default_rng(seed)
    return region.lmo(rng.standard_normal(region.dim))


class _Run:
    """Single solver run owning its iterate, active set, counters and records."""

    def __init__(self, region, obj, cfg: SolverConfig, x, active_set=None,
                 budget: Optional[int] = None):
        self.region = region
        self.obj = obj
        self.cfg = cfg
        self.x = as_vector(x, region.dim)
        self.active_set = active_set
        self.budget = cfg.max_oracle_calls if budget is None else budget
        self.lmo_calls = 0
        self.grad_calls = 0
        self.t = 0
        self.restart_index = 0
        self.records = []
        self.restart_boundaries = []
        self.adaptive_trace = []
        ap = cfg.adaptive_params
        self.lip = LipschitzState(ap.initial_l, ap.tau, ap.xi)
        self.f_x = obj.value(self.x)
        self.stall_count = 0
        self.steps_since_rebuild = 0
        self._gap_cache = None

    @property
    def oracle_calls(self) -> int:
        return self.lmo_calls + self.grad_calls

    def budget_left(self) -> bool:
        return self.oracle_calls < self.budget

    def gaps(self):
        """Gradient and gap report at the current iterate, cached until a step.

        The gradient is shared between the gap check and the following step,
        so each iteration costs one gradient and one LMO call.
        """
        if self._gap_cache is None:
            grad = self.obj.gradient(self.x)
            self.grad_calls += 1
            try:
                rep = compute_gaps(self.region, self.obj, self.x,
                                   self.active_set, grad=grad)
            except ValueError:
                if self.active_set is None:
                    raise
                # drift beyond tolerance: rebuild from the active set, retry once
                self.x = self.active_set.reconstruct()
                self.f_x = self.obj.value(self.x)
                grad = self.obj.gradient(self.x)
                self.grad_calls += 1
                rep = compute_gaps(self.region, self.obj, self.x,
                                   self.active_set, grad=grad)
            self.lmo_calls += 1
            self._gap_cache = (grad, rep)
        return self._gap_cache

    def _choose_eta(self, d, eta_max, grad):
        ls = self.cfg.line_search
        if ls == LineSearchKind.EXACT:
            return exact_quadratic(self.obj, self.x, d, eta_max, grad=grad)
        if ls == LineSearchKind.GOLDEN:
            return golden_section(self.obj, self.x, d, eta_max)
        eta, self.lip, _ = adaptive_step(
            self.lip, self.obj, self.x, d, eta_max, grad=grad, f_x=self.f_x
        )
        self._pending_trace = (self.f_x, float(grad @ d), float(d @ d), eta,
                               self.lip.current_l)
        return eta

    def _advance(self, step):
        x_new = self.x + step
        self.steps_since_rebuild += 1
        if self.active_set is not None and self.steps_since_rebuild >= REBUILD_PERIOD:
            x_new = self.active_set.reconstruct()
            self.steps_since_rebuild = 0
        f_new = self.obj.value(x_new)
        if abs(f_new - self.f_x) < STALL_DELTA:
            self.stall_count += 1
        else:
            self.stall_count = 0
        if self.cfg.line_search == LineSearchKind.ADAPTIVE and \
                getattr(self, "_pending_trace", None) is not None:
            f_x, slope, dd, eta, m = self._pending_trace
            self.adaptive_trace.append(
                AdaptiveTraceEntry(self.t, f_x, slope, dd, eta, m, f_new)
            )
            self._pending_trace = None
        self.x = x_new
        self.f_x = f_new
        self._gap_cache = None

    def _record(self, step_type, eta, fw_gap, strong_gap):
        self.records.append(IterationRecord(
            t=self.t,
            step_type=step_type,
            eta=float(eta),
            f_value=self.f_x,
            fw_gap=fw_gap,
            strong_wolfe_gap=strong_gap,
            active_set_size=len(self.active_set) if self.active_set is not None else 0,
            lmo_calls=self.lmo_calls,
            grad_calls=self.grad_calls,
            restart_index=self.restart_index,
        ))
        self.t += 1

    def afw_segment(self, w_reference, gamma, stop_on_away=False, eps=None,
                    max_steps=None):
        """Away-step inner loop; runs until the strong Wolfe gap contracts by
        exp(-gamma) relative to ``w_reference``. Returns the exit reason."""
        threshold = math.exp(-gamma) * w_reference
        steps = 0
        while True:
            grad, rep = self.gaps()
            w = rep.strong_wolfe_gap
            if eps is not None and w < eps:
                return "eps"
            if w <= threshold:
                return "contract"
            if not self.budget_left():
                return "budget"
            if max_steps is not None and steps >= max_steps:
                return "maxsteps"
            vid, v = rep.fw_vertex
            if rep.fw_gap > threshold / 2.0:
                d = v - self.x
                eta_max = 1.0
                is_away = False
            else:
                if stop_on_away:
                    return "away"
                aid, a = rep.away_vertex
                alpha = self.active_set.weight_of(aid)
                if alpha >= 1.0 - 1e-15:
                    # singleton support: away direction vanishes; the gap
                    # guard above should have fired, treat as stalled
                    return "stalled"
                d = self.x - a
                eta_max = alpha / (1.0 - alpha)
                is_away = True
            if float(d @ d) < 1e-28:
                self._record(StepType.NULL, 0.0, rep.fw_gap, w)
                self.stall_count += 1
                self._gap_cache = None
            else:
                eta = self._choose_eta(d, eta_max, grad)
                if is_away:
                    was_drop = self.active_set.apply_away_step(aid, eta)
                    step_type = StepType.DROP if was_drop else StepType.AWAY
                else:
                    self.active_set.apply_fw_step(vid, v, eta)
                    step_type = StepType.FW
                self._advance(eta * d)
                self._record(step_type, eta, rep.fw_gap, w)
            steps += 1
            if self.stall_count >= STALL_WINDOW:
                return "stalled"

    def burn_in_phase(self, gamma, estimate) -> int:
        """Restart segments until exp(-gamma) w / 2 <= estimate, capped at the
        complexity bound. Returns the number of iterations consumed."""
        _, rep = self.gaps()
        w0 = rep.strong_wolfe_gap
        if w0 <= 0.0 or math.exp(-gamma) * w0 / 2.0 <= estimate:
            return 0
        cap = math.ceil(
            8.0 * math.exp(gamma) / gamma * math.log(w0 / (2.0 * estimate))
        ) + len(self.active_set)
        used = 0
        while used < cap and self.budget_left():
            _, rep = self.gaps()
            w = rep.strong_wolfe_gap
            if w <= 0.0 or math.exp(-gamma) * w / 2.0 <= estimate:
                break
            t0 = self.t
            reason = self.afw_segment(w, gamma, max_steps=cap - used)
            used += self.t - t0
            if reason == "contract":
                _, rep_exit = self.gaps()
                self.restart_boundaries.append(
                    (self.restart_index, self.t, rep_exit.strong_wolfe_gap)
                )
                self.restart_index += 1
            elif reason != "maxsteps":
                break
        return used

    def build_log(self, termination: Termination) -> RunLog:
        final_fw = final_w = None
        if self._gap_cache is not None:
            rep = self._gap_cache[1]
            final_fw, final_w = rep.fw_gap, rep.strong_wolfe_gap
        elif self.records:
            final_fw = self.records[-1].fw_gap
            final_w = self.records[-1].strong_wolfe_gap
        return RunLog(
            records=self.records,
            restart_boundaries=self.restart_boundaries,
            termination=termination,
            final_x=self.x.copy(),
            final_active_set=self.active_set,
            final_fw_gap=final_fw,
            final_strong_wolfe_gap=final_w,
            adaptive_trace=self.adaptive_trace,
        )


_EXIT_TERMINATION = {
    "contract": Termination.GAP_REACHED,
    "eps": Termination.GAP_REACHED,
    "away": Termination.GAP_REACHED,
    "budget": Termination.ORACLE_BUDGET,
    "maxsteps": Termination.ORACLE_BUDGET,
    "stalled": Termination.STALLED,
}


def _require_polytope(region):
    if not region.is_polytope():
        raise ValueError("away-step solvers require a polytope region")


def _setup_run(region, obj, cfg, x0=None, active_set=None, with_active_set=True,
               budget=None):
    if active_set is not None:
        run = _Run(region, obj, cfg, active_set.reconstruct(),
                   active_set=active_set if with_active_set else None,
                   budget=budget)
        return run
    if x0 is None:
        vid, v = initial_extreme_point(region, cfg.seed)
        s = ActiveSet.from_vertex(vid, v, cfg.weight_tol) if with_active_set else None
        run = _Run(region, obj, cfg, v, active_set=s, budget=budget)
        run.lmo_calls += 1  # the initialization LMO counts
        return run
    x0 = as_vector(x0, region.dim)
    if not region.contains(x0, 1e-8):
        raise ValueError("starting point outside the feasible region")
    s = ActiveSet.from_vertex(dense_id(x0), x0, cfg.weight_tol) \
        if with_active_set else None
    return _Run(region, obj, cfg, x0, active_set=s, budget=budget)


def fractional_afw(region, obj, s0: ActiveSet, cfg: SolverConfig,
                   w_reference: float, budget: Optional[int] = None):
    """One away-step segment: iterate until w(x, S) <= exp(-gamma) w_reference.

    Returns the (mutated) active set and the segment's run log.
    """
    _require_polytope(region)
    if not w_reference > 0.0:
        raise ValueError("w_reference must be positive")
    run = _setup_run(region, obj, cfg, active_set=s0, budget=budget)
    if w_reference <= cfg.target_gap:
        return s0, run.build_log(Termination.GAP_REACHED)
    reason = run.afw_segment(w_reference, cfg.gamma)
    return s0, run.build_log(_EXIT_TERMINATION[reason])


def burn_in(region, obj, s0: ActiveSet, cfg: SolverConfig) -> ActiveSet:
    """Run restart segments until the gap is small relative to the curvature
    estimate; a no-op when no estimate is configured."""
    if cfg.curvature_estimate is None:
        return s0
    _require_polytope(region)
    run = _setup_run(region, obj, cfg, active_set=s0)
    run.burn_in_phase(cfg.gamma, cfg.curvature_estimate)
    return s0


def scheduled_restarts(region, obj, x0=None, cfg: SolverConfig = None,
                       active_set: Optional[ActiveSet] = None) -> RunLog:
    """Restarted fractional away-step Frank-Wolfe.

    Chains away-step segments, each contracting the strong Wolfe gap by
    exp(-gamma), until the target gap or the oracle budget is reached.
    Starts from a random extreme point unless x0 or an active set is given.
    """
    cfg = cfg or SolverConfig()
    _require_polytope(region)
    run = _setup_run(region, obj, cfg, x0=x0, active_set=active_set)
    if cfg.curvature_estimate is not None:
        run.burn_in_phase(cfg.gamma, cfg.curvature_estimate)
    termination = None
    while termination is None:
        _, rep = run.gaps()
        w = rep.strong_wolfe_gap
        if w <= cfg.target_gap:
            termination = Termination.GAP_REACHED
        elif not run.budget_left():
            termination = Termination.ORACLE_BUDGET
        else:
            reason = run.afw_segment(w, cfg.gamma)
            if reason == "contract":
                _, rep_exit = run.gaps()
                run.restart_boundaries.append(
                    (run.restart_index, run.t, rep_exit.strong_wolfe_gap)
                )
                run.restart_index += 1
            else:
                termination = _EXIT_TERMINATION[reason]
    return run.build_log(termination)


def fractional_fw(region, obj, x0, cfg: SolverConfig, g_reference: float,
                  budget: Optional[int] = None):
    """FW-direction-only segment: iterate until g(x) <= exp(-gamma) g_reference.

    Works on any region (no away machinery). Returns (final x, run log).
    """
    if not g_reference > 0.0:
        raise ValueError("g_reference must be positive")
    cfg = cfg or SolverConfig()
    run = _setup_run(region, obj, cfg, x0=x0, with_active_set=False, budget=budget)
    threshold = math.exp(-cfg.gamma) * g_reference
    termination = None
    while termination is None:
        grad, rep = run.gaps()
        g = rep.fw_gap
        if g <= threshold:
            termination = Termination.GAP_REACHED
        elif not run.budget_left():
            termination = Termination.ORACLE_BUDGET
        elif run.stall_count >= STALL_WINDOW:
            termination = Termination.STALLED
        else:
            vid, v = rep.fw_vertex
            d = v - run.x
            if float(d @ d) < 1e-28:
                run._record(StepType.NULL, 0.0, g, g)
                run.stall_count += 1
                run._gap_cache = None
            else:
                eta = run._choose_eta(d, 1.0, grad)
                run._advance(eta * d)
                run._record(StepType.FW, eta, g, g)
    return run.x.copy(), run.build_log(termination)


def restart_fractional_fw(region, obj, x0=None, cfg: SolverConfig = None) -> RunLog:
    """Restarted fractional FW driven by the surrogate gap Phi.

    A FW step is taken while the FW inner product exceeds Phi * exp(-gamma);
    otherwise Phi is refreshed to g(x) (which then satisfies
    Phi_new < Phi * exp(-gamma)) and the iterate is left unchanged.
    """
    cfg = cfg or SolverConfig()
    run = _setup_run(region, obj, cfg, x0=x0, with_active_set=False)
    contract = math.exp(-cfg.gamma)
    phi = None
    termination = None
    while termination is None:
        grad, rep = run.gaps()
        g = rep.fw_gap
        if phi is None:
            phi = g
        if g <= cfg.target_gap:
            termination = Termination.GAP_REACHED
        elif not run.budget_left():
            termination = Termination.ORACLE_BUDGET
        elif run.stall_count >= STALL_WINDOW:
            termination = Termination.STALLED
        elif g > phi * contract:
            vid, v = rep.fw_vertex
            d = v - run.x
            eta = run._choose_eta(d, 1.0, grad)
            run._advance(eta * d)
            run._record(StepType.FW, eta, g, g)
        else:
            phi = g
            run.restart_boundaries.append((run.restart_index, run.t, phi))
            run.restart_index += 1
            run._record(StepType.NULL, 0.0, g, g)
            run.stall_count = 0  # Phi updates are progress, not stalls
    return run.build_log(termination)


def vanilla_fw(region, obj, x0=None, cfg: SolverConfig = None) -> RunLog:
    """Classic Frank-Wolfe with line search, stopping on the FW gap."""
    cfg = cfg or SolverConfig()
    run = _setup_run(region, obj, cfg, x0=x0, with_active_set=False)
    termination = None
    while termination is None:
        grad, rep = run.gaps()
        g = rep.fw_gap
        if g <= cfg.target_gap:
            termination = Termination.GAP_REACHED
        elif not run.budget_left():
            termination = Termination.ORACLE_BUDGET
        elif run.stall_count >= STALL_WINDOW:
            termination = Termination.STALLED
        else:
            vid, v = rep.fw_vertex
            d = v - run.x
            if float(d @ d) < 1e-28:
                run._record(StepType.NULL, 0.0, g, g)
                run.stall_count += 1
                run._gap_cache = None
            else:
                eta = run._choose_eta(d, 1.0, grad)
                run._advance(eta * d)
                run._record(StepType.FW, eta, g, g)
    return run.build_log(termination)


def one_shot_large_gamma(region, obj, s0: ActiveSet, epsilon: float,
                         cfg: SolverConfig = None) -> RunLog:
    """Single away-step segment with gamma = ln(w0 / epsilon) + 0.1.

    Stops as soon as w(x, S) < epsilon or an away direction is selected
    (without executing it); only FW steps are ever taken.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    cfg = cfg or SolverConfig()
    _require_polytope(region)
    run = _setup_run(region, obj, cfg, active_set=s0)
    _, rep = run.gaps()
    w0 = rep.strong_wolfe_gap
    if w0 <= epsilon:
        return run.build_log(Termination.GAP_REACHED)
    gamma = math.log(w0 / epsilon) + 0.1
    reason = run.afw_segment(w0, gamma, stop_on_away=True, eps=epsilon)
    return run.build_log(_EXIT_TERMINATION[reason])
