"""End-to-end acceptance checks.

Each test covers one observable guarantee of the toolkit and prints a single
PASS/FAIL line with the measured quantities and its tolerance. Instances are
frozen (fixed data seeds and initializations) so results are reproducible.
"""

import json
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from fwrestart import (
    ActiveSet,
    Box,
    L1Ball,
    LeastSquares,
    LineSearchKind,
    Logistic,
    PoweredNorm,
    Simplex,
    SolverConfig,
    StepType,
    Termination,
    brute_force_strong_wolfe,
    compute_gaps,
    generate_synthetic,
    initial_extreme_point,
    lp_ball,
    one_shot_large_gamma,
    scheduled_restarts,
    vanilla_fw,
)
from fwrestart.analysis import (
    FitModel,
    RateParams,
    calibrate_mu,
    fit_rate,
    recurrence_check,
    theoretical_bound,
)
from fwrestart.cli import main as cli_main
from fwrestart.linesearch import MODEL_SLACK, quadratic_model


def _report(num, name, ok, detail):
    line = f"[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    assert ok, line


def _calls_to(log, f_star, gap):
    for rec in log.records:
        if rec.f_value - f_star <= gap:
            return rec.lmo_calls + rec.grad_calls
    return None


# ---------------------------------------------------------------------------
# Frozen benchmark: 50-dim planted quadratic on an l1 ball scaled so the
# optimum sits on the boundary (radius = 0.4 * |unconstrained minimizer|_1).
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def quad_problem():
    data = generate_synthetic("regression", 70, 50, 0.1, seed=38)
    obj = LeastSquares(data.X, data.y)
    w_hat, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    region = L1Ball(0.4 * float(np.abs(w_hat).sum()), 50)
    cfg = SolverConfig(gamma=0.5, target_gap=1e-13, max_oracle_calls=50_000, seed=3)
    ref = scheduled_restarts(region, obj, cfg=cfg.with_(max_oracle_calls=400_000))
    f_star = min(rec.f_value for rec in ref.records)
    log = scheduled_restarts(region, obj, cfg=cfg)
    return region, obj, cfg, f_star, log


@pytest.fixture(scope="module")
def powered_problem():
    data = generate_synthetic("regression", 200, 50, 0.1, seed=0)
    obj = PoweredNorm(data.X, data.y, 1.5)
    res = minimize(obj.value, np.zeros(50), jac=obj.gradient,
                   method="L-BFGS-B", options={"maxiter": 500})
    region = L1Ball(0.5 * float(np.abs(res.x).sum()), 50)
    cfg = SolverConfig(
        gamma=0.5, target_gap=1e-12, max_oracle_calls=300_000,
        line_search=LineSearchKind.ADAPTIVE,
    )
    slog = scheduled_restarts(region, obj, cfg=cfg)
    vlog = vanilla_fw(region, obj, cfg=cfg.with_(max_oracle_calls=20_000))
    f_star = min(
        min(r.f_value for r in slog.records),
        min(r.f_value for r in vlog.records),
    )
    return region, obj, cfg, f_star, slog, vlog


def test_criterion_01_restart_contract(quad_problem, powered_problem):
    logs = [quad_problem[4], powered_problem[4]]
    data = generate_synthetic("classification", 100, 20, 0.3, seed=8)
    logs.append(scheduled_restarts(
        L1Ball(3.0, 20), Logistic(data.X, data.y),
        cfg=SolverConfig(gamma=0.5, target_gap=1e-9, max_oracle_calls=50_000,
                         line_search=LineSearchKind.ADAPTIVE),
    ))
    checked = 0
    ok = True
    for log in logs:
        gamma = 0.5
        ws = [log.records[0].strong_wolfe_gap] + [w for _, _, w in log.restart_boundaries]
        w0 = ws[0]
        for k, (prev, cur) in enumerate(zip(ws, ws[1:])):
            checked += 1
            ok &= cur <= math.exp(-gamma) * prev * (1 + 1e-12)
            ok &= cur <= math.exp(-gamma * (k + 1)) * w0 * (1 + 1e-12)
    _report(1, "restart contract", ok,
            f"{checked} restart boundaries on 3 problems each satisfy "
            f"w_k <= exp(-gamma) w_(k-1) and w_k <= exp(-gamma k) w_0 "
            f"(rel tol 1e-12)")


def test_criterion_02_linear_rate_r2(quad_problem):
    region, obj, cfg, f_star, log = quad_problem
    calls = _calls_to(log, f_star, 1e-10)
    # fit on a run stopped at gap 1e-9: the deep run's final primal gaps sit
    # on the 1e-16 float noise floor, which carries no rate information
    fit_log = scheduled_restarts(region, obj, cfg=cfg.with_(target_gap=1e-9))
    slope, _, r2 = fit_rate(fit_log, FitModel.LOG_LINEAR, 1.0, f_star=f_star)
    vlog = vanilla_fw(region, obj, cfg=cfg)
    vgap = min(r.f_value for r in vlog.records) - f_star
    ok = (calls is not None and calls <= 50_000 and r2 >= 0.9 and vgap > 1e-6)
    _report(2, "linear rate (restarted vs vanilla)", ok,
            f"restarted: primal gap 1e-10 in {calls} oracle calls "
            f"(budget 5e4), log-linear tail fit R^2={r2:.3f} (>= 0.9); "
            f"vanilla stalls at gap {vgap:.2e} (> 1e-6) on the same budget")


def test_criterion_03_interpolated_regime(powered_problem):
    region, obj, cfg, f_star, slog, vlog = powered_problem
    s_calls = _calls_to(slog, f_star, 1e-6)
    v_calls = _calls_to(vlog, f_star, 1e-3)
    ok = s_calls is not None and v_calls is not None and s_calls <= 0.25 * v_calls
    ratio = None if not (s_calls and v_calls) else s_calls / v_calls
    _report(3, "interpolated rate on powered-norm loss", ok,
            f"restarted reaches gap 1e-6 in {s_calls} calls; vanilla needs "
            f"{v_calls} calls for gap 1e-3; ratio {ratio:.3f} <= 0.25")


def test_criterion_04_gamma_robustness(quad_problem):
    region, obj, cfg, f_star, _ = quad_problem
    gaps = {}
    for g in (0.1, 0.5, 1.0, 2.0):
        lg = scheduled_restarts(
            region, obj, cfg=cfg.with_(gamma=g, max_oracle_calls=20_000)
        )
        # clamp at the solver's target: gaps below it are noise-floor ties
        gaps[g] = max(min(r.f_value for r in lg.records) - f_star, 1e-13)
    spread = max(gaps.values()) / min(gaps.values())
    ok = spread <= 10.0
    _report(4, "gamma robustness", ok,
            "final primal gaps at a 2e4-call budget: "
            + ", ".join(f"gamma={g}: {v:.2e}" for g, v in gaps.items())
            + f"; spread {spread:.2f}x <= 10x")


def test_criterion_05_uniformly_convex_sets():
    data = generate_synthetic("regression", 200, 50, 0.1, seed=0)
    obj = LeastSquares(data.X, data.y)
    w_hat, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    cfg = SolverConfig(target_gap=1e-13, max_oracle_calls=100_000)
    results = {}
    for p in (1.5, 2.5):
        radius = 0.5 * float(np.sum(np.abs(w_hat) ** p)) ** (1.0 / p)
        region = lp_ball(radius, p, 50)
        log = vanilla_fw(region, obj, cfg=cfg)
        f_star = min(r.f_value for r in log.records)
        grad_norm = float(np.linalg.norm(obj.gradient(log.final_x)))
        if p == 1.5:
            _, _, r2 = fit_rate(log, FitModel.LOG_LINEAR, 0.5, f_star=f_star)
            results[p] = ("R^2", r2, grad_norm)
        else:
            slope, _, _ = fit_rate(log, FitModel.LOG_LOG, 0.5, f_star=f_star)
            results[p] = ("slope", slope, grad_norm)
    ok = (results[1.5][1] >= 0.9 and results[2.5][1] <= -1.5
          and min(r[2] for r in results.values()) > 0.0)
    _report(5, "uniformly convex set rates (vanilla)", ok,
            f"p=1.5 ball: log-linear tail R^2={results[1.5][1]:.3f} (>= 0.9); "
            f"p=2.5 ball: log-log tail slope {results[2.5][1]:.2f} (<= -1.5); "
            f"gradient norm at optimum > 0 on both")


def test_criterion_06_gap_correctness_vs_brute_force():
    rng = np.random.default_rng(6)
    regions = [
        lambda d: L1Ball(1.0, d),
        lambda d: Simplex(1.0, d),
        lambda d: Box(-np.ones(d), np.ones(d)),
    ]
    worst_mismatch = 0.0
    worst_excess = -np.inf
    for i in range(200):
        if i % 3 == 2:
            dim = 3  # keep the box's 2^dim vertex enumeration tractable
        else:
            dim = int(rng.integers(3, 6))
        region = regions[i % 3](dim)
        data = generate_synthetic("regression", 4 * dim, dim, 0.2, seed=i)
        obj = LeastSquares(data.X, data.y)
        verts = list(region.vertices())
        size = int(rng.integers(1, 4))
        idx = rng.choice(len(verts), size=size, replace=False)
        weights = rng.dirichlet(np.ones(size))
        s = ActiveSet.from_pairs(
            [(verts[j][0], verts[j][1], w) for j, w in zip(idx, weights)]
        )
        x = s.reconstruct()
        rep = compute_gaps(region, obj, x, s)
        # independent double enumeration of both gap components
        grad = obj.gradient(x)
        fw = max(float(grad @ (x - v)) for _, v in verts)
        away = max(float(grad @ (v - x)) for _, v, _ in
                   ((e.vid, e.vertex, e.weight) for e in s))
        w_enum = max(fw, 0.0) + max(away, 0.0)
        worst_mismatch = max(worst_mismatch, abs(w_enum - rep.strong_wolfe_gap),
                             abs(max(fw, 0.0) - rep.fw_gap))
        worst_excess = max(
            worst_excess,
            brute_force_strong_wolfe(region, obj, x) - rep.strong_wolfe_gap,
        )
    ok = worst_mismatch <= 1e-10 and worst_excess <= 1e-10
    _report(6, "gap computation vs brute force", ok,
            f"200 random 3-5 dim polytope instances: max |enumerated - "
            f"computed| = {worst_mismatch:.2e} (<= 1e-10); max brute-force "
            f"excess over w(x,S) = {worst_excess:.2e} (<= 1e-10)")


def test_criterion_07_lmo_certificates():
    rng = np.random.default_rng(7)
    builders = [
        lambda d: L1Ball(float(rng.uniform(0.5, 3.0)), d),
        lambda d: Simplex(float(rng.uniform(0.5, 3.0)), d),
        lambda d: Box(-rng.uniform(0.5, 2.0, d), rng.uniform(0.5, 2.0, d)),
        lambda d: lp_ball(float(rng.uniform(0.5, 3.0)), float(rng.uniform(1.2, 4.0)), d),
    ]
    worst = -np.inf
    for i in range(10_000):
        dim = int(rng.integers(2, 9))
        region = builders[i % 4](dim)
        c = rng.standard_normal(dim)
        _, v = region.lmo(c)
        # certificate: the returned vertex is feasible and beats a random
        # feasible competitor on the linear objective
        assert region.contains(v, 1e-10)
        if region.is_polytope():
            verts = list(region.vertices())
            weights = rng.dirichlet(np.ones(min(len(verts), 4)))
            idx = rng.choice(len(verts), size=len(weights), replace=False)
            z = sum(w * verts[j][1] for j, w in zip(idx, weights))
        else:
            z = rng.standard_normal(dim)
            z *= rng.uniform(0.0, 1.0) * region.radius / float(
                np.sum(np.abs(z) ** region.p) ** (1.0 / region.p)
            )
        worst = max(worst, float(c @ v) - float(c @ z))
    ok = worst <= 1e-10
    _report(7, "randomized oracle optimality certificates", ok,
            f"10^4 checks across l1/simplex/box/lp regions: max "
            f"<c, lmo(c)> - <c, z> over feasible z = {worst:.2e} (<= 1e-10)")


def test_criterion_08_adaptive_line_search():
    runs = []
    qdata = generate_synthetic("regression", 70, 50, 0.1, seed=38)
    qobj = LeastSquares(qdata.X, qdata.y)
    w_hat, *_ = np.linalg.lstsq(qdata.X, qdata.y, rcond=None)
    runs.append((qobj, L1Ball(0.4 * float(np.abs(w_hat).sum()), 50)))
    cdata = generate_synthetic("classification", 100, 20, 0.3, seed=8)
    runs.append((Logistic(cdata.X, cdata.y), L1Ball(3.0, 20)))

    cfg = SolverConfig(
        gamma=0.5, target_gap=1e-9, max_oracle_calls=50_000,
        line_search=LineSearchKind.ADAPTIVE,
    )
    n_steps = 0
    ok = True
    worst_l = -np.inf
    for obj, region in runs:
        log = scheduled_restarts(region, obj, cfg=cfg)
        lip = obj.lipschitz()
        cap = max(cfg.adaptive_params.tau * lip, cfg.adaptive_params.initial_l)
        for e in log.adaptive_trace:
            n_steps += 1
            worst_l = max(worst_l, e.accepted_m - cap)
            ok &= e.accepted_m <= cap + 1e-9
            bound = quadratic_model(e.f_x, e.slope, e.dir_sq_norm, e.eta,
                                    e.accepted_m)
            ok &= e.f_new <= bound + MODEL_SLACK * max(1.0, abs(bound))
    _report(8, "adaptive backtracking invariants", ok,
            f"{n_steps} accepted steps on two smooth problems: every "
            f"Lipschitz estimate <= max(tau L, L_init) + 1e-9 (max excess "
            f"{worst_l:.2e}) and every step re-satisfies its quadratic "
            f"decrease model post hoc")


def test_criterion_09_gradient_checks():
    rng = np.random.default_rng(9)
    dim = 10
    data = generate_synthetic("regression", 40, dim, 0.1, seed=9)
    cdata = generate_synthetic("classification", 40, dim, 0.3, seed=9)
    # exact-interpolation target so powered-norm points can sit near zero residual
    w_flat = rng.standard_normal(dim)
    y_flat = data.X @ w_flat
    cases = [
        ("quadratic", LeastSquares(data.X, data.y), None),
        ("powered-norm a=1.5", PoweredNorm(data.X, y_flat, 1.5), w_flat),
        ("logistic", Logistic(cdata.X, cdata.y), None),
    ]
    worst = {}
    for name, obj, center in cases:
        errs = []
        for k in range(1000):
            if center is not None and k % 2 == 0:
                # near-zero residuals: shrink the step so no residual crosses
                # the |r|^alpha kink inside the difference stencil
                w = center + 1e-3 * rng.standard_normal(dim)
                h = 1e-9
            else:
                w = rng.standard_normal(dim)
                h = 1e-6
            g = obj.gradient(w)
            fd = np.empty(dim)
            for i in range(dim):
                e = np.zeros(dim)
                e[i] = h
                fd[i] = (obj.value(w + e) - obj.value(w - e)) / (2.0 * h)
            errs.append(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-12))
        worst[name] = max(errs)
    ok = all(v < 1e-5 for v in worst.values())
    _report(9, "finite-difference gradient checks", ok,
            "1000 random points per objective, central differences, max "
            "relative error: "
            + ", ".join(f"{k}: {v:.2e}" for k, v in worst.items())
            + " (all < 1e-5)")


def test_criterion_10_recurrence_lemma():
    failures = []
    for beta in (0.25, 0.5, 0.75, 1.0):
        for m in (0.1, 1.0, 10.0):
            for h0 in (0.5, 1.0, 100.0):
                _, (k, c), ok = recurrence_check(h0, m, beta, 100_000)
                if not ok:
                    failures.append((beta, m, h0))
    ok = not failures
    _report(10, "decay-recurrence envelope", ok,
            f"36-point grid (beta x m x h0), t_max=1e5: "
            f"{36 - len(failures)}/36 trajectories stay below C/(t+k)^(1/beta)"
            + (f"; failures: {failures}" if failures else ""))


def test_criterion_11_theoretical_bound_validity(quad_problem):
    region, obj, cfg, _, log = quad_problem
    b = log.restart_boundaries
    w0 = log.records[0].strong_wolfe_gap
    curvature = obj.lipschitz() * region.diameter() ** 2
    _, t1, w1 = b[0]
    mu = calibrate_mu(2.0, curvature, cfg.gamma, w0, t1, w1)
    params = RateParams(r=2.0, mu=mu, curvature=curvature)
    fails = sum(
        1 for _, t, w in b[1:]
        if w > theoretical_bound(params, cfg.gamma, w0, t) * (1 + 1e-9)
    )
    ok = fails == 0 and len(b) >= 4
    _report(11, "rate bound with calibrated mu", ok,
            f"mu calibrated at the first restart boundary (t={t1}); the "
            f"exponential bound dominates the observed strong Wolfe gap at "
            f"{len(b) - 1 - fails}/{len(b) - 1} later boundaries "
            f"(rel tol 1e-9)")


def test_criterion_12_one_shot_large_gamma(quad_problem):
    region, obj, cfg, f_star, _ = quad_problem
    s0 = ActiveSet.from_vertex(*initial_extreme_point(region, 3))
    log = one_shot_large_gamma(
        region, obj, s0, 1e-4, cfg=cfg.with_(max_oracle_calls=2_000_000)
    )
    away = sum(
        1 for r in log.records if r.step_type in (StepType.AWAY, StepType.DROP)
    )
    gap = obj.value(log.final_x) - f_star
    ok = (log.termination == Termination.GAP_REACHED and away == 0
          and gap <= 1e-4)
    _report(12, "one-shot large-gamma mode", ok,
            f"terminated {log.termination.value} after {len(log.records)} "
            f"iterations with {away} away steps and primal gap "
            f"{gap:.2e} <= 1e-4")


def test_criterion_13_determinism(tmp_path):
    config = f"""\
[problem]
kind = quadratic
seed = 38
n_samples = 70
dim = 50
noise = 0.1
region.kind = l1
region.scale_to_boundary = 0.4

[solver]
name = scheduled_restarts
gamma = 0.5
target_gap = 1e-13
max_oracle_calls = 50000
"""
    outputs = []
    for run in ("a", "b"):
        cfg_path = tmp_path / f"cfg_{run}.ini"
        cfg_path.write_text(config + f"\n[output]\nout_dir = {tmp_path / run}\n",
                            encoding="utf-8")
        assert cli_main(["solve", "--config", str(cfg_path)]) == 0
        outputs.append((tmp_path / run / "run.csv").read_bytes())
    ok = outputs[0] == outputs[1]
    _report(13, "bitwise determinism of the command line", ok,
            f"two identical solve invocations wrote byte-identical run.csv "
            f"({len(outputs[0])} bytes)")
