"""Command-line harness: solve one problem, compare solver variants, check rates.

Config files are INI-style with sections [problem], [solver], [output] and,
for check-rates, [check]. See README.md for the full key reference.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .algorithms import (
    RunLog,
    Termination,
    initial_extreme_point,
    one_shot_large_gamma,
    restart_fractional_fw,
    scheduled_restarts,
    vanilla_fw,
)
from .analysis import FitModel, fit_rate, recurrence_check
from .core import ActiveSet, IterationRecord, LineSearchKind, SolverConfig, StepType
from .objectives import (
    LeastSquares,
    Logistic,
    PoweredNorm,
    generate_synthetic,
    load_csv,
)
from .oracles import L1Ball, Simplex, lp_ball

CSV_HEADER = (
    "t,restart_index,step_type,eta,f,primal_gap,fw_gap,"
    "strong_wolfe_gap,active_set_size,lmo_calls,grad_calls"
)

SOLVER_NAMES = (
    "scheduled_restarts",
    "vanilla_fw",
    "restart_fractional_fw",
    "one_shot",
)


class ConfigError(Exception):
    pass


def _r(x) -> str:
    """Decimal text that round-trips a 64-bit float exactly."""
    return repr(float(x))


def _parse_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return cp


def _get(cp, used, section, key, cast=str, default=None, required=False):
    if cp.has_option(section, key):
        raw = cp.get(section, key)
        try:
            val = cast(raw)
        except (TypeError, ValueError):
            raise ConfigError(
                f"[{section}] {key} = {raw!r}: cannot parse as {cast.__name__}"
            ) from None
    elif required:
        raise ConfigError(f"missing required key [{section}] {key}")
    else:
        val = default
    if val is not None:
        used.setdefault(section, {})[key] = val
    return val


def _bounded_minimize(obj, dim):
    """Unconstrained minimizer used to place the optimum on the boundary."""
    if isinstance(obj, LeastSquares):
        w, *_ = np.linalg.lstsq(obj.X, obj.y, rcond=None)
        return w
    res = minimize(
        obj.value,
        np.zeros(dim),
        jac=obj.gradient,
        method="L-BFGS-B",
        options={"maxiter": 500},
    )
    return res.x


def build_problem(cp, used):
    kind = _get(cp, used, "problem", "kind", str, "quadratic")
    if kind not in ("quadratic", "powered_norm", "logistic"):
        raise ConfigError(f"[problem] kind = {kind!r}: unknown objective kind")
    seed = _get(cp, used, "problem", "seed", int, 0)
    data_path = _get(cp, used, "problem", "data", str)
    if data_path is not None:
        data = load_csv(data_path)
    else:
        n = _get(cp, used, "problem", "n_samples", int, 200)
        dim = _get(cp, used, "problem", "dim", int, 50)
        noise = _get(cp, used, "problem", "noise", float, 0.1)
        syn_kind = "classification" if kind == "logistic" else "regression"
        data = generate_synthetic(syn_kind, n, dim, noise, seed)
    if kind == "quadratic":
        obj = LeastSquares(data.X, data.y)
    elif kind == "powered_norm":
        alpha = _get(cp, used, "problem", "alpha", float, 1.5)
        obj = PoweredNorm(data.X, data.y, alpha)
    else:
        obj = Logistic(data.X, data.y)

    rkind = _get(cp, used, "problem", "region.kind", str, "l1")
    radius = _get(cp, used, "problem", "region.radius", float, 1.0)
    frac = _get(cp, used, "problem", "region.scale_to_boundary", float)
    dim = data.dim
    if frac is not None:
        if not 0.0 < frac:
            raise ConfigError("[problem] region.scale_to_boundary must be positive")
        w_hat = _bounded_minimize(obj, dim)
        if rkind == "l1":
            radius = frac * float(np.sum(np.abs(w_hat)))
        elif rkind == "lp":
            p = _get(cp, used, "problem", "region.p", float, required=True)
            radius = frac * float(np.sum(np.abs(w_hat) ** p)) ** (1.0 / p)
        elif rkind == "box":
            radius = frac * float(np.max(np.abs(w_hat)))
        elif rkind == "simplex":
            radius = frac * float(np.sum(np.abs(w_hat)))
        if radius <= 0.0:
            raise ConfigError("scale_to_boundary produced a degenerate region")
        used["problem"]["region.radius"] = radius
    if rkind == "l1":
        region = L1Ball(radius, dim)
    elif rkind == "simplex":
        region = Simplex(radius, dim)
    elif rkind == "box":
        region = lp_ball(radius, float("inf"), dim)
    elif rkind == "lp":
        p = _get(cp, used, "problem", "region.p", float, required=True)
        region = lp_ball(radius, p, dim)
    else:
        raise ConfigError(f"[problem] region.kind = {rkind!r}: unknown region")
    return region, obj, kind, seed


def build_solver_config(cp, used, seed, obj_kind) -> SolverConfig:
    default_ls = "exact" if obj_kind == "quadratic" else "adaptive"
    ls_name = _get(cp, used, "solver", "line_search", str, default_ls)
    try:
        ls = LineSearchKind(ls_name)
    except ValueError:
        raise ConfigError(
            f"[solver] line_search = {ls_name!r}: expected exact|golden|adaptive"
        ) from None
    try:
        return SolverConfig(
            gamma=_get(cp, used, "solver", "gamma", float, 0.5),
            target_gap=_get(cp, used, "solver", "target_gap", float, 1e-8),
            max_oracle_calls=_get(cp, used, "solver", "max_oracle_calls", int, 100_000),
            line_search=ls,
            curvature_estimate=_get(cp, used, "solver", "curvature_estimate", float),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"[solver] {exc}") from None


def run_variant(name, region, obj, scfg, start=None) -> RunLog:
    """Run one named solver; ``start`` is an optional shared (vid, vertex)."""
    if name == "scheduled_restarts":
        aset = ActiveSet.from_vertex(*start) if start else None
        return scheduled_restarts(region, obj, cfg=scfg, active_set=aset)
    if name == "vanilla_fw":
        return vanilla_fw(region, obj, x0=start[1] if start else None, cfg=scfg)
    if name == "restart_fractional_fw":
        return restart_fractional_fw(region, obj, x0=start[1] if start else None,
                                     cfg=scfg)
    if name == "one_shot":
        if start is None:
            start = initial_extreme_point(region, scfg.seed)
        s0 = ActiveSet.from_vertex(*start)
        return one_shot_large_gamma(region, obj, s0, scfg.target_gap, cfg=scfg)
    raise ConfigError(
        f"[solver] name = {name!r}: expected one of {', '.join(SOLVER_NAMES)}"
    )


def compute_f_star(region, obj, scfg, start=None) -> float:
    """High-precision reference value of f at (near) the constrained optimum."""
    ref_cfg = scfg.with_(
        target_gap=1e-12,
        max_oracle_calls=max(scfg.max_oracle_calls, 400_000),
    )
    if region.is_polytope():
        log = run_variant("scheduled_restarts", region, obj, ref_cfg, start)
    else:
        log = run_variant("vanilla_fw", region, obj, ref_cfg, start)
    best = obj.value(log.final_x)
    if log.records:
        best = min(best, min(rec.f_value for rec in log.records))
    return best


def write_run_csv(path: Path, log: RunLog, f_star: float) -> None:
    lines = [CSV_HEADER]
    for rec in log.records:
        gap = rec.f_value - f_star
        lines.append(",".join([
            str(rec.t),
            str(rec.restart_index),
            rec.step_type.value,
            _r(rec.eta),
            _r(rec.f_value),
            _r(gap if gap > 0.0 else 0.0),
            _r(rec.fw_gap),
            _r(rec.strong_wolfe_gap),
            str(rec.active_set_size),
            str(rec.lmo_calls),
            str(rec.grad_calls),
        ]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_run_csv(path):
    """Rebuild IterationRecords from a run.csv written by this tool."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path}: not a run.csv (unexpected header)")
    records = []
    for line in lines[1:]:
        f = line.split(",")
        records.append(IterationRecord(
            t=int(f[0]), restart_index=int(f[1]), step_type=StepType(f[2]),
            eta=float(f[3]), f_value=float(f[4]), fw_gap=float(f[6]),
            strong_wolfe_gap=float(f[7]), active_set_size=int(f[8]),
            lmo_calls=int(f[9]), grad_calls=int(f[10]),
        ))
    gaps = [float(line.split(",")[5]) for line in lines[1:]]
    return records, gaps


def _out_dir(cp, used) -> Path:
    out = os.environ.get("FW_OUT_DIR") or _get(cp, used, "output", "out_dir", str, "out")
    used.setdefault("output", {})["out_dir"] = str(out)
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _summary(log: RunLog, f_star: float, seed: int, used) -> dict:
    final_f = log.records[-1].f_value if log.records else None
    gap = None if final_f is None else max(final_f - f_star, 0.0)
    return {
        "termination": log.termination.value,
        "iterations": len(log.records),
        "restarts": len(log.restart_boundaries),
        "final_f": final_f,
        "f_star": f_star,
        "primal_gap": gap,
        "final_fw_gap": log.final_fw_gap,
        "final_strong_wolfe_gap": log.final_strong_wolfe_gap,
        "total_lmo_calls": log.lmo_calls,
        "total_grad_calls": log.grad_calls,
        "seed": seed,
        "config": used,
    }


_EXIT_BY_TERMINATION = {
    Termination.GAP_REACHED: 0,
    Termination.ORACLE_BUDGET: 2,
    Termination.STALLED: 2,
}


def cmd_solve(config_path) -> int:
    cp = _parse_config(config_path)
    used = {}
    region, obj, obj_kind, seed = build_problem(cp, used)
    scfg = build_solver_config(cp, used, seed, obj_kind)
    name = _get(cp, used, "solver", "name", str, "scheduled_restarts")
    out = _out_dir(cp, used)
    f_star = compute_f_star(region, obj, scfg)
    log = run_variant(name, region, obj, scfg)
    if log.records:
        f_star = min(f_star, min(rec.f_value for rec in log.records))
    write_run_csv(out / "run.csv", log, f_star)
    (out / "summary.json").write_text(
        json.dumps(_summary(log, f_star, seed, used), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return _EXIT_BY_TERMINATION[log.termination]


def _csv_list(raw: str):
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def cmd_compare(config_path) -> int:
    cp = _parse_config(config_path)
    used = {}
    region, obj, obj_kind, seed = build_problem(cp, used)
    scfg = build_solver_config(cp, used, seed, obj_kind)
    names = _csv_list(_get(cp, used, "solver", "names", str, required=True))
    gammas_raw = _get(cp, used, "solver", "gammas", str)
    gammas = [float(g) for g in _csv_list(gammas_raw)] if gammas_raw else [scfg.gamma]
    variants = []
    for name in names:
        if name not in SOLVER_NAMES:
            raise ConfigError(f"[solver] names: unknown solver {name!r}")
        for g in gammas:
            label = name if len(gammas) == 1 else f"{name}_gamma{g:g}"
            variants.append((label, name, g))
    if len(variants) < 2:
        raise ConfigError("compare needs at least two solver variants")
    out = _out_dir(cp, used)
    start = initial_extreme_point(region, scfg.seed)
    f_star = compute_f_star(region, obj, scfg, start)
    logs = {}
    for label, name, g in variants:
        logs[label] = run_variant(name, region, obj, scfg.with_(gamma=g), start)
    f_star = min(
        [f_star]
        + [rec.f_value for log in logs.values() for rec in log.records]
    )
    for label, log in logs.items():
        write_run_csv(out / f"run_{label}.csv", log, f_star)

    # align all variants on the union grid of cumulative oracle calls,
    # carrying each series forward between its own measurements
    series = {}
    for label, log in logs.items():
        pts = [
            (rec.lmo_calls + rec.grad_calls,
             max(rec.f_value - f_star, 0.0),
             rec.strong_wolfe_gap)
            for rec in log.records
        ]
        series[label] = pts
    grid = sorted({calls for pts in series.values() for calls, _, _ in pts})
    lines = ["oracle_calls," + ",".join(
        f"primal_gap_{label},strong_wolfe_gap_{label}" for label, _, _ in variants
    )]
    cursors = {label: 0 for label in series}
    last = {label: None for label in series}
    for calls in grid:
        row = [str(calls)]
        for label, _, _ in variants:
            pts = series[label]
            i = cursors[label]
            while i < len(pts) and pts[i][0] <= calls:
                last[label] = pts[i]
                i += 1
            cursors[label] = i
            if last[label] is None:
                row.extend(["", ""])
            else:
                row.extend([_r(last[label][1]), _r(last[label][2])])
        lines.append(",".join(row))
    (out / "compare.csv").write_text("\n".join(lines) + "\n", encoding="utf-8",
                                     newline="\n")
    summary = {
        label: _summary(log, f_star, seed, used) for label, log in logs.items()
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    codes = [_EXIT_BY_TERMINATION[log.termination] for log in logs.values()]
    return max(codes)


def cmd_check_rates(config_path) -> int:
    cp = _parse_config(config_path)
    used = {}
    results = {"checks": []}
    passed = True

    model_name = _get(cp, used, "check", "fit_model", str, "LogLinear")
    try:
        model = FitModel(model_name)
    except ValueError:
        raise ConfigError(
            f"[check] fit_model = {model_name!r}: expected LogLinear|LogLog"
        ) from None
    tail = _get(cp, used, "check", "tail_fraction", float, 0.5)
    min_r2 = _get(cp, used, "check", "min_r_squared", float)
    max_slope = _get(cp, used, "check", "max_slope", float)

    run_csv = _get(cp, used, "check", "run_csv", str)
    fit_input = None
    if run_csv is not None:
        records, gaps = read_run_csv(run_csv)
        log = RunLog(records=records)
        fs = [rec.f_value for rec in records]
        # recover f* so that f - f* reproduces the stored primal gaps
        pos = [(f, g) for f, g in zip(fs, gaps) if g > 0.0]
        f_star = pos[0][0] - pos[0][1] if pos else min(fs)
        fit_input = (log, f_star)
    elif cp.has_section("problem"):
        region, obj, obj_kind, seed = build_problem(cp, used)
        scfg = build_solver_config(cp, used, seed, obj_kind)
        name = _get(cp, used, "solver", "name", str, "scheduled_restarts")
        f_star = compute_f_star(region, obj, scfg)
        log = run_variant(name, region, obj, scfg)
        if log.records:
            f_star = min(f_star, min(rec.f_value for rec in log.records))
        fit_input = (log, f_star)

    if fit_input is not None:
        log, f_star = fit_input
        slope, intercept, r2 = fit_rate(log, model, tail, f_star=f_star)
        check = {
            "kind": "fit",
            "model": model.value,
            "slope": slope,
            "intercept": intercept,
            "r_squared": r2,
        }
        ok = True
        if min_r2 is not None:
            ok = ok and r2 >= min_r2
        if max_slope is not None:
            ok = ok and slope <= max_slope
        check["ok"] = ok
        passed = passed and ok
        results["checks"].append(check)

    rec_raw = _get(cp, used, "check", "recurrence", str)
    if rec_raw:
        for entry in _csv_list(rec_raw):
            parts = entry.split(":")
            if len(parts) != 4:
                raise ConfigError(
                    f"[check] recurrence entry {entry!r}: expected beta:m:h0:t_max"
                )
            beta, m, h0 = (float(p) for p in parts[:3])
            t_max = int(parts[3])
            _, (k, c_const), ok = recurrence_check(h0, m, beta, t_max)
            results["checks"].append({
                "kind": "recurrence", "beta": beta, "m": m, "h0": h0,
                "t_max": t_max, "k": k, "C": c_const, "ok": ok,
            })
            passed = passed and ok

    if not results["checks"]:
        raise ConfigError("check-rates config selects nothing to check")
    results["passed"] = passed
    out = _out_dir(cp, used)
    (out / "rates.json").write_text(
        json.dumps(results, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return 0 if passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fwrestart",
        description="Projection-free solvers with scheduled restarts",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in ("solve", "compare", "check-rates"):
        p = sub.add_parser(cmd)
        p.add_argument("--config", required=True, help="path to an INI config file")
    args = parser.parse_args(argv)
    handler = {
        "solve": cmd_solve,
        "compare": cmd_compare,
        "check-rates": cmd_check_rates,
    }[args.command]
    try:
        return handler(args.config)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
