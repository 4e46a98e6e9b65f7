"""Frank-Wolfe / away / strong Wolfe gap computation and a brute-force oracle."""

from __future__ import annotations

from itertools import combinations
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .core import ActiveSet, GapReport
from .oracles import FeasibleRegion, away_vertex

FEASIBILITY_TOL = 1e-8


def _clamp(gap: float) -> float:
    # gaps are nonnegative for feasible iterates; negatives are float noise
    return gap if gap > 0.0 else 0.0


def compute_gaps(
    region: FeasibleRegion,
    obj,
    x: np.ndarray,
    active_set: Optional[ActiveSet] = None,
    grad: Optional[np.ndarray] = None,
) -> GapReport:
    """Gap report at x; the gradient may be passed in to share the evaluation.

    fw_gap = <grad, x - v> with v the LMO vertex; away_gap = <grad, a - x>
    over the support when one is given; strong Wolfe gap is their sum.
    """
    if not region.contains(x, FEASIBILITY_TOL):
        raise ValueError("iterate outside the feasible region beyond tolerance")
    if grad is None:
        grad = obj.gradient(x)
    vid, v = region.lmo(grad)
    fw_gap = _clamp(float(grad @ (x - v)))
    away_gap = 0.0
    away = None
    if active_set is not None:
        aid, a = away_vertex(active_set, grad)
        away_gap = _clamp(float(grad @ (a - x)))
        away = (aid, a)
    return GapReport(
        fw_gap=fw_gap,
        away_gap=away_gap,
        strong_wolfe_gap=fw_gap + away_gap,
        fw_vertex=(vid, v),
        away_vertex=away,
    )


def _is_proper_support(V: np.ndarray, x: np.ndarray, tol: float = 1e-9) -> bool:
    """Can x be written as a strictly positive convex combination of V's columns?"""
    n, m = V.shape
    A = np.vstack([V, np.ones(m)])
    b = np.concatenate([x, [1.0]])
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.linalg.norm(A @ sol - b) > tol:
        return False  # x not in the affine hull of the subset
    if np.linalg.matrix_rank(A, tol=1e-10) == m:
        return bool(np.all(sol > 1e-10))  # unique combination
    # degenerate subset: maximize the minimum weight by LP
    # variables: (lambda_1..m, t); maximize t s.t. V lam = x, sum lam = 1, lam_i >= t
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_eq = np.hstack([A, np.zeros((n + 1, 1))])
    A_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=np.zeros(m),
        A_eq=A_eq,
        b_eq=b,
        bounds=[(0, 1)] * m + [(0, 1)],
        method="highs",
    )
    return bool(res.success and res.x[-1] > 1e-9)


def brute_force_strong_wolfe(region: FeasibleRegion, obj, x: np.ndarray) -> float:
    """Minimum of w(x, S) over all proper supports S, by subset enumeration.

    Test oracle only: requires a polytope region with dim <= 6.
    """
    n = region.dim
    if n > 6:
        raise ValueError("brute-force strong Wolfe gap unsupported above dimension 6")
    if not region.is_polytope():
        raise ValueError("brute-force strong Wolfe gap requires a polytope")
    x = np.asarray(x, dtype=np.float64)
    grad = obj.gradient(x)
    verts = [v for _, v in region.vertices()]
    scores = np.array([float(grad @ v) for v in verts])
    _, z = region.lmo(grad)
    fw_part = -float(grad @ z)
    order = np.argsort(scores)  # try low-score vertices first for early pruning
    best = np.inf
    for size in range(1, min(len(verts), n + 1) + 1):
        for subset in combinations(order, size):
            away_part = float(np.max(scores[list(subset)]))
            if away_part + fw_part >= best:
                continue
            V = np.column_stack([verts[i] for i in subset])
            if _is_proper_support(V, x):
                best = away_part + fw_part
    if not np.isfinite(best):
        raise ValueError("x is not a convex combination of region vertices")
    return _clamp(best)
