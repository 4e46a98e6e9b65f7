"""Shared domain types: vertex identities, active sets, configuration, records."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

# Numeric hygiene constants used across the package.
DENSE_ID_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-10
RECONSTRUCT_TOL = 1e-8
DEFAULT_WEIGHT_TOL = 1e-12


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally checking its length."""
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected length {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


@dataclass(frozen=True)
class SignedBasis:
    """Identity of a signed scaled basis vertex (l1 ball, simplex)."""

    index: int
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    def matches(self, other) -> bool:
        return (
            isinstance(other, SignedBasis)
            and self.index == other.index
            and self.sign == other.sign
        )


@dataclass(frozen=True)
class DenseId:
    """Identity of a generic extreme point, compared coordinate-wise."""

    coords: tuple

    def matches(self, other) -> bool:
        if not isinstance(other, DenseId) or len(self.coords) != len(other.coords):
            return False
        return all(abs(a - b) <= DENSE_ID_TOL for a, b in zip(self.coords, other.coords))


def dense_id(vertex) -> DenseId:
    return DenseId(tuple(float(v) for v in vertex))


@dataclass
class ActiveEntry:
    vid: object
    vertex: np.ndarray
    weight: float


class ActiveSet:
    """Ordered list of (vertex id, vertex, weight) representing a convex combination.

    Weights stay strictly positive and sum to one; entries at or below
    ``weight_tol`` are pruned and the rest renormalized. Owned by a single
    solver run, mutated in place.
    """

    def __init__(self, entries, weight_tol: float = DEFAULT_WEIGHT_TOL):
        self.weight_tol = float(weight_tol)
        self.entries = [
            ActiveEntry(e.vid, as_vector(e.vertex), float(e.weight)) for e in entries
        ]
        self._clean()

    @classmethod
    def from_vertex(cls, vid, vertex, weight_tol: float = DEFAULT_WEIGHT_TOL):
        return cls([ActiveEntry(vid, as_vector(vertex), 1.0)], weight_tol=weight_tol)

    @classmethod
    def from_pairs(cls, pairs, weight_tol: float = DEFAULT_WEIGHT_TOL):
        """Build from an iterable of (vid, vertex, weight) triples."""
        return cls(
            [ActiveEntry(vid, as_vector(vx), w) for vid, vx, w in pairs],
            weight_tol=weight_tol,
        )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def find(self, vid) -> int:
        for i, e in enumerate(self.entries):
            if e.vid.matches(vid):
                return i
        return -1

    def weight_of(self, vid) -> float:
        i = self.find(vid)
        if i < 0:
            raise KeyError(f"vertex {vid!r} not in active set")
        return self.entries[i].weight

    def reconstruct(self) -> np.ndarray:
        x = np.zeros_like(self.entries[0].vertex)
        for e in self.entries:
            x += e.weight * e.vertex
        return x

    def copy(self) -> "ActiveSet":
        return ActiveSet(
            [ActiveEntry(e.vid, e.vertex.copy(), e.weight) for e in self.entries],
            weight_tol=self.weight_tol,
        )

    def apply_fw_step(self, vid, vertex, eta: float) -> None:
        """Shift mass toward ``vertex``: w <- (1-eta) w, plus eta on the target."""
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"FW step size {eta} outside [0, 1]")
        if eta == 1.0:
            self.entries = [ActiveEntry(vid, as_vector(vertex), 1.0)]
            return
        for e in self.entries:
            e.weight *= 1.0 - eta
        i = self.find(vid)
        if i >= 0:
            self.entries[i].weight += eta
        elif eta > 0.0:
            self.entries.append(ActiveEntry(vid, as_vector(vertex), eta))
        self._clean()

    def apply_away_step(self, vid, eta: float) -> bool:
        """Shift mass away from ``vid``: w <- (1+eta) w, minus eta on the source.

        Returns True when this was a drop step (the vertex left the support).
        """
        i = self.find(vid)
        if i < 0:
            raise ValueError(f"away vertex {vid!r} not in active set")
        alpha = self.entries[i].weight
        eta_max = alpha / (1.0 - alpha) if alpha < 1.0 else np.inf
        if eta < 0.0 or eta > eta_max + 1e-12:
            raise ValueError(f"away step size {eta} outside [0, {eta_max}]")
        for e in self.entries:
            e.weight *= 1.0 + eta
        self.entries[i].weight -= eta
        was_drop = self.entries[i].weight <= self.weight_tol
        self._clean()
        return was_drop

    def _clean(self) -> None:
        self.entries = [e for e in self.entries if e.weight > self.weight_tol]
        if not self.entries:
            raise ValueError("active set became empty")
        total = sum(e.weight for e in self.entries)
        if abs(total - 1.0) > 1e-12:
            for e in self.entries:
                e.weight /= total

    def validate(self, x: Optional[np.ndarray] = None) -> None:
        """Assert structural invariants; used by tests and debug paths."""
        total = sum(e.weight for e in self.entries)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise AssertionError(f"weights sum to {total}")
        if any(e.weight <= 0 for e in self.entries):
            raise AssertionError("non-positive weight in active set")
        for i, e in enumerate(self.entries):
            for other in self.entries[i + 1 :]:
                if e.vid.matches(other.vid):
                    raise AssertionError(f"duplicate vertex id {e.vid!r}")
        if x is not None:
            drift = np.max(np.abs(self.reconstruct() - x))
            if drift > RECONSTRUCT_TOL:
                raise AssertionError(f"reconstruct() drifted by {drift}")


class LineSearchKind(str, Enum):
    EXACT = "exact"
    GOLDEN = "golden"
    ADAPTIVE = "adaptive"


class StepType(str, Enum):
    FW = "FW"
    AWAY = "Away"
    DROP = "Drop"
    NULL = "Null"


@dataclass(frozen=True)
class AdaptiveParams:
    tau: float = 2.0
    xi: float = 1.5
    initial_l: float = 1.0

    def __post_init__(self):
        if not self.tau > 1.0:
            raise ValueError("tau must exceed 1")
        if not self.xi >= 1.0:
            raise ValueError("xi must be at least 1")
        if not self.initial_l > 0.0:
            raise ValueError("initial Lipschitz estimate must be positive")


@dataclass(frozen=True)
class SolverConfig:
    gamma: float = 0.5
    target_gap: float = 1e-8
    max_oracle_calls: int = 100_000
    line_search: LineSearchKind = LineSearchKind.EXACT
    adaptive_params: AdaptiveParams = field(default_factory=AdaptiveParams)
    curvature_estimate: Optional[float] = None
    weight_tol: float = DEFAULT_WEIGHT_TOL
    seed: int = 0

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if not self.target_gap > 0.0:
            raise ValueError("target_gap must be positive")
        if self.curvature_estimate is not None and not self.curvature_estimate > 0.0:
            raise ValueError("curvature_estimate must be positive")

    def with_(self, **kwargs) -> "SolverConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class GapReport:
    """Frank-Wolfe gap, away gap and their sum for one iterate."""

    fw_gap: float
    away_gap: float
    strong_wolfe_gap: float
    fw_vertex: tuple  # (vid, vertex)
    away_vertex: Optional[tuple] = None


@dataclass(frozen=True)
class IterationRecord:
    t: int
    step_type: StepType
    eta: float
    f_value: float
    fw_gap: float
    strong_wolfe_gap: float
    active_set_size: int
    lmo_calls: int
    grad_calls: int
    restart_index: int
