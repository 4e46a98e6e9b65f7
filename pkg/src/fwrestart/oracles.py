"""Linear minimization oracles for the feasible regions, plus away-vertex selection.

All oracles break ties deterministically by lowest index and, for the zero
objective, return the first canonical vertex.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ActiveSet, SignedBasis, as_vector, dense_id


class FeasibleRegion:
    """Base class; concrete regions implement the linear minimization oracle."""

    dim: int

    def lmo(self, c):
        """Return (vertex id, vertex) minimizing <c, z> over the region."""
        raise NotImplementedError

    def is_polytope(self) -> bool:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-8) -> bool:
        raise NotImplementedError


class L1Ball(FeasibleRegion):
    def __init__(self, radius: float, dim: int):
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.dim = int(dim)

    def lmo(self, c):
        c = as_vector(c, self.dim)
        i = int(np.argmax(np.abs(c)))
        if c[i] == 0.0:
            # zero objective: every point is optimal, return the first vertex
            return self._vertex(0, 1)
        return self._vertex(i, -1 if c[i] > 0 else 1)

    def _vertex(self, index: int, sign: int):
        v = np.zeros(self.dim)
        v[index] = sign * self.radius
        return SignedBasis(index, sign), v

    def vertices(self):
        for i in range(self.dim):
            for s in (1, -1):
                yield self._vertex(i, s)

    def is_polytope(self) -> bool:
        return True

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x, tol: float = 1e-8) -> bool:
        return float(np.sum(np.abs(x))) <= self.radius + tol

    def __repr__(self):
        return f"L1Ball(radius={self.radius}, dim={self.dim})"


class Simplex(FeasibleRegion):
    """Scaled probability simplex {x >= 0, sum x = scale}."""

    def __init__(self, scale: float, dim: int):
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        self.dim = int(dim)

    def lmo(self, c):
        c = as_vector(c, self.dim)
        i = int(np.argmin(c))
        v = np.zeros(self.dim)
        v[i] = self.scale
        return SignedBasis(i, 1), v

    def vertices(self):
        for i in range(self.dim):
            v = np.zeros(self.dim)
            v[i] = self.scale
            yield SignedBasis(i, 1), v

    def is_polytope(self) -> bool:
        return True

    def diameter(self) -> float:
        return self.scale * math.sqrt(2.0)

    def contains(self, x, tol: float = 1e-8) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - self.scale) <= tol)

    def __repr__(self):
        return f"Simplex(scale={self.scale}, dim={self.dim})"


class Box(FeasibleRegion):
    def __init__(self, lower, upper):
        self.lower = as_vector(lower)
        self.upper = as_vector(upper, self.lower.shape[0])
        if np.any(self.upper < self.lower):
            raise ValueError("upper bound below lower bound")
        self.dim = self.lower.shape[0]

    def lmo(self, c):
        c = as_vector(c, self.dim)
        # zero coefficients take the lower bound for determinism
        v = np.where(c > 0, self.lower, self.upper)
        v = np.where(c == 0, self.lower, v)
        return dense_id(v), v

    def vertices(self):
        for mask in range(2 ** self.dim):
            v = self.lower.copy()
            for i in range(self.dim):
                if mask >> i & 1:
                    v[i] = self.upper[i]
            yield dense_id(v), v

    def is_polytope(self) -> bool:
        return True

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x, tol: float = 1e-8) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def __repr__(self):
        return f"Box(dim={self.dim})"


class LpBall(FeasibleRegion):
    """lp-norm ball for 1 < p < inf; p=1 and p=inf are separate polytopes."""

    def __init__(self, radius: float, p: float, dim: int):
        if not radius > 0:
            raise ValueError("radius must be positive")
        if not 1.0 < p < math.inf:
            raise ValueError("LpBall requires 1 < p < inf; use lp_ball() to normalize")
        self.radius = float(radius)
        self.p = float(p)
        self.q = p / (p - 1.0)
        self.dim = int(dim)

    def lmo(self, c):
        c = as_vector(c, self.dim)
        qnorm = float(np.sum(np.abs(c) ** self.q)) ** (1.0 / self.q)
        if qnorm == 0.0:
            v = np.zeros(self.dim)
            v[0] = -self.radius
            return dense_id(v), v
        v = -self.radius * np.sign(c) * (np.abs(c) / qnorm) ** (self.q - 1.0)
        return dense_id(v), v

    def is_polytope(self) -> bool:
        return False

    def diameter(self) -> float:
        if self.p >= 2.0:
            return 2.0 * self.radius * self.dim ** (0.5 - 1.0 / self.p)
        return 2.0 * self.radius

    def contains(self, x, tol: float = 1e-8) -> bool:
        norm = float(np.sum(np.abs(x) ** self.p)) ** (1.0 / self.p)
        return norm <= self.radius + tol

    def __repr__(self):
        return f"LpBall(radius={self.radius}, p={self.p}, dim={self.dim})"


def lp_ball(radius: float, p: float, dim: int) -> FeasibleRegion:
    """Build an lp ball, normalizing p=1 to the l1 ball and p=inf to a box."""
    if p == 1.0:
        return L1Ball(radius, dim)
    if math.isinf(p):
        r = float(radius)
        return Box(np.full(dim, -r), np.full(dim, r))
    return LpBall(radius, p, dim)


def away_vertex(active_set: ActiveSet, grad):
    """Return the support vertex maximizing <grad, v> (first on ties).

    Selection over the maintained support; does not count as an LMO call.
    """
    if len(active_set) == 0:
        raise ValueError("away vertex undefined for an empty active set")
    grad = np.asarray(grad)
    best = None
    best_val = -np.inf
    for e in active_set:
        val = float(grad @ e.vertex)
        if val > best_val:
            best = e
            best_val = val
    return best.vid, best.vertex


def region_diameter(region: FeasibleRegion) -> float:
    return region.diameter()
