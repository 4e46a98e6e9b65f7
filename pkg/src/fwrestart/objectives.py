"""Objective oracles (quadratic, powered-norm, logistic), datasets, generators."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import expit


@dataclass
class Dataset:
    """Row-major design matrix with regression targets or +/-1 labels."""

    X: np.ndarray
    y: np.ndarray
    w_star: Optional[np.ndarray] = None  # planted coefficients, when synthetic

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("inconsistent dataset dimensions")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset contains non-finite entries")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


class Objective:
    dim: int

    def value(self, w) -> float:
        raise NotImplementedError

    def gradient(self, w) -> np.ndarray:
        raise NotImplementedError

    def lipschitz(self) -> Optional[float]:
        """Global smoothness constant, or None when no global bound exists."""
        return None


def _check_dim(w, dim) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (dim,):
        raise ValueError(f"expected weight vector of length {dim}, got {w.shape}")
    return w


def _lambda_max(X: np.ndarray, n_iter: int = 1000, tol: float = 1e-13) -> float:
    """Largest eigenvalue of X^T X by power iteration."""
    n, d = X.shape
    v = np.ones(d) / np.sqrt(d)
    lam = 0.0
    for _ in range(n_iter):
        u = X.T @ (X @ v)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return 0.0
        v_new = u / norm
        lam_new = float(v_new @ (X.T @ (X @ v_new)))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        v, lam = v_new, lam_new
    return lam


class LeastSquares(Objective):
    """f(w) = 1/(2n) sum (y_i - x_i.w)^2."""

    def __init__(self, X, y):
        self.data = Dataset(X, y)
        self.X = self.data.X
        self.y = self.data.y
        self.n = self.data.n_samples
        self.dim = self.data.dim
        self._lmax = None

    def value(self, w) -> float:
        w = _check_dim(w, self.dim)
        r = self.X @ w - self.y
        return float(r @ r) / (2.0 * self.n)

    def gradient(self, w) -> np.ndarray:
        w = _check_dim(w, self.dim)
        return self.X.T @ (self.X @ w - self.y) / self.n

    def curvature_along(self, d) -> float:
        """d^T (X^T X / n) d, the exact second derivative along d."""
        Xd = self.X @ np.asarray(d)
        return float(Xd @ Xd) / self.n

    def lipschitz(self) -> float:
        if self._lmax is None:
            self._lmax = _lambda_max(self.X)
        return self._lmax / self.n


class PoweredNorm(Objective):
    """f(w) = 1/(alpha n) sum |y_i - x_i.w|^alpha for alpha > 1.

    The absolute value keeps the loss convex for non-integer alpha; the
    gradient contribution at a zero residual is 0 (valid since alpha > 1).
    No global smoothness constant exists for alpha < 2.
    """

    def __init__(self, X, y, alpha: float):
        if not alpha > 1.0:
            raise ValueError("alpha must exceed 1")
        self.data = Dataset(X, y)
        self.X = self.data.X
        self.y = self.data.y
        self.alpha = float(alpha)
        self.n = self.data.n_samples
        self.dim = self.data.dim

    def value(self, w) -> float:
        w = _check_dim(w, self.dim)
        r = self.y - self.X @ w
        return float(np.sum(np.abs(r) ** self.alpha)) / (self.alpha * self.n)

    def gradient(self, w) -> np.ndarray:
        w = _check_dim(w, self.dim)
        r = self.y - self.X @ w
        g = np.abs(r) ** (self.alpha - 1.0) * np.sign(r)
        return -(self.X.T @ g) / self.n


class Logistic(Objective):
    """f(w) = 1/n sum log(1 + exp(-y_i x_i.w)) with labels y_i in {-1, +1}."""

    def __init__(self, X, y):
        self.data = Dataset(X, y)
        if not np.all(np.isin(self.data.y, (-1.0, 1.0))):
            raise ValueError("logistic labels must be +/-1")
        self.X = self.data.X
        self.y = self.data.y
        self.n = self.data.n_samples
        self.dim = self.data.dim
        self._lmax = None

    def value(self, w) -> float:
        w = _check_dim(w, self.dim)
        z = self.y * (self.X @ w)
        return float(np.mean(np.logaddexp(0.0, -z)))

    def gradient(self, w) -> np.ndarray:
        w = _check_dim(w, self.dim)
        z = self.y * (self.X @ w)
        return -(self.X.T @ (self.y * expit(-z))) / self.n

    def lipschitz(self) -> float:
        if self._lmax is None:
            self._lmax = _lambda_max(self.X)
        return self._lmax / (4.0 * self.n)


def generate_synthetic(
    kind: str, n_samples: int, dim: int, noise: float, seed: int
) -> Dataset:
    """Gaussian design with a planted sparse coefficient vector.

    ``kind`` is "regression" (y = Xw* + noise*gaussian) or "classification"
    (y = sign(Xw* + noise*gaussian)). The support has dim // 10 entries
    (at least one) drawn without replacement; deterministic per seed.
    """
    if kind not in ("regression", "classification"):
        raise ValueError(f"unknown synthetic kind {kind!r}")
    if n_samples < 1 or dim < 1:
        raise ValueError("n_samples and dim must be positive")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, dim))
    k = max(1, dim // 10)
    support = rng.choice(dim, size=k, replace=False)
    w_star = np.zeros(dim)
    w_star[support] = rng.standard_normal(k)
    signal = X @ w_star + noise * rng.standard_normal(n_samples)
    if kind == "classification":
        y = np.where(signal >= 0.0, 1.0, -1.0)
    else:
        y = signal
    return Dataset(X, y, w_star=w_star)


class CsvFormatError(ValueError):
    pass


def load_csv(path) -> Dataset:
    """Parse a CSV file: first column target, remaining columns features.

    A non-numeric first row is treated as a header and skipped.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = []
    width = None
    start = 0
    if lines:
        first = [f.strip() for f in lines[0].split(",")]
        try:
            [float(f) for f in first]
        except ValueError:
            start = 1
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            row = [float(f) for f in fields]
        except ValueError as exc:
            raise CsvFormatError(f"line {lineno}: malformed value ({exc})") from None
        if len(row) < 2:
            raise CsvFormatError(f"line {lineno}: need a target and at least one feature")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CsvFormatError(
                f"line {lineno}: expected {width} columns, got {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    data = np.asarray(rows)
    return Dataset(data[:, 1:], data[:, 0])
