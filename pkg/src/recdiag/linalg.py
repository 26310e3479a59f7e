"""Batch least-squares machinery: datasets, QR-based OLS fits, leverages."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite, RankDeficient

RANK_RTOL = 1e-10


def numerical_rank_ok(X: np.ndarray, rtol: float = RANK_RTOL) -> bool:
    """True when smallest/largest singular value of X is at least ``rtol``."""
    if X.shape[0] < X.shape[1]:
        return False
    s = np.linalg.svd(X, compute_uv=False)
    return bool(s[0] > 0 and s[-1] / s[0] >= rtol)


def has_intercept_column(X: np.ndarray) -> bool:
    return bool(X.shape[0] > 0 and np.any(np.all(X == 1.0, axis=0)))


@dataclass(frozen=True)
class Dataset:
    """Design matrix, response and labels for one regression problem.

    ``X`` includes the column of ones when the model has an intercept.
    Construction validates shapes and numerical rank.
    """

    X: np.ndarray
    y: np.ndarray
    labels: tuple[str, ...]
    row_ids: tuple[str, ...]
    check_rank: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or y.ndim != 1:
            raise DimensionMismatch("X must be 2-d and y 1-d")
        n, p = X.shape
        if y.shape[0] != n:
            raise DimensionMismatch(f"X has {n} rows but y has {y.shape[0]} entries")
        if p < 1 or n < p:
            raise DimensionMismatch(f"need n >= p >= 1, got n={n}, p={p}")
        if len(self.labels) != p:
            raise DimensionMismatch(f"{len(self.labels)} labels for {p} columns")
        if len(self.row_ids) != n:
            raise DimensionMismatch(f"{len(self.row_ids)} row ids for {n} rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DimensionMismatch("X and y must be finite")
        if self.check_rank and not numerical_rank_ok(X):
            raise RankDeficient(f"design matrix has numerical rank < {p}")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        object.__setattr__(self, "row_ids", tuple(str(s) for s in self.row_ids))

    @classmethod
    def from_arrays(cls, X, y, labels: Sequence[str] | None = None,
                    row_ids: Sequence[str] | None = None, intercept: bool = False):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if labels is None:
            labels = [f"x{j + 1}" for j in range(X.shape[1])]
        if intercept:
            X = np.column_stack([np.ones(X.shape[0]), X])
            labels = ["intercept", *labels]
        if row_ids is None:
            row_ids = [str(i + 1) for i in range(X.shape[0])]
        return cls(X, np.asarray(y, dtype=float), tuple(labels), tuple(row_ids))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def has_intercept(self) -> bool:
        return has_intercept_column(self.X)

    def take(self, rows) -> "Dataset":
        """Subset (and reorder) rows; ``rows`` are 0-based indices."""
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.X[rows], self.y[rows], self.labels,
                       tuple(self.row_ids[i] for i in rows))

    def drop(self, row_ids: Sequence[str]) -> "Dataset":
        drop = set(row_ids)
        keep = [i for i, r in enumerate(self.row_ids) if r not in drop]
        return self.take(keep)

    def with_values(self, X=None, y=None) -> "Dataset":
        return Dataset(self.X if X is None else X, self.y if y is None else y,
                       self.labels, self.row_ids)


@dataclass(frozen=True)
class OlsFit:
    beta_hat: np.ndarray
    sigma2_hat: float  # nan when n == p
    r2: float  # nan when r2_undefined
    residuals: np.ndarray
    hat_diag: np.ndarray
    r2_undefined: bool = False

    @property
    def sigma2_undefined(self) -> bool:
        return bool(np.isnan(self.sigma2_hat))


def r_squared(sse: float, y: np.ndarray, centered: bool) -> float:
    """1 - SSE/SST; SST centered when the model has an intercept. nan if SST == 0."""
    sst = float(np.sum((y - y.mean()) ** 2)) if centered else float(np.sum(y ** 2))
    if sst == 0.0:
        return float("nan")
    return 1.0 - sse / sst


def _checked_qr(X: np.ndarray):
    if not numerical_rank_ok(X):
        raise RankDeficient(f"design matrix has numerical rank < {X.shape[1]}")
    return np.linalg.qr(X, mode="reduced")


def fit_ols(data: Dataset) -> OlsFit:
    """Least-squares fit by Householder QR; (X'X)^-1 is never formed."""
    X, y = data.X, data.y
    n, p = X.shape
    Q, R = _checked_qr(X)
    beta = scipy.linalg.solve_triangular(R, Q.T @ y)
    resid = y - X @ beta
    sse = float(resid @ resid)
    sigma2 = sse / (n - p) if n > p else float("nan")
    r2 = r_squared(sse, y, has_intercept_column(X))
    return OlsFit(beta_hat=beta, sigma2_hat=sigma2, r2=r2, residuals=resid,
                  hat_diag=np.sum(Q * Q, axis=1), r2_undefined=bool(np.isnan(r2)))


def hat_matrix_diag(data: Dataset) -> np.ndarray:
    """Leverages H_ii = squared row norms of the thin Q factor."""
    Q, _ = _checked_qr(data.X)
    return np.sum(Q * Q, axis=1)


def solve_spd(A, b) -> np.ndarray:
    """Solve A x = b for symmetric positive-definite A via Cholesky."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
        raise DimensionMismatch("A must be square and b conformable")
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        factor = scipy.linalg.cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return scipy.linalg.cho_solve(factor, b)
