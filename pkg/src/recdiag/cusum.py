"""CUSUM process of recursive residuals and its parabolic significance boundary.

The process is X_n(t) = (S_floor(nt) + frac(nt) R_{floor(nt)+1}) / (sigma * sqrt(n))
with S_k the partial sums of recursive residuals. Knots sit at t = k/n for
k = 0..n-p; beyond the last residual the process is not defined and the
path stops. Under a Gaussian model the path approaches Brownian motion,
so boundary tests only make sense for large samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionMismatch, NoRoot, ZeroVariance

_SQRT2 = math.sqrt(2.0)
_BRACKET = (1e-12, 10.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc, accurate in both tails."""
    return 0.5 * math.erfc(-x / _SQRT2)


def boundary_equation(a: float, alpha: float) -> float:
    """1 - Phi(3a) + exp(-4a^2) Phi(a) - alpha/2."""
    upper_tail = 0.5 * math.erfc(3.0 * a / _SQRT2)
    return upper_tail + math.exp(-4.0 * a * a) * normal_cdf(a) - 0.5 * alpha


def solve_boundary_constant(alpha: float) -> float:
    """Constant a such that the curves +/- 3a sqrt(t) have crossing probability alpha."""
    if not 0.0 < alpha < 0.5:
        raise NoRoot(f"alpha must lie in (0, 0.5), got {alpha}")
    lo, hi = _BRACKET
    f_lo, f_hi = boundary_equation(lo, alpha), boundary_equation(hi, alpha)
    if f_lo * f_hi > 0:
        raise NoRoot(f"no root of the boundary equation in {_BRACKET} for alpha={alpha}")
    return brentq(boundary_equation, lo, hi, args=(alpha,), xtol=1e-15, maxiter=500)


@dataclass(frozen=True)
class Boundary:
    alpha: float
    a: float

    @classmethod
    def for_alpha(cls, alpha: float) -> "Boundary":
        return cls(alpha, solve_boundary_constant(alpha))

    def upper(self, t):
        return 3.0 * self.a * np.sqrt(t)

    def lower(self, t):
        return -3.0 * self.a * np.sqrt(t)


@dataclass(frozen=True)
class CusumPath:
    """Piecewise-linear CUSUM path through its knots (t_k, x_k)."""

    t: np.ndarray
    x: np.ndarray
    sigma_hat: float
    n: int
    p: int
    perm_id: int = 0

    def value_at(self, t):
        """Linear interpolation between knots; nan past the last knot."""
        t = np.asarray(t, dtype=float)
        return np.where(t <= self.t[-1] + 1e-15, np.interp(t, self.t, self.x), np.nan)

    def sample(self, grid: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Knots merged with a uniform grid of ``grid`` intervals on (0, 1)."""
        if grid <= 0:
            return self.t, self.x
        extra = np.arange(1, grid) / grid
        extra = extra[extra < self.t[-1]]
        ts = np.union1d(self.t, extra)
        return ts, np.interp(ts, self.t, self.x)


def cusum_path(residuals, sigma_hat: float, n: int, grid: int = 0, perm_id: int = 0) -> CusumPath:
    """Build the normalized CUSUM path from the n - p recursive residuals.

    ``grid`` is kept for the export density only; the path itself is
    fully described by its knots.
    """
    r = np.asarray(residuals, dtype=float)
    if r.ndim != 1 or len(r) >= n + 1 or len(r) < 1:
        raise DimensionMismatch(f"need 1 <= len(residuals) <= n, got {len(r)} with n={n}")
    if not sigma_hat > 0:
        raise ZeroVariance("sigma_hat must be > 0; a perfect fit has no CUSUM path")
    s = np.concatenate([[0.0], np.cumsum(r)])
    k = np.arange(len(s))
    return CusumPath(k / n, s / (sigma_hat * math.sqrt(n)), float(sigma_hat), n, n - len(r), perm_id)


@dataclass(frozen=True)
class CrossingReport:
    perm_id: int
    crossed: bool
    first_crossing_t: float | None = None
    side: str | None = None


def _first_hit(t0: float, t1: float, x0: float, x1: float, three_a: float) -> float | None:
    """Smallest t in (t0, t1] (t > 0) with x(t) >= 3a sqrt(t) on a linear segment.

    With u = sqrt(t) the condition is g(u) = m u^2 - 3a u + c >= 0,
    m the slope and c the intercept of the segment.
    """
    m = (x1 - x0) / (t1 - t0)
    c = x0 - m * t0
    u0, u1 = math.sqrt(t0), math.sqrt(t1)
    if t0 > 0 and x0 >= three_a * u0:
        return t0

    if m == 0.0:
        roots = [c / three_a]
    else:
        disc = three_a * three_a - 4.0 * m * c
        if disc < 0:
            roots = []
        else:
            sq = math.sqrt(disc)
            q = 0.5 * (three_a + sq)  # cancellation-free root pair q/m, c/q
            roots = [q / m]
            if q != 0.0:
                roots.append(c / q)
    hits = [u for u in roots if u0 < u <= u1]
    if not hits:
        # root pushed just past u1 by rounding
        return t1 if x1 >= three_a * u1 else None
    return min(hits) ** 2


def detect_crossing(path: CusumPath, boundary: Boundary) -> CrossingReport:
    """Earliest t > 0 at which the path meets or leaves the band |x| < 3a sqrt(t)."""
    three_a = 3.0 * boundary.a
    t, x = path.t, path.x
    for j in range(len(t) - 1):
        with np.errstate(over="ignore"):  # near-flat segments put one root at +/- inf
            up = _first_hit(t[j], t[j + 1], x[j], x[j + 1], three_a)
            down = _first_hit(t[j], t[j + 1], -x[j], -x[j + 1], three_a)
        if up is None and down is None:
            continue
        if down is None or (up is not None and up <= down):
            return CrossingReport(path.perm_id, True, float(up), "upper")
        return CrossingReport(path.perm_id, True, float(down), "lower")
    return CrossingReport(path.perm_id, False)
