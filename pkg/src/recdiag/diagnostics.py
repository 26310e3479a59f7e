"""Classical single-case influence diagnostics used as a baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, LeverageOne
from .linalg import Dataset, fit_ols

LEVERAGE_ONE_TOL = 1e-10


@dataclass(frozen=True)
class DiagnosticsReport:
    """Per-observation leverage, standardized residual, Cook distance, DFFITS.

    ``high_leverage`` flags H_ii >= 2p/n, twice the mean leverage.
    """

    row_ids: tuple[str, ...]
    leverage: np.ndarray
    high_leverage: np.ndarray
    standardized_residual: np.ndarray
    studentized_deleted_residual: np.ndarray
    cook_distance: np.ndarray
    dffit: np.ndarray
    leverage_threshold: float
    sigma2_hat: float

    def records(self) -> list[dict]:
        return [
            {
                "row_id": rid,
                "leverage": float(self.leverage[i]),
                "high_leverage": bool(self.high_leverage[i]),
                "standardized_residual": float(self.standardized_residual[i]),
                "cook_distance": float(self.cook_distance[i]),
                "dffit": float(self.dffit[i]),
            }
            for i, rid in enumerate(self.row_ids)
        ]


def classical_diagnostics(data: Dataset) -> DiagnosticsReport:
    """Leave-one-out diagnostics from the closed-form deletion identities.

    standardized r_i = e_i / (s sqrt(1 - h_i))
    Cook_i = r_i^2 / p * h_i / (1 - h_i)
    t_i = r_i sqrt((n - p - 1) / (n - p - r_i^2))   (studentized deleted)
    DFFITS_i = t_i sqrt(h_i / (1 - h_i))
    """
    n, p = data.n, data.p
    if n <= p + 1:
        raise DimensionMismatch(f"need n > p + 1 for deletion diagnostics, got n={n}, p={p}")
    fit = fit_ols(data)
    h = fit.hat_diag
    if np.any(h >= 1.0 - LEVERAGE_ONE_TOL):
        bad = [data.row_ids[i] for i in np.flatnonzero(h >= 1.0 - LEVERAGE_ONE_TOL)]
        raise LeverageOne(f"observation(s) {', '.join(bad)} have leverage 1; "
                          "deletion diagnostics are singular")
    s2 = fit.sigma2_hat
    with np.errstate(divide="ignore", invalid="ignore"):
        r = fit.residuals / np.sqrt(s2 * (1.0 - h))
        r = np.where(s2 > 0, r, 0.0)
        t = r * np.sqrt((n - p - 1) / np.maximum(n - p - r * r, 0.0))
    cook = r * r / p * h / (1.0 - h)
    dffit = t * np.sqrt(h / (1.0 - h))
    threshold = 2.0 * p / n
    return DiagnosticsReport(data.row_ids, h, h >= threshold, r, t, cook, dffit, threshold, s2)
