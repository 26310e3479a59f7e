"""Recursive estimation traces along permutations of the observations.

Step ``i`` (1-based) of a trace holds the fit on the first ``p + i - 1``
observations of the permutation. Two routes are provided:

* ``resolve`` refits every prefix from scratch with QR (ground truth);
* ``update`` carries beta and (X'X)^-1 forward with rank-one updates.

The update route accumulates rounding error on ill-conditioned designs,
which is the reason ``resolve`` is the default.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import ConfigError, PrefixRankDeficient, RankDeficient, SingularInformation
from .linalg import RANK_RTOL, Dataset, has_intercept_column
from .permute import PermutationSchedule, schedule_permutations

# prefixes refit per batched QR call are capped so that chunk * n * p stays small
_BATCH_ELEMENTS = 2_000_000


class Method(str, enum.Enum):
    RESOLVE = "resolve"
    UPDATE = "update"


@dataclass(frozen=True)
class FitState:
    """Fit on a prefix: coefficients plus (X'X)^-1, explicit or as a QR factor.

    With ``r_factor`` set, x'(X'X)^-1 x is evaluated as |R^-T x|^2, which
    stays non-negative on ill-conditioned prefixes.
    """

    beta: np.ndarray
    xtx_inv: np.ndarray | None = None
    r_factor: np.ndarray | None = None

    def quad_form(self, x: np.ndarray) -> float:
        if self.r_factor is not None:
            z = scipy.linalg.solve_triangular(self.r_factor, x, trans="T")
            q = float(z @ z)
        elif self.xtx_inv is not None:
            q = float(x @ self.xtx_inv @ x)
        else:
            raise SingularInformation("fit state carries no information matrix")
        if not np.isfinite(q) or q < 0.0:
            raise SingularInformation(f"quadratic form x'(X'X)^-1 x = {q} is not >= 0")
        return q


class TraceStep(NamedTuple):
    subset_size: int
    beta: np.ndarray
    sigma2: float
    r2: float
    recursive_residual: float


@dataclass
class RecursiveTrace:
    """Per-step arrays for one permutation.

    ``sigma2``, ``r2`` and ``recursive_residual`` are nan where undefined
    (first step). An invalid trace has ``error`` set and empty arrays.
    """

    perm_id: int
    perm: tuple[int, ...]
    method: Method
    subset_size: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    beta: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    sigma2: np.ndarray = field(default_factory=lambda: np.empty(0))
    r2: np.ndarray = field(default_factory=lambda: np.empty(0))
    recursive_residual: np.ndarray = field(default_factory=lambda: np.empty(0))
    error: str | None = None

    @property
    def valid(self) -> bool:
        return self.error is None

    @property
    def n_steps(self) -> int:
        return len(self.subset_size)

    @property
    def steps(self) -> list[TraceStep]:
        return [TraceStep(int(self.subset_size[i]), self.beta[i], float(self.sigma2[i]),
                          float(self.r2[i]), float(self.recursive_residual[i]))
                for i in range(self.n_steps)]

    @property
    def residuals(self) -> np.ndarray:
        """The n - p defined recursive residuals, in entry order."""
        return self.recursive_residual[1:]


def recursive_residual(prev: FitState, x_new, y_new: float) -> float:
    """Standardized one-step-ahead prediction error of a new observation.

    (y - x'beta) / sqrt(1 + x'(X'X)^-1 x), with beta and (X'X)^-1 taken
    from the fit before the observation is added.
    """
    x_new = np.asarray(x_new, dtype=float)
    q = prev.quad_form(x_new)
    return (float(y_new) - float(x_new @ prev.beta)) / np.sqrt(1.0 + q)


def _zero_based(perm: Sequence[int], n: int) -> np.ndarray:
    idx = np.asarray(perm, dtype=int) - 1
    if idx.shape != (n,) or not np.array_equal(np.sort(idx), np.arange(n)):
        raise ConfigError(f"permutation is not a bijection on 1..{n}")
    return idx


def _running_sst(y: np.ndarray, centered: bool) -> np.ndarray:
    """Total sum of squares of y[:k] for k = 1..len(y)."""
    if not centered:
        return np.cumsum(y * y)
    out = np.empty(len(y))
    mean = sst = 0.0
    for k, v in enumerate(y):
        delta = v - mean
        mean += delta / (k + 1)
        sst += delta * (v - mean)
        out[k] = sst
    return out


def _prefix_qr(Xs: np.ndarray, ys: np.ndarray, sizes: np.ndarray):
    """Batched QR refits of every prefix, padding dropped rows with zeros."""
    n, p = Xs.shape
    mask = (np.arange(n)[None, :] < sizes[:, None]).astype(float)
    Xb = Xs[None, :, :] * mask[:, :, None]
    yb = ys[None, :] * mask
    Q, R = np.linalg.qr(Xb, mode="reduced")
    s = np.linalg.svd(R, compute_uv=False)
    ok = (s[:, 0] > 0) & (s[:, -1] >= RANK_RTOL * s[:, 0])
    betas = np.full((len(sizes), p), np.nan)
    if np.any(ok):
        qty = np.einsum("mnp,mn->mp", Q[ok], yb[ok])
        betas[ok] = np.linalg.solve(R[ok], qty[:, :, None])[:, :, 0]
    resid = yb - np.einsum("mnp,mp->mn", Xb, np.nan_to_num(betas))
    sse = np.sum(resid * resid, axis=1)
    return betas, R, sse, ok


def recursive_trace_resolve(data: Dataset, perm: Sequence[int], perm_id: int = 0) -> RecursiveTrace:
    """Refit every prefix of ``perm`` from scratch by QR."""
    n, p = data.n, data.p
    idx = _zero_based(perm, n)
    Xs, ys = data.X[idx], data.y[idx]
    sizes = np.arange(p, n + 1)
    m = len(sizes)

    betas = np.empty((m, p))
    sse = np.empty(m)
    R = np.empty((m, p, p))
    chunk = max(1, _BATCH_ELEMENTS // (n * p))
    for lo in range(0, m, chunk):
        b, r, s, ok = _prefix_qr(Xs, ys, sizes[lo:lo + chunk])
        if not np.all(ok):
            first = lo + int(np.argmin(ok))
            raise PrefixRankDeficient(first + 1, int(sizes[first]), perm_id)
        betas[lo:lo + chunk], R[lo:lo + chunk], sse[lo:lo + chunk] = b, r, s

    dof = sizes - p
    sigma2 = np.full(m, np.nan)
    sigma2[1:] = sse[1:] / dof[1:]
    sst = _running_sst(ys, has_intercept_column(data.X))[sizes - 1]
    r2 = np.full(m, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2[1:] = np.where(sst[1:] > 0, 1.0 - sse[1:] / sst[1:], np.nan)

    resid = np.full(m, np.nan)
    for i in range(1, m):
        k = sizes[i] - 1  # 0-based position of the entering observation
        resid[i] = recursive_residual(FitState(betas[i - 1], r_factor=R[i - 1]), Xs[k], ys[k])

    return RecursiveTrace(perm_id, tuple(int(v) for v in perm), Method.RESOLVE, sizes,
                          betas, sigma2, r2, resid)


def recursive_trace_update(data: Dataset, perm: Sequence[int], perm_id: int = 0) -> RecursiveTrace:
    """Rank-one recursive least squares along ``perm``.

    Only the initial p-row block is rank-checked; adding rows cannot lower
    the rank of later prefixes.
    """
    n, p = data.n, data.p
    idx = _zero_based(perm, n)
    Xs, ys = data.X[idx], data.y[idx]
    sizes = np.arange(p, n + 1)
    m = len(sizes)
    centered = has_intercept_column(data.X)

    X0, y0 = Xs[:p], ys[:p]
    s = np.linalg.svd(X0, compute_uv=False)
    if not (s[0] > 0 and s[-1] >= RANK_RTOL * s[0]):
        raise PrefixRankDeficient(1, p, perm_id)
    X0_inv = np.linalg.inv(X0)
    beta = X0_inv @ y0
    P = X0_inv @ X0_inv.T

    betas = np.empty((m, p))
    sigma2 = np.full(m, np.nan)
    r2 = np.full(m, np.nan)
    resid = np.full(m, np.nan)
    betas[0] = beta
    sse = 0.0
    mean = float(np.mean(y0))
    sst = float(np.sum((y0 - mean) ** 2)) if centered else float(y0 @ y0)

    for i in range(1, m):
        k = p + i - 1
        x, yk = Xs[k], ys[k]
        w = recursive_residual(FitState(beta, xtx_inv=P), x, yk)
        Px = P @ x
        denom = 1.0 + float(x @ Px)
        beta = beta + Px * ((yk - float(x @ beta)) / denom)
        P = P - np.outer(Px, Px) / denom
        sse += w * w
        if centered:
            delta = yk - mean
            mean += delta / (k + 1)
            sst += delta * (yk - mean)
        else:
            sst += yk * yk
        betas[i] = beta
        resid[i] = w
        sigma2[i] = sse / (k + 1 - p)
        r2[i] = 1.0 - sse / sst if sst > 0 else np.nan

    return RecursiveTrace(perm_id, tuple(int(v) for v in perm), Method.UPDATE, sizes,
                          betas, sigma2, r2, resid)


_TRACE_FUNCS = {Method.RESOLVE: recursive_trace_resolve, Method.UPDATE: recursive_trace_update}


def trim_start_step(trim_alpha: float, n: int, p: int) -> int:
    """First exported step (1-based) for trimming fraction ``trim_alpha``.

    Zero keeps every step; any positive fraction starts at step
    max(2, floor(alpha * n)), i.e. subset size at least p + 1.
    """
    if not 0.0 <= trim_alpha < 1.0:
        raise ConfigError(f"trim_alpha must lie in [0, 1), got {trim_alpha}")
    cut = int(np.floor(trim_alpha * n))
    if cut > n - p:
        raise ConfigError(f"floor(trim_alpha * n) = {cut} exceeds n - p = {n - p}")
    if trim_alpha == 0.0:
        return 1
    return max(2, cut)


def default_threads() -> int:
    env = os.environ.get("RECDIAG_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"RECDIAG_THREADS must be an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError("RECDIAG_THREADS must be >= 1")
        return value
    return os.cpu_count() or 1


@dataclass
class TraceEnsemble:
    data: Dataset
    schedule: PermutationSchedule
    method: Method
    trim_alpha: float
    traces: list[RecursiveTrace]

    @property
    def start_step(self) -> int:
        return trim_start_step(self.trim_alpha, self.data.n, self.data.p)

    @property
    def valid_traces(self) -> list[RecursiveTrace]:
        return [t for t in self.traces if t.valid]

    def exported_mask(self) -> np.ndarray:
        steps = np.arange(1, self.data.n - self.data.p + 2)
        return steps >= self.start_step


def trace_ensemble(data: Dataset, sched: PermutationSchedule, method: Method | str = Method.RESOLVE,
                   trim_alpha: float = 0.0, threads: int | None = None) -> TraceEnsemble:
    """One trace per scheduled permutation, ordered by perm_id (1-based).

    A permutation with a rank-deficient prefix yields an invalid trace
    instead of aborting the ensemble; other errors propagate with the
    perm_id attached.
    """
    method = Method(method)
    if sched.n != data.n:
        raise ConfigError(f"schedule is for n={sched.n} but data has n={data.n}")
    trim_start_step(trim_alpha, data.n, data.p)
    func = _TRACE_FUNCS[method]
    perms = schedule_permutations(sched)
    if not perms:
        raise ConfigError("empty permutation schedule")

    def run(item):
        perm_id, perm = item
        try:
            return func(data, perm, perm_id)
        except PrefixRankDeficient as exc:
            return RecursiveTrace(perm_id, tuple(perm), method, error=str(exc))
        except RankDeficient:
            raise
        except Exception as exc:
            exc.args = (f"permutation {perm_id}: {exc}",) + exc.args[1:]
            raise

    items = list(enumerate(perms, start=1))
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(items) == 1:
        traces = [run(it) for it in items]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = list(pool.map(run, items))
    if not any(t.valid for t in traces):
        raise RankDeficient("every permutation has a rank-deficient prefix")
    return TraceEnsemble(data, sched, method, trim_alpha, traces)
