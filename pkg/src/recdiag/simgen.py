"""Simulation scenarios: y = beta0 + beta1 x + noise with injected outliers.

x is drawn Laplace(location=1, scale=1) by default, the noise Gaussian.
Outliers mimic a misplaced decimal separator: the chosen entries of x
and/or y are multiplied by ``perturb_factor``. Positions are 1-based.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import ConfigError, PositionsOutOfRange
from .linalg import Dataset


class Target(str, enum.Enum):
    NONE = "none"
    X_ONLY = "x"
    Y_ONLY = "y"
    BOTH = "both"


class Positions(str, enum.Enum):
    MIDDLE = "middle"
    CONSECUTIVE = "consecutive"
    RANDOM = "random"


@dataclass(frozen=True)
class ScenarioSpec:
    n: int = 100
    beta0: float = 1.0
    beta1: float = 2.0
    noise_sd: float = 0.1
    x_location: float = 1.0
    x_scale: float = 1.0
    perturb_factor: float = 10.0
    target: Target = Target.NONE
    positions: Positions = Positions.MIDDLE
    k: int = 1
    positions_seed: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "target", Target(self.target))
        object.__setattr__(self, "positions", Positions(self.positions))
        if self.n < 4:
            raise ConfigError("scenario needs n >= 4")
        if not 1 <= self.k < self.n:
            raise ConfigError(f"outlier count k must satisfy 1 <= k < n, got {self.k}")
        if self.perturb_factor == 0:
            raise ConfigError("perturb_factor must be non-zero")
        if self.noise_sd < 0 or self.x_scale <= 0:
            raise ConfigError("noise_sd must be >= 0 and x_scale > 0")

    def outlier_positions(self) -> list[int]:
        if self.target is Target.NONE:
            return []
        mid = self.n // 2
        if self.positions is Positions.MIDDLE:
            pos = [mid]
        elif self.positions is Positions.CONSECUTIVE:
            pos = list(range(mid, mid + self.k))
        else:
            rng = np.random.Generator(np.random.PCG64(self.positions_seed))
            pos = sorted(int(v) + 1 for v in rng.choice(self.n, size=self.k, replace=False))
        if min(pos) < 1 or max(pos) > self.n:
            raise PositionsOutOfRange(f"positions {pos} fall outside 1..{self.n}")
        return pos

    def with_(self, **changes) -> "ScenarioSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["target"] = self.target.value
        d["positions"] = self.positions.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid scenario: {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "ScenarioSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario config is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("scenario config must be a JSON object")
        return cls.from_dict(d)


def generate_clean(spec: ScenarioSpec) -> tuple[Dataset, np.ndarray]:
    """Draw x then noise from PCG64(rng_seed); returns the data and (beta0, beta1)."""
    rng = np.random.Generator(np.random.PCG64(spec.rng_seed))
    x = rng.laplace(spec.x_location, spec.x_scale, spec.n)
    eps = rng.normal(0.0, 1.0, spec.n) * spec.noise_sd
    y = spec.beta0 + spec.beta1 * x + eps
    beta = np.array([spec.beta0, spec.beta1])
    return Dataset.from_arrays(x, y, labels=["x"], intercept=True), beta


def inject_outliers(data: Dataset, spec: ScenarioSpec) -> Dataset:
    """Copy of ``data`` with x and/or y multiplied at the scenario's positions.

    x is the last design column; the response is left untouched when only
    x is perturbed.
    """
    if spec.target is Target.NONE:
        return data
    pos = spec.outlier_positions()
    if max(pos) > data.n:
        raise PositionsOutOfRange(f"positions {pos} fall outside 1..{data.n}")
    idx = np.asarray(pos) - 1
    X = data.X.copy()
    y = data.y.copy()
    if spec.target in (Target.X_ONLY, Target.BOTH):
        X[idx, -1] *= spec.perturb_factor
    if spec.target in (Target.Y_ONLY, Target.BOTH):
        y[idx] *= spec.perturb_factor
    return data.with_values(X, y)


def generate(spec: ScenarioSpec) -> Dataset:
    data, _ = generate_clean(spec)
    return inject_outliers(data, spec)


def ill_conditioned_dataset(n: int = 100, gap: float = 1e-7, seed: int = 0) -> Dataset:
    """Intercept plus two predictors differing by ``gap`` times Gaussian noise.

    The default gives a condition number near 2e7, where rank-one updating
    visibly drifts from exact refits while still completing.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    x1 = rng.normal(size=n)
    x2 = x1 + gap * rng.normal(size=n)
    y = 1.0 + x1 + x2 + 0.1 * rng.normal(size=n)
    return Dataset.from_arrays(np.column_stack([x1, x2]), y, labels=["x1", "x2"], intercept=True)
