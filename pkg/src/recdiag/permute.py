"""Permutation schedules for trace ensembles.

Permutations are 1-based tuples over ``{1..n}``. Random schedules use
numpy's PCG64 bit generator seeded with the schedule seed; each permutation
is an independent uniform Fisher-Yates shuffle, duplicates allowed.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TooLargeForExhaustive

EXHAUSTIVE_MAX_N = 10
EXHAUSTIVE_MAX_COUNT = 5040
CIRCULAR_MIN_N = 50


class ScheduleKind(str, enum.Enum):
    CIRCULAR = "circular"
    RANDOM = "random"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class PermutationSchedule:
    kind: ScheduleKind
    n: int
    N: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if self.n < 1:
            raise ConfigError("schedule needs n >= 1")
        if self.kind is ScheduleKind.RANDOM and self.N < 1:
            raise ConfigError("random schedule needs N >= 1 permutations")
        if self.kind is ScheduleKind.EXHAUSTIVE and self.n > EXHAUSTIVE_MAX_N:
            raise TooLargeForExhaustive(
                f"exhaustive schedule limited to n <= {EXHAUSTIVE_MAX_N}, got {self.n}")

    @property
    def count(self) -> int:
        if self.kind is ScheduleKind.CIRCULAR:
            return self.n
        if self.kind is ScheduleKind.EXHAUSTIVE:
            return math.factorial(self.n)
        return self.N

    def describe(self) -> str:
        if self.kind is ScheduleKind.RANDOM:
            return f"random:{self.N}"
        return self.kind.value

    @classmethod
    def parse(cls, text: str, n: int, seed: int = 0) -> "PermutationSchedule":
        """Parse ``circular``, ``exhaustive`` or ``random:N``."""
        text = text.strip().lower()
        if text.startswith("random"):
            _, _, count = text.partition(":")
            try:
                N = int(count)
            except ValueError:
                raise ConfigError(f"bad schedule {text!r}; expected random:N") from None
            return cls(ScheduleKind.RANDOM, n, N=N, seed=seed)
        try:
            kind = ScheduleKind(text)
        except ValueError:
            raise ConfigError(f"unknown schedule {text!r}") from None
        return cls(kind, n, seed=seed)


def circular_permutation(n: int, k: int) -> tuple[int, ...]:
    """k-th circular shift (k = 1..n): position i holds ((i + k - 2) mod n) + 1."""
    return tuple(((i + k - 2) % n) + 1 for i in range(1, n + 1))


def schedule_permutations(sched: PermutationSchedule) -> list[tuple[int, ...]]:
    n = sched.n
    if sched.kind is ScheduleKind.CIRCULAR:
        return [circular_permutation(n, k) for k in range(1, n + 1)]
    if sched.kind is ScheduleKind.EXHAUSTIVE:
        return list(itertools.permutations(range(1, n + 1)))
    rng = np.random.Generator(np.random.PCG64(sched.seed))
    return [tuple(int(v) + 1 for v in rng.permutation(n)) for _ in range(sched.N)]


def suggest_schedule(n: int) -> PermutationSchedule:
    """Pick a schedule from the sample size.

    n <= 10 enumerates all orderings when n! <= 5040, otherwise draws
    max(100, n) random orderings; n >= 50 uses the n circular shifts.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if n <= EXHAUSTIVE_MAX_N and math.factorial(n) <= EXHAUSTIVE_MAX_COUNT:
        return PermutationSchedule(ScheduleKind.EXHAUSTIVE, n)
    if n >= CIRCULAR_MIN_N:
        return PermutationSchedule(ScheduleKind.CIRCULAR, n)
    return PermutationSchedule(ScheduleKind.RANDOM, n, N=max(100, n), seed=0)
