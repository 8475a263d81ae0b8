"""Rate scaling of a nested entanglement-swapping repeater chain.

With segments of length ``L0`` doubled ``log2(L/L0)`` times, each swap level
succeeds with probability ``p_swap`` and costs a factor 3/2 in waiting time,
so the rate scales as ``(L/L0) ** log2(2 p_swap / 3)``. The proportionality
constant is taken as 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import InvalidInputError


@dataclass(frozen=True)
class RepeaterScenario:
    """Chain geometry and swap success.

    Attributes:
        L: total distance in km.
        L0: elementary segment length in km.
        p_swap: Bell-measurement success probability, in (0, 1].
    """

    L: float = 5120.0
    L0: float = 20.0
    p_swap: float = 0.5

    def __post_init__(self):
        if not self.L0 > 0:
            raise InvalidInputError(f"L0 must be positive, got {self.L0}")
        if self.L < self.L0:
            raise InvalidInputError(f"L ({self.L}) must be at least L0 ({self.L0})")
        if not 0 < self.p_swap <= 1:
            raise InvalidInputError(f"p_swap must lie in (0, 1], got {self.p_swap}")
        levels = math.log2(self.L / self.L0)
        if not math.isclose(levels, round(levels), abs_tol=1e-9):
            warnings.warn(f"L/L0 = {self.L / self.L0:g} is not a power of two", RuntimeWarning, stacklevel=3)

    @property
    def nesting_levels(self) -> float:
        return math.log2(self.L / self.L0)


def rate_scaling(s: RepeaterScenario) -> float:
    return (s.L / s.L0) ** math.log2(2 * s.p_swap / 3)


def parallel_chains_for_unit_rate(s: RepeaterScenario) -> int:
    """Chains needed in parallel for at least one pair per unit time."""
    rate = rate_scaling(s)
    return 1 if rate >= 1 else math.ceil(1 / rate)


def report(s: RepeaterScenario) -> dict:
    return {
        "L": s.L,
        "L0": s.L0,
        "p_swap": s.p_swap,
        "nesting_levels": s.nesting_levels,
        "rate_factor": rate_scaling(s),
        "parallel_chains": parallel_chains_for_unit_rate(s),
    }
