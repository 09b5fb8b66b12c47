"""Monte Carlo estimates and the 3-sigma gate used throughout the reports."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    count: int

    def within(self, reference: float, k: float = 3.0, binomial: bool = True) -> bool:
        """``|value - reference| <= k * sigma``.

        With ``binomial`` the sigma is the binomial spread implied by the
        reference itself, so an exact reference of 0 or 1 demands an exact hit.
        """
        sigma = binomial_sigma(reference, self.count) if binomial else self.stderr
        return abs(self.value - reference) <= k * sigma + 1e-15


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def proportion(successes: int, trials: int) -> Estimate:
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    return Estimate(p, binomial_sigma(p, trials), trials)


def sample_mean(values: Sequence[float] | np.ndarray) -> Estimate:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no samples")
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return Estimate(float(v.mean()), se, int(v.size))
