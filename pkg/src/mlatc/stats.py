"""Order-statistic helpers shared by edge aging and benchmark summaries.

One rank convention backs everything: the q-quantile of n values is the
linearly interpolated order statistic at fractional rank q * (n - 1).
"""

from __future__ import annotations

import math
from typing import Sequence


def rank_parts(n: int, q: float) -> tuple[int, int, float]:
    """Split the fractional rank q * (n - 1) into (lower, upper, fraction)."""
    if n < 1:
        raise ValueError("need at least one value")
    if not 0.0 <= q <= 1.0:
        raise ValueError("quantile level must lie in [0, 1]")
    rank = q * (n - 1)
    lo = math.floor(rank)
    hi = min(lo + 1, n - 1)
    return lo, hi, rank - lo


def quantile_sorted(values: Sequence[float], q: float) -> float:
    """Quantile of an already ascending-sorted sequence."""
    lo, hi, frac = rank_parts(len(values), q)
    v_lo = values[lo]
    if frac == 0.0:
        return float(v_lo)
    return float(v_lo) + frac * (float(values[hi]) - float(v_lo))


def percentile(values: Sequence[float], q: float) -> float:
    """Quantile of an arbitrary sequence (sorts a copy)."""
    return quantile_sorted(sorted(values), q)


def median(values: Sequence[float]) -> float:
    return percentile(values, 0.5)
