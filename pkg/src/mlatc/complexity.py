"""Closed-form cost analysis of the layered search structure.

Everything here is a pure function of the design knobs: predicted layer
count for a map size, candidate-set sizes per layer, the per-query cost
model they imply, the scale-free objective whose argmin picks the layer
growth factor, and the node-count space bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Densest-circle-packing ceiling for the node density coefficient.
KAPPA_MAX = math.pi / (2.0 * math.sqrt(3.0))

DEFAULT_RATIOS = (0.0, 0.5, 1.5, 5.0, 10.0)
DEFAULT_GRID = (1.0 + 1e-3, 10.0, 1e-3)


def _check_alpha(alpha: float) -> None:
    if not alpha > 1.0:
        raise ValueError("alpha must be > 1")


@dataclass(frozen=True)
class CostModelParams:
    """Coefficients of the per-query cost model.

    kappa : packing coefficient of nodes per vigilance disc, in (0, KAPPA_MAX].
    distance_cost : cost of one distance evaluation.
    sort_cost : cost coefficient of winner-set ordering (quadratic term).
    ratio : the dimensionless weight sort_cost * kappa / distance_cost;
        derived when omitted, cross-checked when supplied.
    """

    kappa: float = KAPPA_MAX
    distance_cost: float = 1.0
    sort_cost: float = 0.0
    ratio: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa <= KAPPA_MAX + 1e-12:
            raise ValueError("kappa must lie in (0, pi/(2*sqrt(3))]")
        if not self.distance_cost > 0.0:
            raise ValueError("distance_cost must be > 0")
        if self.sort_cost < 0.0:
            raise ValueError("sort_cost must be >= 0")
        derived = self.sort_cost * self.kappa / self.distance_cost
        if self.ratio is None:
            object.__setattr__(self, "ratio", derived)
        elif abs(self.ratio - derived) > 1e-9:
            raise ValueError(
                f"ratio {self.ratio} inconsistent with coefficients ({derived})"
            )


def layer_count(n: int, alpha: float) -> int:
    """Layers needed over n base nodes: ceil(ln n / (2 ln alpha)) + 1."""
    _check_alpha(alpha)
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.ceil(math.log(n) / (2.0 * math.log(alpha))) + 1


def candidate_size(layer_index: int, alpha: float, kappa: float) -> float:
    """Expected candidate-set size when descending into a layer."""
    _check_alpha(alpha)
    if layer_index < 1:
        raise ValueError("layer_index must be >= 1")
    ratio = (1.0 - alpha ** (-float(layer_index))) / (1.0 - 1.0 / alpha)
    return kappa * ratio * ratio


def candidate_size_limit(alpha: float, kappa: float) -> float:
    """Upper bound of candidate_size across layers: kappa * (alpha/(alpha-1))^2."""
    _check_alpha(alpha)
    g = alpha / (alpha - 1.0)
    return kappa * g * g


def total_cost(n: int, alpha: float, params: CostModelParams) -> float:
    """Modeled per-query cost summed over the descent for an n-node map."""
    depth = layer_count(n, alpha)
    total = 0.0
    for layer_index in range(1, depth):
        k_upper = candidate_size(layer_index + 1, alpha, params.kappa)
        k_here = candidate_size(layer_index, alpha, params.kappa)
        total += (
            params.distance_cost * alpha * alpha * k_upper
            + params.sort_cost * k_here * k_here
        )
    return total


def objective_H(alpha: float, ratio: float) -> float:
    """Scale-free per-layer cost objective (natural log).

    H(alpha; r) = alpha^2/ln(alpha) * (alpha/(alpha-1))^2
                + r/ln(alpha) * (alpha/(alpha-1))^4
    """
    _check_alpha(alpha)
    if ratio < 0.0:
        raise ValueError("ratio must be >= 0")
    log_a = math.log(alpha)
    g = alpha / (alpha - 1.0)
    g2 = g * g
    return (alpha * alpha * g2) / log_a + (ratio * g2 * g2) / log_a


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if not (1.0 < lo < hi):
        raise ValueError("need 1 < lo < hi")
    if not step > 0.0:
        raise ValueError("step must be > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + np.arange(count) * step


def alpha_star(
    ratio: float, grid: tuple[float, float, float] = DEFAULT_GRID
) -> float:
    """Grid argmin of the objective; ties resolve to the smaller alpha."""
    alphas = _grid(*grid)
    log_a = np.log(alphas)
    g2 = (alphas / (alphas - 1.0)) ** 2
    values = (alphas * alphas * g2) / log_a + (ratio * g2 * g2) / log_a
    return float(alphas[int(np.argmin(values))])


def optimal_alpha_table(
    ratios: tuple[float, ...] = DEFAULT_RATIOS,
    grid: tuple[float, float, float] = DEFAULT_GRID,
) -> list[tuple[float, float]]:
    """(ratio, optimal alpha) rows across the standard ratio ladder."""
    return [(r, alpha_star(r, grid)) for r in ratios]


def objective_curve(
    ratios: tuple[float, ...] = DEFAULT_RATIOS,
    lo: float = 1.5,
    hi: float = 8.0,
    step: float = 0.05,
) -> tuple[list[float], list[list[float]]]:
    """Objective samples per ratio, for plotting/export: (alphas, columns)."""
    alphas = [float(a) for a in _grid(lo, hi, step)]
    columns = [[objective_H(a, r) for a in alphas] for r in ratios]
    return alphas, columns


def space_bound(n: int, alpha: float) -> float:
    """Upper bound on total nodes across layers given n base nodes."""
    _check_alpha(alpha)
    if n < 1:
        raise ValueError("n must be >= 1")
    return n / (1.0 - alpha ** (-2.0))


def node_density(layer_index: int, config, kappa: float) -> float:
    """Modeled nodes per square meter at a layer's vigilance radius."""
    from .config import layer_vigilance

    radius = layer_vigilance(config, layer_index)
    return kappa / (math.pi * radius * radius)
