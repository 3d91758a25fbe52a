"""Builders and independent re-implementations shared by the test modules."""

from __future__ import annotations

import math

from mlatc.config import LearnerConfig
from mlatc.graph import LayerGraph, MultiLayerMap


def make_config(**overrides) -> LearnerConfig:
    """LearnerConfig sized for unit tests unless a field says otherwise."""
    fields = {
        "iterations_per_frame": 200,
        "base_vigilance": 0.5,
        "alpha": 4.0,
        "rng_seed": 0,
    }
    fields.update(overrides)
    return LearnerConfig(**fields)


def make_layer(
    positions: list[tuple[float, float, float]],
    vigilance: float = 0.5,
    min_edges_for_aging: int = 4,
    with_attributes: bool = False,
) -> LayerGraph:
    layer = LayerGraph(
        1,
        vigilance,
        with_attributes=with_attributes,
        min_edges_for_aging=min_edges_for_aging,
    )
    for x, y, z in positions:
        layer.add_node(x, y, z)
    return layer


def single_layer_map(
    positions: list[tuple[float, float, float]], **config_overrides
) -> MultiLayerMap:
    m = MultiLayerMap(make_config(**config_overrides))
    for x, y, z in positions:
        m.layers[0].add_node(x, y, z)
    return m


def force_age(layer: LayerGraph, i: int, j: int, age: int) -> None:
    """Set an existing edge's age directly, keeping the histogram in step."""
    old = layer.adj[i - 1][j]
    layer.adj[i - 1][j] = age
    layer.adj[j - 1][i] = age
    layer.age_counts[old] -= 1
    while len(layer.age_counts) <= age:
        layer.age_counts.append(0)
    layer.age_counts[age] += 1


def layer_ages(layer: LayerGraph) -> list[int]:
    return sorted(edge.age for edge in layer.edges())


def two_nearest(
    positions: list[tuple[float, float, float]],
    q: tuple[float, float, float],
) -> tuple[int | None, float, int | None, float]:
    """Independent double-loop winner search; ties go to the smaller id.

    Distances use the same operation order as the library kernels so the
    comparison is exact, not approximate.
    """
    qx, qy, qz = q
    scored: list[tuple[float, int]] = []
    for i, (x, y, z) in enumerate(positions):
        dx = x - qx
        dy = y - qy
        dz = z - qz
        scored.append((math.sqrt(dx * dx + dy * dy + dz * dz), i + 1))
    scored.sort()
    if not scored:
        return None, math.inf, None, math.inf
    if len(scored) == 1:
        return scored[0][1], scored[0][0], None, math.inf
    return scored[0][1], scored[0][0], scored[1][1], scored[1][0]


def chain_layer_with_ages(ages: list[int], min_edges_for_aging: int = 4) -> LayerGraph:
    """A path graph with one edge per requested age, histogram kept in step."""
    layer = make_layer(
        [(float(i), 0.0, 0.0) for i in range(len(ages) + 1)],
        min_edges_for_aging=min_edges_for_aging,
    )
    for k, age in enumerate(ages, start=1):
        layer.connect(k, k + 1)
        force_age(layer, k, k + 1, age)
    return layer
