"""Shared learner configuration and the per-layer radius schedules."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LearnerConfig:
    """Knobs shared by the flat and the multi-layer learner.

    Attributes
    ----------
    iterations_per_frame : int
        Training samples drawn from each incoming frame.
    base_vigilance : float
        Vigilance radius of layer 1, in metres.
    alpha : float
        Geometric growth factor of the vigilance radius across layers.
        Must be > 1 or the layer radii would not grow.
    normal_edge_threshold : float
        Minimum dot product between endpoint normals for an edge to be
        flagged as normal-consistent.
    updates_enabled : bool
        When False, winner/neighbor position moves are skipped; win counts,
        edge creation, and aging still run (insertion-only mode).
    min_edges_for_aging : int
        Below this many edges in a layer, aged-edge deletion is skipped
        because the quartile statistics are too thin to trust.
    rng_seed : int
        Seed for the per-frame training-sample draws.
    """

    iterations_per_frame: int = 4000
    base_vigilance: float = 0.5
    alpha: float = 4.0
    normal_edge_threshold: float = 0.9
    updates_enabled: bool = True
    min_edges_for_aging: int = 4
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations_per_frame < 1:
            raise ValueError("iterations_per_frame must be >= 1")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        if not self.base_vigilance > 0.0:
            raise ValueError("base_vigilance must be > 0")
        if not self.alpha > 1.0:
            raise ValueError("alpha must be > 1")
        if not -1.0 <= self.normal_edge_threshold <= 1.0:
            raise ValueError("normal_edge_threshold must be in [-1, 1]")
        if self.min_edges_for_aging < 1:
            raise ValueError("min_edges_for_aging must be >= 1")


def layer_vigilance(config: LearnerConfig, layer_index: int) -> float:
    """Vigilance radius of a layer: base_vigilance * alpha**(layer_index - 1)."""
    if layer_index < 1:
        raise ValueError("layer_index must be >= 1")
    return config.alpha ** (layer_index - 1) * config.base_vigilance


def search_thresholds(config: LearnerConfig, layer_count: int) -> list[float]:
    """Per-layer search radii: cumulative sums of the vigilance schedule.

    Element l-1 bounds how far a layer-l candidate may sit from the query
    while still being able to own a layer-1 node within base_vigilance of it
    (each hop down the hierarchy adds at most one layer's vigilance).
    """
    out: list[float] = []
    acc = 0.0
    for layer_index in range(1, layer_count + 1):
        acc += layer_vigilance(config, layer_index)
        out.append(acc)
    return out


def search_threshold(config: LearnerConfig, layer_index: int) -> float:
    """Search radius of one layer; see search_thresholds."""
    return search_thresholds(config, layer_index)[-1]
