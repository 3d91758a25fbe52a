"""Flat adaptive topological clustering.

The single-layer baseline mapper, and the source of the per-layer winner
update rule that the multi-layer learner reuses unchanged: a training
sample either spawns a node (no winner within vigilance), refines the
winner, or additionally links the two winners when both respond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import LearnerConfig
from .graph import LayerGraph, MultiLayerMap

_INF = math.inf

# Below this many candidates a plain Python loop beats numpy dispatch.
# Both paths share one operation order, so the choice never changes results.
_SCALAR_CUTOFF = 8


@dataclass(frozen=True)
class InputPoint:
    """One training sample: a position with optional surface attributes."""

    position: tuple[float, float, float]
    normal: tuple[float, float, float] | None = None
    traversability: int | None = None


class OutcomeKind(Enum):
    NEW_NODE = "new_node"
    UPDATED = "updated"
    UPDATED_WITH_EDGE = "updated_with_edge"


@dataclass(frozen=True)
class WinnerPair:
    """First and second nearest nodes to a query, with their distances.

    Missing winners (layer smaller than two nodes, or candidates filtered
    away) are represented as id None with distance +inf.
    """

    s1: int | None
    d1: float
    s2: int | None
    d2: float


@dataclass
class StepOutcome:
    """What one training step did to one layer."""

    kind: OutcomeKind
    layer_index: int
    node_id: int
    s1: int | None
    s2: int | None
    distance_evals: int = 0


def exhaustive_winners(layer: LayerGraph, qx: float, qy: float, qz: float) -> WinnerPair:
    """Scan every node of the layer for the two nearest; ties go to the
    smaller id."""
    n = layer.count
    if n == 0:
        return WinnerPair(None, _INF, None, _INF)
    if n <= _SCALAR_CUTOFF:
        b1 = -1
        d1 = _INF
        b2 = -1
        d2 = _INF
        for i in range(n):
            dist = layer.distance_to(i + 1, qx, qy, qz)
            if dist < d1:
                b2, d2 = b1, d1
                b1, d1 = i, dist
            elif dist < d2:
                b2, d2 = i, dist
        if b2 < 0:
            return WinnerPair(b1 + 1, d1, None, _INF)
        return WinnerPair(b1 + 1, d1, b2 + 1, d2)
    d = layer.distances_all(qx, qy, qz)
    i1 = int(np.argmin(d))
    d1 = float(d[i1])
    d[i1] = _INF
    i2 = int(np.argmin(d))
    return WinnerPair(i1 + 1, d1, i2 + 1, float(d[i2]))


def update_by_winners(
    point: InputPoint, layer: LayerGraph, pair: WinnerPair, config: LearnerConfig
) -> StepOutcome:
    """Apply one training sample to one layer, given its winner pair.

    Case split on the winner distances against the layer's vigilance:

    * d1 beyond vigilance: insert a node at the sample (nothing else moves).
    * d1 within: bump the winner's win count, pull the winner toward the
      sample at rate 1/(10 m), pull each neighbor at 1/(100 m_k), age every
      incident edge by one, then drop incident edges older than the adaptive
      threshold.
    * d2 also within: additionally (re)connect the two winners at age 0
      before the neighbor pass, so the fresh edge is pulled and aged along
      with the rest.

    With updates disabled only the position moves are skipped; win counts,
    edge creation, and aging still run.
    """
    qx, qy, qz = point.position
    if pair.d1 > layer.vigilance:
        node_id = layer.add_node(qx, qy, qz)
        return StepOutcome(
            OutcomeKind.NEW_NODE, layer.layer_index, node_id, pair.s1, pair.s2
        )

    s1 = pair.s1
    i = s1 - 1
    win = layer.win
    win[i] += 1
    if config.updates_enabled:
        layer.move_node(s1, qx, qy, qz, 1.0 / (10.0 * win[i]))

    made_edge = False
    if pair.s2 is not None and pair.d2 <= layer.vigilance:
        layer.connect(s1, pair.s2)
        made_edge = True

    if config.updates_enabled:
        for k in layer.adj[i]:
            wk = win[k - 1]
            rate = 1.0 / (100.0 * wk) if wk > 0 else 0.01
            layer.move_node(k, qx, qy, qz, rate)

    layer.age_incident_edges(s1)
    layer.remove_aged_edges(s1)

    kind = OutcomeKind.UPDATED_WITH_EDGE if made_edge else OutcomeKind.UPDATED
    return StepOutcome(kind, layer.layer_index, s1, s1, pair.s2)


def update_attribute_maps(
    layer: LayerGraph, node_id: int, point: InputPoint, threshold: float
) -> None:
    """Fold the sample's surface attributes into the affected node.

    The normal is adopted outright the first time and otherwise blended at
    the winner learning rate and renormalized; the traversability label is
    adopted. Consistency flags of the node's incident edges are refreshed:
    an edge is normal-consistent when its endpoint normals' dot product
    reaches the threshold, traversal-consistent when the labels agree.
    """
    if point.normal is None and point.traversability is None:
        return
    i = node_id - 1
    if point.normal is not None:
        current = layer.normals[i]
        if current is None:
            layer.normals[i] = point.normal
        else:
            m = layer.win[i]
            rate = 1.0 / (10.0 * m) if m > 0 else 0.1
            nx, ny, nz = current
            px, py, pz = point.normal
            bx = nx + rate * (px - nx)
            by = ny + rate * (py - ny)
            bz = nz + rate * (pz - nz)
            norm = math.sqrt(bx * bx + by * by + bz * bz)
            layer.normals[i] = (bx / norm, by / norm, bz / norm)
    if point.traversability is not None:
        layer.trav[i] = point.traversability

    my_n = layer.normals[i]
    my_t = layer.trav[i]
    for k in layer.adj[i]:
        pair = (node_id, k) if node_id < k else (k, node_id)
        other_n = layer.normals[k - 1]
        if (
            my_n is not None
            and other_n is not None
            and my_n[0] * other_n[0] + my_n[1] * other_n[1] + my_n[2] * other_n[2]
            >= threshold
        ):
            layer.nor_pairs.add(pair)
        else:
            layer.nor_pairs.discard(pair)
        other_t = layer.trav[k - 1]
        if my_t is not None and other_t is not None and my_t == other_t:
            layer.tra_pairs.add(pair)
        else:
            layer.tra_pairs.discard(pair)


class FlatLearner:
    """Baseline mapper: one layer, exhaustive winner search per sample."""

    def __init__(self, config: LearnerConfig):
        self.config = config
        self.map = MultiLayerMap(config)
        self.distance_evals = 0

    @property
    def layer(self) -> LayerGraph:
        return self.map.layers[0]

    def train_point(self, point: InputPoint) -> StepOutcome:
        layer = self.map.layers[0]
        qx, qy, qz = point.position
        n = layer.count
        pair = exhaustive_winners(layer, qx, qy, qz)
        self.distance_evals += n
        outcome = update_by_winners(point, layer, pair, self.config)
        outcome.distance_evals = n
        update_attribute_maps(
            layer, outcome.node_id, point, self.config.normal_edge_threshold
        )
        return outcome
